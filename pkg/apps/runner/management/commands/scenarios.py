import json

from core.management.base import MinmaxCommand
from core.services import ScenarioService
from apps.runner.serializers import ScenarioSerializer


class Command(MinmaxCommand):
    help = "List the available scenarios."

    def add_command_arguments(self, parser):
        parser.add_argument("--json", action="store_true", help="print the listing as JSON")

    def run(self, config, **options):
        listing = ScenarioSerializer([spec.describe() for spec in ScenarioService.scenario_library()], many=True).data
        if options.get("json"):
            self.stdout.write(json.dumps(listing, indent=2))
            return
        for item in listing:
            self.stdout.write(f"{item['name']:<16} {item['expected']:<20} {item['description']}")
