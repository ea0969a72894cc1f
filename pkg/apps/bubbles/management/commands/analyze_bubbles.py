from pathlib import Path

from django.core.management.base import CommandError

from core.management.base import MinmaxCommand
from core.models import get_target
from core.serializers import BubbleReportSerializer
from core.services import ManifestService, PipelineService
from core.utils import Utils
from apps.bubbles.serializers import AnalyzeRequestSerializer


class Command(MinmaxCommand):
    help = "Classify the marks of a slice sequence and extract its bubble tree."

    def add_command_arguments(self, parser):
        parser.add_argument("--slices", required=True, help="directory of PGRID1 slices, read in name order")
        parser.add_argument("--eps1", type=float, help="energy concentration threshold")
        parser.add_argument("--target", help="target manifold name")
        parser.add_argument("--max-depth", type=int, dest="max_depth", help="bubble recursion depth")

    def config_overrides(self, options):
        return {"target": options.get("target"), "epsilon_1": options.get("eps1")}

    def run(self, config, **options):
        request = AnalyzeRequestSerializer(data={
            key: value
            for key, value in {
                "slices": options["slices"],
                "eps1": config.epsilon_1,
                "max_depth": options.get("max_depth"),
            }.items()
            if value is not None
        })
        if not request.is_valid():
            raise CommandError(f"Invalid request: {dict(request.errors)}")
        data = request.validated_data

        sequence = ManifestService.load_slices(data["slices"], get_target(config.target))
        report = PipelineService.bubble_report(sequence, eps1=data["eps1"], max_depth=data.get("max_depth"))
        checked = BubbleReportSerializer(data=Utils.to_jsonable(report))
        if not checked.is_valid():
            raise CommandError(f"Report failed validation: {dict(checked.errors)}")

        out = Path(config.output_dir)
        path = out if out.suffix == ".json" else out / "bubbles.json"
        self.write_report(path, report)
        self.stdout.write(
            f"verdict {report['verdict']}: {len(report['bubbles'])} bubbles, "
            f"identity residual {report['identity_residual']:.3e}"
        )
