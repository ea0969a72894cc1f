from django.core.management.base import CommandError

from core.management.base import MinmaxCommand
from core.services import PipelineService
from apps.runner.serializers import RunSummarySerializer


class Command(MinmaxCommand):
    help = "Run a scenario through smoothing, reparametrization, tightening and bubble analysis."

    def add_command_arguments(self, parser):
        parser.add_argument("--scenario", help="scenario name (see the scenarios command)")
        parser.add_argument("--rounds", type=int)
        parser.add_argument("--grid", type=int, dest="grid_size")
        parser.add_argument("--time-samples", type=int, dest="time_samples")

    def config_overrides(self, options):
        return {key: options.get(key) for key in ("scenario", "rounds", "grid_size", "time_samples")}

    def run(self, config, **options):
        result = PipelineService.run_pipeline(config)
        records = result["history"]
        summary = {
            "status": result["status"],
            "output_dir": result["output_dir"],
            "rounds": records[-1].round,
            "initial_max_energy": records[0].max_energy,
            "final_max_energy": records[-1].max_energy,
            "final_gap": records[-1].gap,
            "verdict": result["report"]["verdict"],
        }
        checked = RunSummarySerializer(data=summary)
        if not checked.is_valid():
            raise CommandError(f"Run summary failed validation: {dict(checked.errors)}")
        for r in records:
            self.stdout.write(f"round {r.round}: maxE={r.max_energy:.10g} maxArea={r.max_area:.10g} gap={r.gap:.3e}")
        self.stdout.write(self.style.SUCCESS(
            f"{config.scenario}: verdict {summary['verdict']}, artifacts in {summary['output_dir']}"
        ))
