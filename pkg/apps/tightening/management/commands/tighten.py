from pathlib import Path

from django.core.management.base import CommandError

from core.management.base import MinmaxCommand
from core.models import get_target
from core.services import ManifestService, ScenarioService, TighteningService
from core.utils import Utils
from apps.tightening.serializers import TightenReportSerializer


class Command(MinmaxCommand):
    help = "Build the covering of the near-critical slices and apply one tightening pass."

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--sweepout", help="directory holding manifest.json")
        source.add_argument("--scenario", help="build the sweepout from a named scenario")
        parser.add_argument("--strict", action="store_true", help="fail on harmonic near-critical slices")

    def run(self, config, **options):
        if options.get("sweepout"):
            sweepout = ManifestService.load(options["sweepout"])
        else:
            sweepout = ScenarioService.build(
                options["scenario"], config.grid_size, config.time_samples, get_target(config.target)
            )

        schedule = TighteningService.build_covering(sweepout, eps1=config.epsilon_1, strict=options["strict"])
        tightened, result = TighteningService.tighten(
            sweepout, schedule, tol=config.replace_tol, threads=config.threads, samples=config.homotopy_samples
        )
        counts = schedule.active_counts()
        report = {
            "covering": [
                {
                    "balls": entry.balls.to_list(),
                    "anchor": entry.anchor,
                    "core": list(entry.core),
                    "support": list(entry.support),
                    "decrease": entry.decrease,
                }
                for entry in schedule.entries
            ],
            "max_active": int(counts.max()) if len(counts) else 0,
            "skipped": list(schedule.skipped),
            "energies_before": result.energies_before,
            "energies_after": result.energies_after,
            "areas_after": result.areas_after,
            "continuity_before": result.continuity_before,
            "continuity_after": result.continuity_after,
            "largest_deformation_step": max(result.deformation_steps, default=0.0),
        }
        checked = TightenReportSerializer(data=Utils.to_jsonable(report))
        if not checked.is_valid():
            raise CommandError(f"Report failed validation: {dict(checked.errors)}")

        out = Path(config.output_dir)
        ManifestService.save(tightened, out / "tightened")
        self.write_report(out / "tighten.json", report)
        self.stdout.write(
            f"{len(schedule)} covering entries; max energy "
            f"{result.energies_before.max():.10g} -> {result.energies_after.max():.10g}"
        )
