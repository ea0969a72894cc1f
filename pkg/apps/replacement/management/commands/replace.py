from pathlib import Path

from django.core.management.base import CommandError

from core.management.base import MinmaxCommand
from core.models import Ball, BallCollection, PeriodicField, get_target
from core.services import EnergyService, GridFileService, ManifestService, ReplacementService
from core.utils import Utils
from apps.replacement.serializers import ReplaceReportSerializer, ReplaceRequestSerializer


class Command(MinmaxCommand):
    help = "Harmonic replacement of a slice on a collection of disjoint balls."

    def add_command_arguments(self, parser):
        parser.add_argument("--slice", required=True, help="PGRID1 file of the slice")
        parser.add_argument("--target", help="target manifold name")
        parser.add_argument(
            "--ball", nargs=3, type=float, action="append", metavar=("S", "T", "R"),
            help="ball center (parameter coordinates) and physical radius; repeatable",
        )
        parser.add_argument("--tol", type=float, help="largest nodal move at which relaxation stops")

    def config_overrides(self, options):
        return {"target": options.get("target")}

    def run(self, config, **options):
        request = ReplaceRequestSerializer(data={
            "slice": options["slice"],
            "balls": [{"center": [s, t], "radius": r} for s, t, r in options.get("ball") or []],
            "tol": config.replace_tol if options.get("tol") is None else options["tol"],
            "eps1": config.epsilon_1,
        })
        if not request.is_valid():
            raise CommandError(f"Invalid request: {dict(request.errors)}")
        data = request.validated_data

        u = ManifestService.load_slices(Path(data["slice"]).parent, get_target(config.target), Path(data["slice"]).name)[0]
        balls = BallCollection(tuple(Ball(tuple(b["center"]), b["radius"]) for b in data["balls"]))
        balls.check_disjoint(u.lattice)
        v, details = ReplacementService.harmonic_replace(
            u, balls, tol=data["tol"], max_iter=config.replace_max_iter, eps1=data["eps1"], full_output=True
        )
        report = {
            "balls": balls.to_list(),
            "energy_before": EnergyService.energy(u),
            "energy_after": EnergyService.energy(v),
            "ball_energy_before": details["energy_before"],
            "ball_energy_after": details["energy_after"],
            "gap_defect": ReplacementService.energy_gap_defect(u, v, balls),
            "iterations": details["iterations"],
            "max_move": details["max_move"],
            "converged": details["converged"],
        }
        checked = ReplaceReportSerializer(data=Utils.to_jsonable(report))
        if not checked.is_valid():
            raise CommandError(f"Report failed validation: {dict(checked.errors)}")

        out = Path(config.output_dir)
        GridFileService.write(out / "replaced.pgrid", PeriodicField(v.lattice, v.values))
        self.write_report(out / "replace.json", report)
        self.stdout.write(
            f"E(u) = {report['energy_before']:.10g}  E(H(u)) = {report['energy_after']:.10g}  "
            f"sweeps = {report['iterations']}"
        )
