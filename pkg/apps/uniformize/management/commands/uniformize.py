import logging
from pathlib import Path

import numpy as np
from django.core.management.base import CommandError

from core.management.base import MinmaxCommand
from core.models import MetricField, PeriodicField
from core.services import BeltramiService, GridFileService, ModuliService
from core.utils import Utils
from apps.uniformize.serializers import UniformizeReportSerializer, UniformizeRequestSerializer

logger = logging.getLogger(__name__)


class Command(MinmaxCommand):
    help = "Uniformize a doubly-periodic metric: mark tau, conformal map and diagnostics."

    def add_command_arguments(self, parser):
        parser.add_argument("--constant", nargs=3, type=float, metavar=("G11", "G12", "G22"))
        parser.add_argument("--metric", help="PGRID1 file with components g11, g12, g22")
        parser.add_argument("--grid", type=int, help="grid size for --constant")
        parser.add_argument("--delta", type=float, help="regularization; 0 disables it")

    def run(self, config, **options):
        request = UniformizeRequestSerializer(data={
            key: value
            for key, value in {
                "constant": options.get("constant"),
                "metric": options.get("metric"),
                "grid": options.get("grid") or config.grid_size,
                "delta": config.delta if options.get("delta") is None else options["delta"],
            }.items()
            if value is not None
        })
        if not request.is_valid():
            raise CommandError(f"Invalid request: {dict(request.errors)}")
        data = request.validated_data

        if "constant" in data:
            metric = MetricField.constant((data["grid"], data["grid"]), *data["constant"])
        else:
            samples = GridFileService.read(data["metric"]).samples
            if samples.ndim != 3 or samples.shape[2] != 3:
                raise CommandError(f"{data['metric']} must hold three components (g11, g12, g22)")
            metric = MetricField.from_arrays(samples[..., 0], samples[..., 1], samples[..., 2])

        result = BeltramiService.uniformize(metric, delta=data["delta"], tol=config.solver_tol, max_iter=config.solver_max_iter)
        reduced = ModuliService.reduce_to_fundamental_domain(result.tau)
        report = {
            "tau": result.tau,
            "reduced_tau": reduced.tau.tau,
            "word": list(reduced.word),
            "lambda_mean": float(np.mean(result.beltrami.lam.samples)),
            "amplitude": result.amplitude,
            "residual": result.residual,
            "iterations": result.iterations,
            "conformal_defect": result.conformal_defect,
            "inverse_residual": result.inverse_residual,
            "contraction_rates": result.contraction_rates,
        }
        checked = UniformizeReportSerializer(data=Utils.to_jsonable(report))
        if not checked.is_valid():
            raise CommandError(f"Report failed validation: {dict(checked.errors)}")

        out = Path(config.output_dir)
        lattice = result.beltrami.mu.lattice
        GridFileService.write(out / "w.pgrid", PeriodicField(lattice, result.w_grid))
        GridFileService.write(out / "h.pgrid", PeriodicField(lattice, result.h_grid))
        self.write_report(out / "uniformize.json", report)
        self.stdout.write(f"tau = {result.tau:.12g}  reduced = {reduced.tau.tau:.12g}  residual = {result.residual:.3e}")
