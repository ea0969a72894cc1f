"""
Module core.services.pipeline_service

End-to-end runs: build a scenario, drive it through smoothing, conformal
reparametrization and tightening, then analyse the near-critical sequence.

Output directory layout:
    config.json     the effective configuration
    initial/        manifest.json + slices/ of the scenario sweepout
    final/          manifest.json + slices/ after the last round
    history.csv     round,maxE,maxArea,gap,worst_property_star
    bubbles.json    verdict, tau sequence, bubbles, body and neck energies
"""

import csv
import logging
from pathlib import Path

import numpy as np
from core.config import PipelineConfig, applied
from core.models import get_target
from core.utils import Utils
from .bubble_service import BubbleService
from .manifest_service import ManifestService
from .moduli_service import ModuliService
from .scenario_service import ScenarioService
from .sweepout_service import SweepoutService
from .tightening_service import TighteningService

logger = logging.getLogger(__name__)

HISTORY_HEADER = ("round", "maxE", "maxArea", "gap", "worst_property_star")


class PipelineService:

    @staticmethod
    def write_history(path, records):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(HISTORY_HEADER)
            for r in records:
                writer.writerow([r.round, repr(r.max_energy), repr(r.max_area), repr(r.gap), repr(r.worst_property_star)])
        return path

    @staticmethod
    def bubble_report(sequence, eps1=None, max_depth=None):
        """
        Classify the marks of ``sequence`` and extract its bubble tree.

        Sequences shorter than three slices get the verdict only.
        """
        verdict = ModuliService.classify_sequence([u.mark.tau for u in sequence])
        report = {
            "verdict": verdict.kind,
            "tau_sequence": verdict.tau_sequence,
            "limit": verdict.limit,
            "systoles": verdict.systoles,
            "bubbles": [],
            "body_energy": 0.0,
            "neck_energy": 0.0,
            "total_energy": 0.0,
            "identity_residual": 0.0,
        }
        if len(sequence) < 3:
            logger.warning("sequence of %d slices is too short for bubble extraction", len(sequence))
            return report
        tree = BubbleService.extract_bubbles(sequence, eps1=eps1, verdict=verdict, max_depth=max_depth)
        report.update(
            bubbles=[b.to_dict() for b in tree.bubbles],
            body_energy=tree.body_energy,
            neck_energy=tree.residual_neck_energy,
            total_energy=tree.total_energy,
            identity_residual=tree.identity_residual,
        )
        return report

    @staticmethod
    def analysis_sequence(spec, initial, history, delta):
        """
        The per-round maximal slices, or the reparametrized slices of the
        scenario's analysis window when it names one.
        """
        if spec.analysis_window is None:
            return list(history.near_critical)
        lo, hi = spec.analysis_window
        chosen = [u for t, u in zip(initial.times, initial.slices) if lo <= t <= hi]
        return [SweepoutService.reparametrize_slice(u, delta)[0] for u in chosen]

    @staticmethod
    def run_pipeline(config: PipelineConfig, out=None):
        """
        Run the configured scenario and write every artifact under ``out``
        (default ``config.output_dir``).

        Deterministic for a fixed seed with one thread.

        Returns:
            dict: ``status`` (0), ``output_dir``, ``history`` records and the
            bubble ``report``.
        """
        out = Path(out or config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        spec = ScenarioService.get_scenario(config.scenario)
        logger.info("pipeline: scenario %s into %s", spec.name, out)

        with applied(config):
            ManifestService.write_json(out / "config.json", config.to_dict())
            initial = spec.build(config.grid_size, config.time_samples, get_target(config.target))
            ManifestService.save(initial, out / "initial")

            history = TighteningService.minmax_drive(
                initial,
                rounds=config.rounds,
                delta_schedule=config.delta_schedule,
                eps1=config.epsilon_1,
                threads=config.threads,
                seed=config.seed,
            )
            PipelineService.write_history(out / "history.csv", history.records)
            ManifestService.save(history.sweepout, out / "final")

            sequence = PipelineService.analysis_sequence(spec, initial, history, config.delta)
            report = PipelineService.bubble_report(sequence, eps1=config.epsilon_1)
            ManifestService.write_json(out / "bubbles.json", report)

        energies = np.array(history.max_energies)
        logger.info(
            "pipeline: max energy %.6g -> %.6g, verdict %s", energies[0], energies[-1], report["verdict"]
        )
        return {"status": 0, "output_dir": str(out), "history": history.records, "report": Utils.to_jsonable(report)}
