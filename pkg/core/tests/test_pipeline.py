import csv
import json
import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from core.config import load_config
from core.serializers import BubbleReportSerializer, RoundRecordSerializer
from core.services import ManifestService, PipelineService, ScenarioService


class PipelineTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def run_scenario(self, scenario, out, **overrides):
        config = load_config(scenario=scenario, grid_size=16, time_samples=5, rounds=1, **overrides)
        return PipelineService.run_pipeline(config, out=out)

    def read_history(self, out):
        with (out / "history.csv").open() as handle:
            return list(csv.DictReader(handle))

    def test_constant_scenario_writes_every_artifact(self):
        result = self.run_scenario("constant", self.out)
        self.assertEqual(result["status"], 0)
        for name in ("config.json", "history.csv", "bubbles.json", "initial/manifest.json", "final/manifest.json"):
            self.assertTrue((self.out / name).exists(), name)

        rows = self.read_history(self.out)
        self.assertEqual(list(rows[0]), ["round", "maxE", "maxArea", "gap", "worst_property_star"])
        self.assertEqual([row["round"] for row in rows], ["0", "1"])
        self.assertTrue(all(float(row["maxE"]) == 0.0 for row in rows))
        for row in rows:
            self.assertTrue(RoundRecordSerializer(data=row).is_valid())

        report = json.loads((self.out / "bubbles.json").read_text())
        self.assertTrue(BubbleReportSerializer(data=report).is_valid())
        self.assertEqual(report["verdict"], "converged")
        self.assertEqual(report["bubbles"], [])

        config = json.loads((self.out / "config.json").read_text())
        self.assertEqual(config["grid_size"], 16)
        self.assertEqual(len(ManifestService.load(self.out / "final")), 5)

    def test_run_leaves_django_settings_alone(self):
        before = dict(settings.MINMAX)
        self.run_scenario("constant", self.out)
        self.assertEqual(settings.MINMAX, before)

    def test_runs_are_deterministic(self):
        first, second = self.out / "a", self.out / "b"
        self.run_scenario("bump", first, seed=4)
        self.run_scenario("bump", second, seed=4)
        self.assertEqual((first / "history.csv").read_text(), (second / "history.csv").read_text())

    def test_bump_scenario_does_not_gain_energy(self):
        result = self.run_scenario("bump", self.out)
        energies = [record.max_energy for record in result["history"]]
        self.assertLessEqual(energies[-1], energies[0] + 1e-12)

    def test_degenerate_scenario_is_classified(self):
        config = load_config(scenario="degenerate", grid_size=16, time_samples=9, rounds=1)
        result = PipelineService.run_pipeline(config, out=self.out)
        self.assertEqual(result["report"]["verdict"], "degenerate")
        self.assertGreater(result["report"]["tau_sequence"][-1][1], 50.0)


class BubbleReportTests(SimpleTestCase):
    def test_short_sequence_gets_the_verdict_only(self):
        sequence = ScenarioService.glued_bubble_sequence(grid=32, scales=(0.2, 0.1))
        with self.assertLogs("core.services.pipeline_service", level="WARNING"):
            report = PipelineService.bubble_report(sequence)
        self.assertEqual(report["verdict"], "converged")
        self.assertEqual(report["bubbles"], [])

    def test_glued_sequence_reports_a_bubble(self):
        sequence = ScenarioService.glued_bubble_sequence()
        report = PipelineService.bubble_report(sequence, eps1=0.5, max_depth=1)
        self.assertGreaterEqual(len(report["bubbles"]), 1)
        self.assertLess(report["identity_residual"], 1e-6)
        centers = [tuple(b["center"]) for b in report["bubbles"]]
        self.assertIn((0.5, 0.5), centers)
