import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.services import ManifestService, ScenarioService


class AnalyzeBubblesCommandTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.slices = Path(cls.tmp.name) / "sequence"
        ManifestService.save_slices(ScenarioService.glued_bubble_sequence(), cls.slices)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def analyze(self, out, *extra):
        stdout = StringIO()
        call_command(
            "analyze_bubbles", "--slices", str(self.slices), "--eps1", "0.5", "--target", "sphere2",
            "--out", str(out), *extra, stdout=stdout,
        )
        return stdout.getvalue()

    def test_report_in_a_directory(self):
        out = Path(self.tmp.name) / "report"
        printed = self.analyze(out, "--max-depth", "1")
        self.assertIn("verdict", printed)
        report = json.loads((out / "bubbles.json").read_text())
        self.assertIn([0.5, 0.5], [b["center"] for b in report["bubbles"]])
        self.assertLess(report["identity_residual"], 1e-6)

    def test_report_to_a_json_path(self):
        path = Path(self.tmp.name) / "named" / "tree.json"
        self.analyze(path, "--max-depth", "1")
        self.assertEqual(json.loads(path.read_text())["verdict"], "converged")

    def test_missing_directory(self):
        with self.assertRaises(CommandError):
            call_command("analyze_bubbles", "--slices", str(Path(self.tmp.name) / "absent"), stdout=StringIO())
