import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.services import GridFileService


class UniformizeCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_constant_metric_writes_the_maps_and_report(self):
        stdout = StringIO()
        call_command("uniformize", "--constant", "4", "0", "1", "--grid", "16", "--delta", "0", "--out", str(self.out), stdout=stdout)
        self.assertIn("tau =", stdout.getvalue())

        report = json.loads((self.out / "uniformize.json").read_text())
        self.assertAlmostEqual(report["tau"][0], 0.0, places=8)
        self.assertAlmostEqual(report["tau"][1], 0.5, places=8)
        self.assertAlmostEqual(report["reduced_tau"][1], 2.0, places=8)
        self.assertEqual(report["word"], ["S"])
        self.assertEqual(GridFileService.read(self.out / "w.pgrid").samples.shape[:2], (16, 16))
        self.assertTrue((self.out / "h.pgrid").exists())

    def test_exactly_one_metric_source(self):
        with self.assertRaises(CommandError):
            call_command("uniformize", "--grid", "16", "--out", str(self.out), stdout=StringIO())

    def test_indefinite_metric_is_reported(self):
        with self.assertRaises(CommandError) as raised:
            call_command("uniformize", "--constant", "1", "2", "1", "--grid", "16", "--delta", "0", "--out", str(self.out), stdout=StringIO())
        self.assertIn("[beltrami-uniformize]", str(raised.exception))
