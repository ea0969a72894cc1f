import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.services import ManifestService, ScenarioService


class TightenCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)
        self.config = self.root / "small.env"
        self.config.write_text("GRID_SIZE=16\nTIME_SAMPLES=5\n")
        self.out = self.root / "out"

    def tighten(self, *args):
        call_command("tighten", *args, "--config", str(self.config), "--out", str(self.out), stdout=StringIO())
        return json.loads((self.out / "tighten.json").read_text())

    def test_bump_scenario(self):
        report = self.tighten("--scenario", "bump")
        self.assertLessEqual(report["max_active"], 2)
        self.assertLessEqual(max(report["energies_after"]), max(report["energies_before"]) + 1e-12)
        self.assertEqual(len(ManifestService.load(self.out / "tightened")), 5)

    def test_saved_sweepout(self):
        ManifestService.save(ScenarioService.build("bump", 16, 5), self.root / "bump")
        report = self.tighten("--sweepout", str(self.root / "bump"))
        self.assertEqual(len(report["energies_before"]), 5)
        self.assertTrue(np.all(np.asarray(report["energies_after"]) >= 0.0))

    def test_unknown_scenario(self):
        with self.assertRaises(CommandError) as raised:
            self.tighten("--scenario", "torus-knot")
        self.assertIn("clifford", str(raised.exception))

    def test_one_source_is_required(self):
        with self.assertRaises(CommandError):
            self.tighten()
