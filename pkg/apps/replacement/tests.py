import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.services import GridFileService, ManifestService
from core.tests.helpers import wavy_slice


class ReplaceCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        root = Path(self.tmp.name)
        ManifestService.save_slices([wavy_slice(32, 0.3)], root / "input", prefix="u")
        self.slice = root / "input" / "u_0000.pgrid"
        self.out = root / "out"

    def replace(self, *balls):
        args = ["replace", "--slice", str(self.slice), "--target", "sphere2", "--out", str(self.out)]
        for ball in balls:
            args += ["--ball", *(str(x) for x in ball)]
        call_command(*args, stdout=StringIO())
        return json.loads((self.out / "replace.json").read_text())

    def test_replacement_lowers_the_energy(self):
        report = self.replace((0.5, 0.5, 0.2))
        self.assertLessEqual(report["energy_after"], report["energy_before"] + 1e-12)
        self.assertLessEqual(report["ball_energy_after"], report["ball_energy_before"] + 1e-12)
        self.assertTrue(report["converged"])
        self.assertEqual(report["balls"][0]["center"], [0.5, 0.5])
        self.assertEqual(GridFileService.read(self.out / "replaced.pgrid").samples.shape, (32, 32, 3))

    def test_overlapping_balls_are_rejected(self):
        with self.assertRaises(CommandError) as raised:
            self.replace((0.5, 0.5, 0.2), (0.6, 0.5, 0.2))
        self.assertIn("[", str(raised.exception))

    def test_a_ball_is_required(self):
        with self.assertRaises(CommandError):
            self.replace()

    def test_missing_slice_file(self):
        self.slice = self.slice.with_name("absent.pgrid")
        with self.assertRaises(CommandError):
            self.replace((0.5, 0.5, 0.2))
