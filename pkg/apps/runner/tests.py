import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase


class RunCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def run_command(self, scenario):
        stdout = StringIO()
        call_command(
            "run", "--scenario", scenario, "--grid", "16", "--time-samples", "5", "--rounds", "1",
            "--out", str(self.out), stdout=stdout,
        )
        return stdout.getvalue()

    def test_constant_scenario_writes_artifacts(self):
        printed = self.run_command("constant")
        self.assertIn("round 0:", printed)
        self.assertIn("round 1:", printed)
        self.assertIn("verdict converged", printed)
        for name in ("config.json", "history.csv", "bubbles.json", "final/manifest.json"):
            self.assertTrue((self.out / name).exists(), name)
        self.assertEqual(json.loads((self.out / "config.json").read_text())["rounds"], 1)

    def test_unknown_scenario(self):
        with self.assertRaises(CommandError):
            self.run_command("torus-knot")


class ScenariosCommandTests(SimpleTestCase):
    def test_json_listing(self):
        stdout = StringIO()
        call_command("scenarios", "--json", stdout=stdout)
        listing = json.loads(stdout.getvalue())
        self.assertEqual(len(listing), 5)
        self.assertEqual(listing[0]["name"], "constant")

    def test_plain_listing(self):
        stdout = StringIO()
        call_command("scenarios", stdout=stdout)
        self.assertEqual(len(stdout.getvalue().strip().splitlines()), 5)
