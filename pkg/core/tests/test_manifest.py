import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import GridFileError
from core.models import Lattice, Sweepout, get_target
from core.services import ManifestService, ScenarioService, SweepoutService
from core.tests.helpers import wavy_slice, wavy_sweepout


class ManifestTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.directory = Path(self.tmp.name) / "sweepout"

    def test_round_trip_is_bit_identical(self):
        s = ScenarioService.build("clifford", 16, 7)
        ManifestService.save(s, self.directory)
        loaded = ManifestService.load(self.directory)
        self.assertEqual(len(loaded), len(s))
        np.testing.assert_array_equal(loaded.times, s.times)
        for original, copy in zip(s.slices, loaded.slices):
            self.assertTrue(np.array_equal(original.values, copy.values))
            self.assertEqual(original.lattice, copy.lattice)
        self.assertEqual(loaded.target.describe(), s.target.describe())

    def test_marks_survive(self):
        slices = [wavy_slice(16, 0.0), wavy_slice(16, 0.2, tau=0.3 + 1.2j), wavy_slice(16, 0.0)]
        s = Sweepout.uniform(slices)
        ManifestService.save(s, self.directory)
        self.assertEqual(ManifestService.load(self.directory).marks[1].tau, 0.3 + 1.2j)

    def test_manifest_layout(self):
        path = ManifestService.save(wavy_sweepout(16, 3, 0.2), self.directory)
        manifest = json.loads(path.read_text())
        self.assertEqual(manifest["format"], "minmax-sweepout/1")
        self.assertEqual(manifest["grid"], [16, 16])
        self.assertEqual(manifest["slices"][0], "slices/slice_0000.pgrid")
        self.assertEqual(manifest["target"]["name"], "sphere2")
        self.assertTrue((self.directory / "slices" / "slice_0002.pgrid").exists())

    def test_missing_manifest(self):
        with self.assertRaises(GridFileError):
            ManifestService.load(self.directory)

    def test_invalid_manifest(self):
        ManifestService.save(wavy_sweepout(16, 3, 0.2), self.directory)
        path = self.directory / "manifest.json"
        manifest = json.loads(path.read_text())
        manifest["times"] = manifest["times"][:2]
        path.write_text(json.dumps(manifest))
        with self.assertRaises(GridFileError):
            ManifestService.load(self.directory)

    def test_mark_mismatch(self):
        ManifestService.save(wavy_sweepout(16, 3, 0.2), self.directory)
        path = self.directory / "manifest.json"
        manifest = json.loads(path.read_text())
        manifest["marks"][1] = [0.0, 2.0]
        path.write_text(json.dumps(manifest))
        with self.assertRaises(GridFileError):
            ManifestService.load(self.directory)

    def test_load_slices_in_name_order(self):
        slices = [wavy_slice(16, a) for a in (0.1, 0.2, 0.3)]
        ManifestService.save_slices(slices, self.directory, prefix="u")
        loaded = ManifestService.load_slices(self.directory, get_target("sphere2"))
        energies = SweepoutService.energies(Sweepout.uniform(loaded, ("circle", "circle")))
        self.assertTrue(np.all(np.diff(energies) > 0))
        self.assertEqual(loaded[0].lattice, Lattice())

    def test_load_slices_needs_files(self):
        self.directory.mkdir()
        with self.assertRaises(GridFileError):
            ManifestService.load_slices(self.directory, get_target("sphere2"))

    def test_write_json_converts_numpy_and_complex(self):
        payload = {"a": np.arange(2), "tau": 1j, "e": np.float64(0.5)}
        path = ManifestService.write_json(self.directory / "x.json", payload)
        self.assertEqual(json.loads(path.read_text()), {"a": [0, 1], "e": 0.5, "tau": [0.0, 1.0]})
