import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ScenarioError
from core.models import EXPECTED_OUTCOMES, ScenarioSpec, get_target
from core.services import BeltramiService, EnergyService, ModuliService, ScenarioService, SweepoutService


class LibraryTests(SimpleTestCase):
    def test_listing_order(self):
        names = [spec.name for spec in ScenarioService.scenario_library()]
        self.assertEqual(names, ["constant", "bump", "clifford", "shear-clifford", "degenerate"])

    def test_every_scenario_names_a_known_outcome(self):
        for spec in ScenarioService.scenario_library():
            self.assertIn(spec.expected, EXPECTED_OUTCOMES)
            self.assertEqual(spec.describe()["name"], spec.name)

    def test_unknown_name_lists_the_choices(self):
        with self.assertRaises(ScenarioError) as raised:
            ScenarioService.get_scenario("torus-knot")
        self.assertIn("clifford", raised.exception.available)
        self.assertIn("torus-knot", str(raised.exception))

    def test_unknown_outcome_is_rejected(self):
        with self.assertRaises(ValueError):
            ScenarioSpec("x", "x", ScenarioService.build, "explodes")

    def test_every_scenario_builds(self):
        for spec in ScenarioService.scenario_library():
            s = spec.build(16, 9)
            self.assertEqual(len(s), 9)
            self.assertTrue(s.slices[0].is_constant())
            self.assertTrue(s.slices[-1].is_constant())


class ScenarioShapeTests(SimpleTestCase):
    def test_constant_scenario_has_no_energy(self):
        s = ScenarioService.build("constant", 16, 5, get_target("ellipsoid"))
        np.testing.assert_array_equal(SweepoutService.energies(s), 0.0)
        self.assertEqual(s.target.name, "ellipsoid")

    def test_constant_scenario_defaults_to_the_three_sphere(self):
        s = ScenarioService.build("constant", 16, 3)
        self.assertEqual(s.target.ambient_dim, 4)

    def test_bump_peaks_in_the_middle(self):
        energies = SweepoutService.energies(ScenarioService.build("bump", 32, 9))
        self.assertEqual(int(np.argmax(energies)), 4)
        self.assertEqual(energies[0], 0.0)
        self.assertLess(energies.max(), 0.5)

    def test_clifford_plateau_is_the_clifford_torus(self):
        s = ScenarioService.build("clifford", 32, 7)
        middle = s.slices[3]
        self.assertAlmostEqual(EnergyService.spectral_energy(middle), 2 * np.pi ** 2, places=8)
        self.assertAlmostEqual(EnergyService.spectral_area(middle), 2 * np.pi ** 2, places=8)
        self.assertAlmostEqual(SweepoutService.energies(s).max(), EnergyService.energy(middle))

    def test_shear_plateau_mark_reduces_to_i_sqrt3(self):
        reduced = ModuliService.reduce_to_fundamental_domain(ScenarioService.shear_mark())
        self.assertAlmostEqual(abs(reduced.tau.tau - 1j * np.sqrt(3.0)), 0.0, places=12)

    def test_shear_plateau_marks_converge(self):
        # Times 4/12 .. 8/12 are the plateau of the shear-clifford family.
        s = ScenarioService.build("shear-clifford", 32, 13)
        taus = [
            BeltramiService.uniformize(BeltramiService.pullback_metric(u.values), delta=0.0).tau
            for u in s.slices[4:9]
        ]
        verdict = ModuliService.classify_sequence(taus)
        self.assertEqual(verdict.kind, ScenarioService.get_scenario("shear-clifford").expected)
        self.assertEqual(verdict.kind, "converged")
        expected = ModuliService.reduce_to_fundamental_domain(ScenarioService.shear_mark()).tau.tau
        self.assertLess(abs(verdict.limit - expected), 1e-3)

    def test_degenerate_marks_climb(self):
        times = np.linspace(0.5, 0.75, 9)
        cotangents = [1.0 / np.tan(ScenarioService.degenerate_phi(t)) for t in times]
        self.assertAlmostEqual(cotangents[0], 1.0)
        self.assertAlmostEqual(cotangents[-1], 128.0, places=8)
        self.assertTrue(all(b > a for a, b in zip(cotangents, cotangents[1:])))
        self.assertEqual(ScenarioService.get_scenario("degenerate").analysis_window, (0.5, 0.75))


class GluedSequenceTests(SimpleTestCase):
    def test_each_slice_has_a_bump_at_the_center(self):
        sequence = ScenarioService.glued_bubble_sequence(grid=32, scales=(0.2, 0.1, 0.05))
        self.assertEqual(len(sequence), 3)
        for u in sequence:
            self.assertGreater(u.values[16, 16, 0], 0.9)
            np.testing.assert_allclose(u.values[0, 0], [0.0, 0.0, 1.0])

    def test_well_resolved_bumps_carry_the_same_energy(self):
        first, second = ScenarioService.glued_bubble_sequence(grid=128, scales=(0.2, 0.1))
        e_first, e_second = EnergyService.energy(first), EnergyService.energy(second)
        self.assertAlmostEqual(e_first, e_second, delta=0.1 * e_first)
