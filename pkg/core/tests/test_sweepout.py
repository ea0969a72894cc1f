import numpy as np
from django.test import SimpleTestCase

from core.models import Ball, MapSlice, Sweepout, get_target
from core.services import EnergyService, ScenarioService, SweepoutService
from core.tests.helpers import wavy_slice, wavy_sweepout


def clifford_sweepout(grid, phi):
    target = get_target("sphere3")
    end = MapSlice.constant((grid, grid), (1.0, 0.0, 0.0, 0.0), target)
    return Sweepout.uniform([end, ScenarioService.clifford_slice(grid, phi=phi), end])


class SmoothingTests(SimpleTestCase):
    def test_constant_patch_freezes_the_ball(self):
        u = wavy_slice(32, 0.3)
        patched = SweepoutService.constant_patch(u, center=(0.5, 0.5), radius=0.1)
        distance = Ball((0.5, 0.5), 0.2).distances(u.lattice, u.shape)
        inside = patched.values[distance < 0.1]
        self.assertLess(np.max(np.ptp(inside, axis=0)), 1e-15)
        far = distance >= 0.2
        np.testing.assert_allclose(patched.values[far], u.values[far], atol=1e-14)

    def test_constant_slices_are_left_alone(self):
        u = MapSlice.constant((16, 16), (0.0, 0.0, 1.0), get_target("sphere2"))
        self.assertIs(SweepoutService.constant_patch(u), u)
        self.assertIs(SweepoutService.smooth_slice(u, 0.05), u)

    def test_smoothing_keeps_the_endpoints(self):
        s = wavy_sweepout(16, 5, 0.3)
        smoothed, report = SweepoutService.smooth_sweepout(s, width=0.02, full_output=True)
        self.assertIs(smoothed.slices[0], s.slices[0])
        self.assertIs(smoothed.slices[-1], s.slices[-1])
        self.assertFalse(np.array_equal(smoothed.slices[2].values, s.slices[2].values))
        self.assertEqual(len(report["energies_after"]), 5)

    def test_negative_width_is_rejected(self):
        with self.assertRaises(ValueError):
            SweepoutService.smooth_sweepout(wavy_sweepout(16, 3, 0.3), width=-0.1)


class ReparametrizeTests(SimpleTestCase):
    def test_constant_slice_gets_the_square_mark(self):
        u = MapSlice.constant((16, 16), (0.0, 0.0, 1.0), get_target("sphere2"))
        v, result = SweepoutService.reparametrize_slice(u, 1e-4)
        self.assertIsNone(result)
        self.assertEqual(v.lattice.tau, 1j)

    def test_stretched_clifford_torus_gets_its_conformal_mark(self):
        u = ScenarioService.clifford_slice(16, phi=np.pi / 3)
        v, result = SweepoutService.reparametrize_slice(u, 1e-8)
        self.assertAlmostEqual(abs(v.lattice.tau - 1j * np.sqrt(3.0)), 0.0, places=6)
        self.assertLess(result.residual, 1e-8)

    def test_reparametrized_slice_is_almost_conformal(self):
        s = clifford_sweepout(32, np.pi / 3)
        result, report = SweepoutService.reparametrize_conformal(s, delta=1e-8, full_output=True)
        self.assertIs(result.slices[0], s.slices[0])
        self.assertAlmostEqual(abs(result.marks[1].tau - 1j * np.sqrt(3.0)), 0.0, places=6)
        u = result.slices[1]
        gap = EnergyService.spectral_energy(u) - EnergyService.spectral_area(u)
        self.assertLess(gap, 1e-2 * EnergyService.spectral_area(u))
        self.assertEqual(len(report["defects"]), 3)


class ContinuityTests(SimpleTestCase):
    def test_constant_sweepout_is_continuous(self):
        s = wavy_sweepout(16, 4, 0.0)
        self.assertEqual(SweepoutService.continuity_measure(s), 0.0)

    def test_measure_grows_with_coarser_time_steps(self):
        fine = SweepoutService.continuity_measure(wavy_sweepout(16, 17, 0.3))
        coarse = SweepoutService.continuity_measure(wavy_sweepout(16, 5, 0.3))
        self.assertLess(fine, coarse)

    def test_modulus_scales_with_the_maximal_energy(self):
        s = wavy_sweepout(16, 5, 0.3)
        expected = 2.0 * np.sqrt(SweepoutService.energies(s).max())
        self.assertAlmostEqual(SweepoutService.continuity_modulus(s, factor=2.0), expected)
