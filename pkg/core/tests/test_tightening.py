import numpy as np
from django.test import SimpleTestCase

from core.exceptions import HarmonicSliceError, PreconditionError
from core.models import CoveringSchedule, MapSlice, Sweepout, get_target
from core.services import ScenarioService, SweepoutService, TighteningService
from core.tests.helpers import wavy_slice, wavy_sweepout


def harmonic_sweepout(grid):
    target = get_target("sphere3")
    end = MapSlice.constant((grid, grid), (1.0, 0.0, 0.0, 0.0), target)
    return Sweepout.uniform([end, ScenarioService.clifford_slice(grid), end])


class CoveringTests(SimpleTestCase):
    def setUp(self):
        self.sweepout = wavy_sweepout(16, 7, 0.15)

    def test_at_most_two_tents_are_active(self):
        schedule = TighteningService.build_covering(self.sweepout, strict=False)
        self.assertGreater(len(schedule), 0)
        self.assertLessEqual(int(schedule.active_counts().max()), 2)
        for entry in schedule.entries:
            lo, hi = entry.core
            np.testing.assert_array_equal(entry.weights[lo:hi + 1], 1.0)
            self.assertTrue(np.all((entry.weights >= 0.0) & (entry.weights <= 1.0)))
            self.assertEqual(entry.radius_at(0), 0.0)

    def test_near_critical_slices_are_the_upper_half(self):
        schedule = TighteningService.build_covering(self.sweepout, strict=False)
        energies = SweepoutService.energies(self.sweepout)
        for k in schedule.near_critical:
            self.assertGreaterEqual(energies[k], 0.5 * energies.max())

    def test_constant_sweepout_needs_no_covering(self):
        schedule = TighteningService.build_covering(wavy_sweepout(16, 5, 0.0))
        self.assertEqual(len(schedule), 0)

    def test_harmonic_slice_fails_in_strict_mode(self):
        with self.assertRaises(HarmonicSliceError) as raised:
            TighteningService.build_covering(harmonic_sweepout(16))
        self.assertEqual(raised.exception.slice_index, 1)

    def test_harmonic_slice_is_skipped_otherwise(self):
        schedule = TighteningService.build_covering(harmonic_sweepout(16), strict=False)
        self.assertEqual(schedule.skipped, [1])
        self.assertEqual(len(schedule), 0)

    def test_separated_regions_get_separate_tents(self):
        # High energy at slices 1-2 and 5-6, a constant gap at 3-4.
        amplitudes = [0.0, 0.15, 0.15, 0.0, 0.0, 0.15, 0.15, 0.0]
        s = Sweepout.uniform([wavy_slice(16, a) for a in amplitudes])
        schedule = TighteningService.build_covering(s)
        self.assertEqual([entry.core for entry in schedule.entries], [(1, 2), (5, 6)])
        first, second = schedule.entries
        np.testing.assert_array_equal(first.weights * second.weights, 0.0)
        self.assertLessEqual(int(schedule.active_counts().max()), 1)


class TightenTests(SimpleTestCase):
    def test_energies_do_not_increase(self):
        s = wavy_sweepout(16, 7, 0.15)
        schedule = TighteningService.build_covering(s, strict=False)
        tightened, report = TighteningService.tighten(s, schedule)
        self.assertTrue(np.all(report.energies_after <= report.energies_before + 1e-12))
        self.assertLess(report.w_e_estimate, report.energies_before.max())
        self.assertIs(tightened.slices[0], s.slices[0])
        self.assertTrue(report.deformation_steps)

    def test_empty_schedule_is_the_identity(self):
        s = wavy_sweepout(16, 5, 0.15)
        tightened, report = TighteningService.tighten(s, CoveringSchedule(size=5))
        self.assertIs(tightened, s)
        np.testing.assert_array_equal(report.drops, 0.0)


class PropertyStarTests(SimpleTestCase):
    def test_constant_slice_has_zero_defect(self):
        u = MapSlice.constant((16, 16), (0.0, 0.0, 1.0), get_target("sphere2"))
        report = TighteningService.verify_property_star(u, sample_count=4, seed=3)
        self.assertEqual(len(report.samples), 4)
        self.assertEqual(report.worst, 0.0)

    def test_ratio_uses_the_energy_drop(self):
        u = wavy_slice(32, 0.3)
        report = TighteningService.verify_property_star(u, sample_count=3, energy_drop=4.0, seed=3)
        self.assertGreaterEqual(report.worst, 0.0)
        self.assertAlmostEqual(report.ratio, report.worst / 2.0)

    def test_sampling_is_seeded(self):
        u = wavy_slice(16, 0.3)
        first = TighteningService.verify_property_star(u, sample_count=3, seed=9)
        second = TighteningService.verify_property_star(u, sample_count=3, seed=9)
        self.assertEqual(first.samples, second.samples)


class CalibratePsiTests(SimpleTestCase):
    def test_square_root_envelope_is_recovered(self):
        drops = np.linspace(0.01, 1.0, 20)
        result = TighteningService.calibrate_psi([(2.0 * np.sqrt(d), d) for d in drops], seed=0)
        self.assertAlmostEqual(result["c_psi"], 2.0)
        self.assertEqual(result["violation_fraction"], 0.0)
        self.assertEqual(result["calibration_size"] + result["validation_size"], 20)

    def test_needs_two_positive_drops(self):
        with self.assertRaises(PreconditionError):
            TighteningService.calibrate_psi([(1.0, 1.0), (1.0, 0.0)])


class MinmaxDriveTests(SimpleTestCase):
    def test_maximal_energy_never_grows(self):
        s = wavy_sweepout(16, 5, 0.15)
        history = TighteningService.minmax_drive(s, rounds=2, delta_schedule=[1e-2, 5e-3], seed=1)
        self.assertEqual([r.round for r in history.records], [0, 1, 2])
        energies = history.max_energies
        for before, after in zip(energies, energies[1:]):
            self.assertLessEqual(after, before + 1e-12)
        self.assertEqual(len(history.near_critical), 3)
        self.assertEqual(len(history.property_star), 2)
        self.assertTrue(history.sweepout.slices[0].is_constant())

    def test_bump_is_tightened_away(self):
        s = ScenarioService.build("bump", 32, 5)
        history = TighteningService.minmax_drive(s, rounds=2, delta_schedule=[1e-2, 5e-3], seed=1)
        energies = history.max_energies
        self.assertLess(energies[-1], 0.5 * energies[0])
        for before, after in zip(energies, energies[1:]):
            self.assertLessEqual(after, before + 1e-12)
        self.assertGreater(history.schedules[0], 0)

    def test_short_delta_schedule_is_rejected(self):
        with self.assertRaises(ValueError):
            TighteningService.minmax_drive(wavy_sweepout(16, 3, 0.1), rounds=2, delta_schedule=[1e-2])
