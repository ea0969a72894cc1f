import numpy as np
from django.test import SimpleTestCase

from core.exceptions import GeometryError, PreconditionError
from core.models import BallCollection, CylinderRegion, Lattice, MapSlice, SequenceVerdict, get_target
from core.services import BubbleService, EnergyService, ScenarioService
from core.tests.helpers import wavy_slice

FAR = (0.125, 0.125)


def angle_slice(grid, center=(0.5, 0.5)):
    """(cos phi, sin phi, 0) with phi the angle around ``center``: harmonic away from it."""
    lattice = Lattice()
    s, t = np.meshgrid(np.arange(grid) / grid, np.arange(grid) / grid, indexing="ij")
    phi = np.angle(lattice.minimal_displacement(s - center[0], t - center[1]))
    points = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
    return MapSlice.from_points(lattice, points, get_target("sphere2"))


class ConcentrationTests(SimpleTestCase):
    def test_constant_map_gives_the_cap(self):
        u = MapSlice.constant((16, 16), (0.0, 0.0, 1.0), get_target("sphere2"))
        radii = BubbleService.concentration_radii(u, 0.5)
        np.testing.assert_array_equal(radii, 0.5)
        self.assertEqual(len(radii), 16)

    def test_small_total_energy_gives_the_cap(self):
        u = wavy_slice(16, 0.05)
        self.assertLess(EnergyService.energy(u), 0.5)
        np.testing.assert_array_equal(BubbleService.concentration_radii(u, 0.5), 0.5)

    def test_bump_radius_is_detected(self):
        u = ScenarioService.glued_bubble_sequence(scales=(0.2,))[0]
        r_center, r_far = BubbleService.concentration_radii(u, 0.5, centers=[(0.5, 0.5), FAR])
        self.assertGreater(r_center, 0.05)
        self.assertLess(r_center, 0.2)
        self.assertGreater(r_far, 2.0 * r_center)

    def test_ball_energy_at_the_radius_stays_below_threshold(self):
        u = ScenarioService.glued_bubble_sequence(scales=(0.1,))[0]
        r = BubbleService.concentration_radius(u, (0.5, 0.5), 0.5)
        self.assertLessEqual(EnergyService.energy(u, BallCollection.single((0.5, 0.5), r)), 0.5)
        self.assertGreater(EnergyService.energy(u, BallCollection.single((0.5, 0.5), r + 1.0 / 64)), 0.5)

    def test_threshold_must_be_positive(self):
        with self.assertRaises(PreconditionError):
            BubbleService.concentration_radii(wavy_slice(16, 0.1), 0.0)


class ExtractBubblesTests(SimpleTestCase):
    def test_glued_bump_gives_one_bubble(self):
        sequence = ScenarioService.glued_bubble_sequence()
        tree = BubbleService.extract_bubbles(sequence, 0.5, centers=[(0.5, 0.5), FAR, (0.25, 0.75)], max_depth=1)
        self.assertEqual(len(tree.bubbles), 1)
        bubble = tree.bubbles[0]
        self.assertEqual(bubble.center, (0.5, 0.5))
        self.assertEqual(bubble.depth, 1)
        self.assertLess(tree.identity_residual, 1e-6)
        total = EnergyService.energy(sequence[-1])
        self.assertAlmostEqual(tree.total_energy, total, places=9)
        self.assertGreater(bubble.energy, 0.95 * total)
        self.assertLess(tree.body_energy, 0.05 * total)
        self.assertEqual(len(bubble.scales), len(sequence))
        self.assertTrue(bubble.patch.domain_mask is not None)

    def test_two_bumps_give_two_bubbles(self):
        sequence = ScenarioService.glued_bubble_sequence(centers=((0.25, 0.25), (0.75, 0.75)))
        centers = [(0.25, 0.25), (0.75, 0.75), (0.25, 0.75)]
        tree = BubbleService.extract_bubbles(sequence, 0.5, centers=centers, max_depth=1)
        self.assertEqual(sorted(b.center for b in tree.bubbles), [(0.25, 0.25), (0.75, 0.75)])
        self.assertTrue(all(b.depth == 1 for b in tree.bubbles))
        self.assertLess(tree.identity_residual, 1e-6)

    def test_fixed_harmonic_map_is_body_only(self):
        u = ScenarioService.clifford_slice(32)
        tree = BubbleService.extract_bubbles([u, u, u], 0.5)
        self.assertEqual(tree.bubbles, [])
        self.assertIs(tree.body, u)
        self.assertAlmostEqual(tree.body_energy, tree.total_energy)
        self.assertLess(tree.identity_residual, 1e-12)

    def test_degenerate_verdict_moves_the_body_to_the_necks(self):
        sequence = ScenarioService.glued_bubble_sequence()
        tree = BubbleService.extract_bubbles(
            sequence, 0.5, verdict=SequenceVerdict("degenerate"), centers=[(0.5, 0.5)], max_depth=1
        )
        self.assertIsNone(tree.body)
        self.assertEqual(tree.body_energy, 0.0)
        self.assertLess(tree.identity_residual, 1e-6)

    def test_recursion_rescales_the_bubble(self):
        sequence = ScenarioService.glued_bubble_sequence(scales=(0.2, 0.1, 0.05, 0.025))
        tree = BubbleService.extract_bubbles(sequence, 0.5, centers=[(0.5, 0.5)], max_depth=2)
        self.assertEqual(len(tree.bubbles), 1)
        for child in tree.bubbles[0].children:
            self.assertEqual(child.depth, 2)

    def test_bubble_count_is_capped(self):
        sequence = ScenarioService.glued_bubble_sequence(centers=((0.25, 0.25), (0.75, 0.75)))
        tree = BubbleService.extract_bubbles(sequence, 20.0, centers=[(0.25, 0.25), (0.75, 0.75)], max_depth=1)
        self.assertLessEqual(len(tree.bubbles), int(np.ceil(tree.total_energy / 20.0)))

    def test_short_sequence_is_rejected(self):
        sequence = ScenarioService.glued_bubble_sequence(scales=(0.2, 0.1))
        with self.assertRaises(PreconditionError):
            BubbleService.extract_bubbles(sequence, 0.5)

    def test_patch_is_centered_on_the_ball(self):
        u = ScenarioService.glued_bubble_sequence(scales=(0.1,))[0]
        patch = BubbleService.rescaled_patch(u, (0.5, 0.5), 0.1)
        np.testing.assert_allclose(patch.values[32, 32], u.values[32, 32], atol=1e-12)
        self.assertFalse(patch.domain_mask[0, 0])
        self.assertTrue(patch.domain_mask[32, 32])


class NeckTests(SimpleTestCase):
    def setUp(self):
        self.region = CylinderRegion((0.5, 0.5), 0.0, 1.0, scale=0.25)

    def test_constant_neck_has_no_energy(self):
        u = MapSlice.constant((32, 32), (0.0, 0.0, 1.0), get_target("sphere2"))
        report = BubbleService.neck_report(u, self.region)
        self.assertLess(report["E_total"], 1e-20)

    def test_radial_map_has_no_theta_energy(self):
        u = ScenarioService.bump_slice(64, 0.5, center=(0.5, 0.5), radius=0.3)
        report = BubbleService.neck_report(u, self.region)
        self.assertGreater(report["E_total"], 0.0)
        self.assertLess(report["ratio"], 1e-4)
        self.assertGreater(report["defect_lower_bound"], 0.0)

    def test_angular_map_is_all_theta(self):
        report = BubbleService.neck_report(angle_slice(64), self.region)
        self.assertGreater(report["ratio"], 0.99)
        self.assertAlmostEqual(report["E_total"], np.pi, delta=0.05)
        self.assertLess(report["defect_lower_bound"], 0.0)

    def test_annulus_must_fit(self):
        region = CylinderRegion((0.5, 0.5), 0.0, 1.0, scale=0.5)
        with self.assertRaises(GeometryError):
            BubbleService.neck_report(angle_slice(16), region)


class AlmostHarmonicTests(SimpleTestCase):
    def setUp(self):
        self.region = CylinderRegion((0.5, 0.5), 0.0, 1.0, scale=0.3)

    def test_constant_map_passes(self):
        u = MapSlice.constant((32, 32), (0.0, 0.0, 1.0), get_target("sphere2"))
        holds, worst = BubbleService.nu_almost_harmonic_check(u, self.region, nu=0.1, samples=4, seed=2)
        self.assertTrue(holds)
        self.assertEqual(worst["value"], 0.0)

    def test_harmonic_neck_passes(self):
        balls = [BallCollection.single((0.5, 0.7), 0.4), BallCollection.single((0.7, 0.5), 0.4)]
        holds, worst = BubbleService.nu_almost_harmonic_check(angle_slice(64), self.region, nu=0.1, balls=balls)
        self.assertTrue(holds)
        self.assertLess(worst["value"], worst["allowance"])

    def test_rough_bump_fails_and_is_located(self):
        u = ScenarioService.bump_slice(64, 0.3, center=(0.5, 0.7), radius=0.03)
        balls = [BallCollection.single((0.1, 0.1), 0.4), BallCollection.single((0.5, 0.7), 0.4)]
        holds, worst = BubbleService.nu_almost_harmonic_check(u, self.region, nu=0.1, balls=balls)
        self.assertFalse(holds)
        self.assertEqual(worst["balls"][0]["center"], [0.5, 0.7])


class VarifoldTests(SimpleTestCase):
    def test_same_slice_is_at_distance_zero(self):
        u = ScenarioService.clifford_slice(16)
        self.assertEqual(BubbleService.varifold_distance_simplified(u, u), 0.0)

    def test_grid_shift_is_invisible(self):
        u = ScenarioService.clifford_slice(16, phi=0.6)
        v = u.with_values(np.roll(np.roll(u.values, 5, axis=0), 3, axis=1))
        self.assertLess(BubbleService.varifold_distance_simplified(u, v), 1e-6)

    def test_pieces_at_opposite_poles_are_far_apart(self):
        u = ScenarioService.bump_slice(32, 0.5, center=(0.5, 0.5), radius=0.3)
        v = u.with_values(u.values * np.array([1.0, 1.0, -1.0]))
        self.assertGreater(BubbleService.varifold_distance_simplified(u, v), 0.05)

    def test_ambient_spaces_must_agree(self):
        with self.assertRaises(PreconditionError):
            BubbleService.varifold_distance_simplified(wavy_slice(16, 0.1), ScenarioService.clifford_slice(16))
