import numpy as np
from django.test import SimpleTestCase
from numpy import testing as npt

from core.exceptions import DegeneracyError, PreconditionError
from core.models import BeltramiField, MetricField
from core.services import BeltramiService, ModuliService, ScenarioService


def smooth_mu(shape, sup, seed):
    """Band-limited coefficient with sup |mu| <= sup, independent of the grid."""
    rng = np.random.default_rng(seed)
    rows, cols = shape
    s, t = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
    mu = np.zeros(shape, dtype=complex)
    total = 0.0
    for m in range(-2, 3):
        for n in range(-2, 3):
            coefficient = rng.standard_normal() + 1j * rng.standard_normal()
            mu += coefficient * np.exp(2j * np.pi * (m * s + n * t))
            total += abs(coefficient)
    return sup * mu / total


class MetricToBeltramiTests(SimpleTestCase):
    def test_constant_metric(self):
        beltrami = BeltramiService.metric_to_beltrami(MetricField.constant((16, 16), 4.0, 0.0, 1.0))
        npt.assert_allclose(beltrami.mu.samples, 1.0 / 3.0, atol=1e-14)
        npt.assert_allclose(beltrami.lam.samples, 9.0 / 4.0, atol=1e-14)

    def test_reconstruction_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.standard_normal((2, 2))
            spd = a @ a.T + 0.1 * np.eye(2)
            metric = MetricField.constant((8, 8), spd[0, 0], spd[0, 1], spd[1, 1])
            g11, g12, g22 = BeltramiService.metric_to_beltrami(metric).reconstruct()
            npt.assert_allclose(g11, spd[0, 0], rtol=1e-10)
            npt.assert_allclose(g12, spd[0, 1], rtol=1e-10, atol=1e-12)
            npt.assert_allclose(g22, spd[1, 1], rtol=1e-10)

    def test_degenerate_metric_names_the_node(self):
        g11 = np.ones((8, 8))
        g11[2, 5] = 0.0
        metric = MetricField.from_arrays(g11, np.zeros((8, 8)), np.ones((8, 8)))
        with self.assertRaises(DegeneracyError) as caught:
            BeltramiService.metric_to_beltrami(metric)
        self.assertEqual(caught.exception.node, (2, 5))

    def test_regularization_restores_definiteness(self):
        metric = MetricField.from_arrays(np.ones((8, 8)), np.zeros((8, 8)), np.zeros((8, 8)))
        beltrami = BeltramiService.metric_to_beltrami(BeltramiService.regularize(metric, 1e-2))
        self.assertLess(beltrami.bound_k, 1.0)

    def test_regularization_needs_positive_delta(self):
        with self.assertRaises(PreconditionError):
            BeltramiService.regularize(MetricField.identity((8, 8)), 0.0)


class UniformizeTests(SimpleTestCase):
    def test_constant_coefficient_closed_form(self):
        result = BeltramiService.uniformize(MetricField.constant((64, 64), 4.0, 0.0, 1.0), delta=0.0)
        self.assertAlmostEqual(result.tau.real, 0.0, places=8)
        self.assertAlmostEqual(result.tau.imag, 0.5, places=8)
        self.assertAlmostEqual(float(np.mean(result.beltrami.lam.samples)), 2.25, places=8)

    def test_flat_metric_gives_square_torus(self):
        result = BeltramiService.uniformize(MetricField.identity((16, 16)), delta=0.0)
        self.assertAlmostEqual(abs(result.tau - 1j), 0.0, places=12)
        s, t = np.meshgrid(np.arange(16) / 16, np.arange(16) / 16, indexing="ij")
        npt.assert_allclose(result.h_grid, s + 1j * t, atol=1e-10)
        self.assertAlmostEqual(result.conformal_defect, 0.0, places=10)

    def test_random_coefficients_meet_residual(self):
        for seed in range(4):
            beltrami = BeltramiField.from_mu(smooth_mu((32, 32), 0.5, seed))
            result = BeltramiService.solve_periodic_beltrami(beltrami, tol=1e-12)
            self.assertLessEqual(result.residual, 1e-8)
            self.assertLessEqual(result.iterations, 200)
            self.assertTrue(all(rate < 1.0 for rate in result.contraction_rates[:5]))

    def test_mark_is_stable_under_refinement(self):
        coarse = BeltramiService.solve_periodic_beltrami(BeltramiField.from_mu(smooth_mu((32, 32), 0.2, 7)), tol=1e-13)
        mu_fine = smooth_mu((64, 64), 0.2, 7)
        fine = BeltramiService.solve_periodic_beltrami(BeltramiField.from_mu(mu_fine), tol=1e-13)
        self.assertLess(abs(coarse.tau - fine.tau), 1e-6)

    def test_sup_mu_at_least_one_is_rejected(self):
        with self.assertRaises(PreconditionError):
            BeltramiService.solve_periodic_beltrami(BeltramiField.from_mu(np.full((8, 8), 1.0 + 0j)))

    def test_inverse_residual_is_small(self):
        beltrami = BeltramiField.from_mu(smooth_mu((32, 32), 0.2, 11))
        result = BeltramiService.invert_map(BeltramiService.solve_periodic_beltrami(beltrami))
        self.assertLess(result.inverse_residual, 0.05)

    def test_continuity_probe_vanishes_for_equal_coefficients(self):
        beltrami = BeltramiField.from_mu(smooth_mu((16, 16), 0.3, 5))
        probe = BeltramiService.continuity_probe(beltrami, beltrami)
        self.assertEqual(probe["d_sup_h"], 0.0)
        self.assertEqual(probe["d_Lp_grad"], 0.0)

    def test_continuity_probe_is_small_for_close_coefficients(self):
        mu = smooth_mu((16, 16), 0.3, 5)
        probe = BeltramiService.continuity_probe(BeltramiField.from_mu(mu), BeltramiField.from_mu(1.001 * mu))
        self.assertLess(probe["d_sup_w"], 1e-2)
        self.assertLess(abs(probe["tau_a"] - probe["tau_b"]), 1e-2)


class PullbackTests(SimpleTestCase):
    def test_clifford_pullback_is_conformal(self):
        u = ScenarioService.clifford_slice(32)
        result = BeltramiService.uniformize(BeltramiService.pullback_metric(u.values), delta=0.0)
        self.assertAlmostEqual(abs(result.tau - 1j), 0.0, places=10)

    def test_shear_pullback_reduces_to_closed_form(self):
        u = ScenarioService.clifford_slice(32, phi=np.arccos(0.5), shear=1)
        result = BeltramiService.uniformize(BeltramiService.pullback_metric(u.values), delta=0.0)
        reduced = ModuliService.reduce_to_fundamental_domain(result.tau)
        self.assertAlmostEqual(abs(reduced.tau.tau - 1j * np.sqrt(3.0)), 0.0, places=8)
