import numpy as np
from django.test import SimpleTestCase

from core.models import BallCollection, Lattice, MapSlice, get_target
from core.services import EnergyService, ModuliService, ScenarioService


class EnergyTests(SimpleTestCase):
    """Finite-difference and spectral energy and area."""

    def setUp(self):
        self.clifford = ScenarioService.clifford_slice(64)

    def test_constant_map_has_zero_energy(self):
        u = MapSlice.constant((16, 16), (0.0, 0.0, 1.0), get_target("sphere2"))
        self.assertEqual(EnergyService.energy(u), 0.0)
        self.assertEqual(EnergyService.area(u), 0.0)

    def test_clifford_finite_difference_closed_form(self):
        n = 64
        expected = 2.0 * n ** 2 * np.sin(np.pi / n) ** 2
        self.assertAlmostEqual(EnergyService.energy(self.clifford), expected, places=10)

    def test_clifford_spectral_functionals(self):
        self.assertAlmostEqual(EnergyService.spectral_energy(self.clifford), 2 * np.pi ** 2, places=9)
        self.assertAlmostEqual(EnergyService.spectral_area(self.clifford), 2 * np.pi ** 2, places=9)

    def test_energy_dominates_area(self):
        rng = np.random.default_rng(4)
        target = get_target("sphere2")
        for tau in (1j, 0.3 + 0.8j, -0.4 + 2.0j):
            u = MapSlice.from_points(Lattice(tau), rng.standard_normal((16, 16, 3)), target)
            cells = EnergyService.cell_energies(u.values, u.lattice) - EnergyService.cell_areas(u.values, u.lattice)
            self.assertGreaterEqual(cells.min(), -1e-12)

    def test_clifford_gap_is_tiny(self):
        gap = EnergyService.energy(self.clifford) - EnergyService.area(self.clifford)
        self.assertGreaterEqual(gap, -1e-12)
        self.assertLess(gap, 1e-6)

    def test_region_energies_add_up(self):
        balls = BallCollection.single((0.5, 0.5), 0.2)
        inside = EnergyService.energy(self.clifford, balls)
        self.assertGreater(inside, 0.0)
        self.assertLess(inside, EnergyService.energy(self.clifford))

    def test_empty_region_logs_and_returns_zero(self):
        with self.assertLogs("core.services.energy_service", level="WARNING"):
            value = EnergyService.energy(self.clifford, BallCollection.single((0.5, 0.5), 0.001))
        self.assertEqual(value, 0.0)

    def test_node_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        lattice = Lattice(0.3 + 1.1j)
        values = rng.standard_normal((8, 8, 2))
        gradient = EnergyService.node_gradient(values, lattice)
        step = 1e-6
        for node in ((0, 0), (3, 5), (7, 2)):
            bumped = values.copy()
            bumped[node + (1,)] += step
            numeric = (EnergyService.quadratic_energy(bumped, lattice) - EnergyService.quadratic_energy(values, lattice)) / step
            self.assertAlmostEqual(numeric, gradient[node + (1,)], delta=1e-4 * max(1.0, abs(numeric)))

    def test_harmonic_clifford_has_small_residual(self):
        self.assertLess(EnergyService.harmonicity_residual(self.clifford), 1e-8)


class ModularInvarianceTests(SimpleTestCase):
    def test_spectral_energy_is_invariant_under_resampling(self):
        u = ScenarioService.clifford_slice(32, phi=0.6)
        base_energy = EnergyService.spectral_energy(u)
        base_area = EnergyService.spectral_area(u)
        for matrix in (np.array([[1, 1], [0, 1]]), np.array([[0, -1], [1, 0]]), np.array([[2, 1], [1, 1]])):
            v = ModuliService.resample_for_mark(u, matrix)
            self.assertAlmostEqual(EnergyService.spectral_energy(v) / base_energy, 1.0, places=8)
            self.assertAlmostEqual(EnergyService.spectral_area(v) / base_area, 1.0, places=8)
