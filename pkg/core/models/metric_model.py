from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .field_model import PeriodicField
from .lattice_model import Lattice, Mark


@dataclass(frozen=True, eq=False)
class MetricField:
    """Symmetric metric g11 dx^2 + 2 g12 dx dy + g22 dy^2 sampled on T^2_0."""

    g11: PeriodicField
    g12: PeriodicField
    g22: PeriodicField
    delta: float = 0.0

    @classmethod
    def from_arrays(cls, g11, g12, g22, delta=0.0):
        lattice = Lattice()
        return cls(
            PeriodicField(lattice, np.asarray(g11, dtype=float)),
            PeriodicField(lattice, np.asarray(g12, dtype=float)),
            PeriodicField(lattice, np.asarray(g22, dtype=float)),
            float(delta),
        )

    @classmethod
    def constant(cls, shape, g11, g12, g22):
        ones = np.ones(shape)
        return cls.from_arrays(g11 * ones, g12 * ones, g22 * ones)

    @classmethod
    def identity(cls, shape):
        return cls.constant(shape, 1.0, 0.0, 1.0)

    @property
    def shape(self):
        return self.g11.shape

    def arrays(self):
        return self.g11.samples, self.g12.samples, self.g22.samples

    def determinant(self):
        g11, g12, g22 = self.arrays()
        return g11 * g22 - g12 ** 2


@dataclass(frozen=True, eq=False)
class BeltramiField:
    """g = lambda |dz + mu dzbar|^2 with sup |mu| <= bound_k < 1."""

    mu: PeriodicField
    lam: PeriodicField
    bound_k: float

    def reconstruct(self):
        """Metric components (g11, g12, g22) rebuilt from (lambda, mu)."""
        mu = self.mu.samples
        lam = self.lam.samples
        g11 = lam * np.abs(1.0 + mu) ** 2
        g12 = 2.0 * lam * mu.imag
        g22 = lam * np.abs(1.0 - mu) ** 2
        return g11, g12, g22

    @classmethod
    def from_mu(cls, mu, lam=None):
        mu = np.asarray(mu, dtype=complex)
        lattice = Lattice()
        lam = np.ones(mu.shape) if lam is None else np.asarray(lam, dtype=float)
        return cls(PeriodicField(lattice, mu), PeriodicField(lattice, lam), float(np.max(np.abs(mu))))


@dataclass(eq=False)
class UniformizationResult:
    """
    Conformal uniformization of a torus metric.

    The forward map is w(z) = A (z + c conj(z) + s(z)) on T^2_0 with s periodic,
    c = ``g0_mean`` and A = 1 / (1 + c). It sends 0, 1, i to 0, 1, tau. ``w_grid``
    holds w on the T^2_0 grid; ``h_grid`` holds the inverse map sampled on the
    uniform (s, t) grid of T^2_tau, as points of T^2_0 (lifted, not wrapped).
    """

    mark: Mark
    g0_mean: complex
    amplitude: complex
    periodic_part: np.ndarray
    w_grid: np.ndarray
    h_grid: Optional[np.ndarray] = None
    residual: float = 0.0
    conformal_defect: float = 0.0
    iterations: int = 0
    inverse_residual: float = 0.0
    contraction_rates: list = field(default_factory=list)
    beltrami: Optional[BeltramiField] = None

    @property
    def tau(self):
        return self.mark.tau

    @property
    def shape(self):
        return self.w_grid.shape
