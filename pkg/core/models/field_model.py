from dataclasses import dataclass, field

import numpy as np

from core.exceptions import GridSizeError
from .lattice_model import Lattice


def is_power_of_two(n):
    return n > 0 and not n & (n - 1)


def check_grid_shape(shape):
    """Raise GridSizeError unless both sides are powers of two and at least 8."""
    rows, cols = int(shape[0]), int(shape[1])
    for side in (rows, cols):
        if side < 8 or not is_power_of_two(side):
            raise GridSizeError(f"Grid sides must be powers of two >= 8, got {rows}x{cols}")
    return rows, cols


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """
    Doubly periodic samples on the fundamental parallelogram of a lattice.

    ``samples[i, j]`` is the value at parameter point (i / rows, j / cols); a
    trailing axis, when present, holds vector components. Index arithmetic wraps,
    so there is no duplicated boundary row or column.
    """

    lattice: Lattice
    samples: np.ndarray
    _zero_mean: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        data = np.array(self.samples, copy=True)
        if data.ndim not in (2, 3):
            raise GridSizeError(f"Samples must be 2-D or 3-D, got shape {data.shape}")
        check_grid_shape(data.shape)
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)

    @property
    def shape(self):
        return self.samples.shape[:2]

    @property
    def components(self):
        return 1 if self.samples.ndim == 2 else self.samples.shape[2]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.samples)

    def mean(self):
        return self.samples.mean(axis=(0, 1))

    def zero_mean(self, tol=1e-10):
        """True when the (0, 0) mode vanishes to ``tol``; cached per tolerance."""
        if tol not in self._zero_mean:
            self._zero_mean[tol] = bool(np.all(np.abs(self.mean()) <= tol))
        return self._zero_mean[tol]

    def parameter_grid(self):
        rows, cols = self.shape
        s = np.arange(rows) / rows
        t = np.arange(cols) / cols
        return np.meshgrid(s, t, indexing="ij")

    @classmethod
    def from_function(cls, func, shape, lattice=None):
        """Sample ``func(s, t)`` on a uniform parameter grid."""
        rows, cols = check_grid_shape(shape)
        s, t = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        return cls(lattice or Lattice(), func(s, t))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Discrete Fourier coefficients; mode (m, n) is exp(2 pi i (m s + n t))."""

    lattice: Lattice
    coefficients: np.ndarray

    @property
    def shape(self):
        return self.coefficients.shape[:2]

    def coefficient(self, m, n):
        rows, cols = self.shape
        return self.coefficients[m % rows, n % cols]

    def frequencies(self):
        """Integer frequency grids (m, n) aligned with ``coefficients``."""
        rows, cols = self.shape
        m = np.fft.fftfreq(rows, d=1.0 / rows)
        n = np.fft.fftfreq(cols, d=1.0 / cols)
        return np.meshgrid(m, n, indexing="ij")
