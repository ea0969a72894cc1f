from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.exceptions import GeometryError
from .field_model import check_grid_shape
from .lattice_model import Lattice
from .target_model import TargetManifold

ON_TARGET_TOLERANCE = 1e-10
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MapSlice:
    """
    Sampled map from a marked torus grid into an embedded target.

    ``values[i, j]`` is the image of the parameter point (i / rows, j / cols).
    ``domain_mask`` restricts the domain to a disk-like subset of the grid
    (rescaled bubble patches); ``boundary_mask`` marks nodes that replacement
    operations must keep fixed.
    """

    lattice: Lattice
    values: np.ndarray
    target: TargetManifold
    domain_mask: Optional[np.ndarray] = None
    boundary_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 3 or values.shape[2] != self.target.ambient_dim:
            raise GeometryError(
                f"Slice values must have shape (rows, cols, {self.target.ambient_dim}), got {values.shape}"
            )
        check_grid_shape(values.shape)
        drift = float(np.max(self.target.distance_to(values)))
        if drift > ON_TARGET_TOLERANCE:
            raise GeometryError(f"Slice values leave the target by {drift:.3e}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        for name in ("domain_mask", "boundary_mask"):
            mask = getattr(self, name)
            if mask is not None:
                mask = np.array(mask, dtype=bool, copy=True)
                mask.setflags(write=False)
                object.__setattr__(self, name, mask)

    @classmethod
    def from_points(cls, lattice, points, target, **masks):
        """Project arbitrary ambient points onto the target and wrap them as a slice."""
        return cls(lattice, target.project(np.asarray(points, dtype=float)), target, **masks)

    @classmethod
    def constant(cls, shape, point, target, lattice=None):
        rows, cols = check_grid_shape(shape)
        values = np.broadcast_to(target.project(np.asarray(point, dtype=float)), (rows, cols, target.ambient_dim))
        return cls(lattice or Lattice(), values, target)

    @property
    def shape(self):
        return self.values.shape[:2]

    @property
    def mark(self):
        return self.lattice.mark

    def with_values(self, values, lattice=None):
        return MapSlice(
            lattice or self.lattice,
            values,
            self.target,
            domain_mask=self.domain_mask,
            boundary_mask=self.boundary_mask,
        )

    def is_constant(self, tol=0.0):
        return bool(np.max(np.abs(self.values - self.values[:1, :1])) <= tol)

    def parameter_grid(self):
        rows, cols = self.shape
        return np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")


@dataclass(frozen=True)
class Ball:
    """Ball of physical radius ``radius`` around the parameter point ``center``."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise GeometryError(f"Ball radius must be non-negative, got {self.radius}")

    def scaled(self, factor):
        return Ball(self.center, self.radius * factor)

    def distances(self, lattice, shape):
        """Torus distance from every grid node to the center."""
        rows, cols = shape
        s, t = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        return np.abs(lattice.minimal_displacement(s - self.center[0], t - self.center[1]))

    def mask(self, lattice, shape):
        """Nodes strictly inside the ball; ties within 1e-12 are excluded."""
        if 2.0 * self.radius >= lattice.shortest_period():
            raise GeometryError(
                f"Ball of radius {self.radius} wraps around a torus with shortest period "
                f"{lattice.shortest_period():.4f}"
            )
        return self.distances(lattice, shape) < self.radius - TIE_TOLERANCE


@dataclass(frozen=True)
class BallCollection:
    """Finite collection of pairwise disjoint balls."""

    balls: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))

    def __iter__(self):
        return iter(self.balls)

    def __len__(self):
        return len(self.balls)

    @classmethod
    def single(cls, center, radius):
        return cls((Ball(center, radius),))

    def scaled(self, factor):
        """The collection factor * B: same centers, radii multiplied by ``factor``."""
        return BallCollection(tuple(b.scaled(factor) for b in self.balls))

    def check_disjoint(self, lattice):
        for i, first in enumerate(self.balls):
            for second in self.balls[i + 1:]:
                gap = abs(lattice.minimal_displacement(
                    first.center[0] - second.center[0], first.center[1] - second.center[1]
                ))
                if gap < first.radius + second.radius:
                    raise GeometryError(f"Balls {first} and {second} overlap")
        return self

    def mask(self, lattice, shape):
        total = np.zeros(shape, dtype=bool)
        for ball in self.balls:
            total |= ball.mask(lattice, shape)
        return total

    def to_list(self):
        return [{"center": list(b.center), "radius": b.radius} for b in self.balls]
