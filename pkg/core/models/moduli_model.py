from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lattice_model import Mark
from .slice_model import MapSlice


@dataclass(frozen=True, eq=False)
class ModuliPoint:
    """A mark reduced to the fundamental domain, with the PSL(2, Z) word that got it there."""

    tau: Mark
    word: tuple
    matrix: np.ndarray
    original: complex

    def apply(self, tau):
        (a, b), (c, d) = self.matrix
        return (a * tau + b) / (c * tau + d)


@dataclass
class SequenceVerdict:
    """Outcome of classifying a sequence of marks: converged, degenerate or inconclusive."""

    kind: str
    limit: Optional[complex] = None
    reduced: list = field(default_factory=list)
    systoles: list = field(default_factory=list)

    @property
    def tau_sequence(self):
        return [p.tau.tau for p in self.reduced]


@dataclass(frozen=True)
class CylinderRegion:
    """
    Annulus around ``center`` seen as the cylinder [t_min, t_max] x circle.

    The point (t, theta) sits at center + scale * exp(-t) * exp(2 pi i theta);
    theta has period 1 and phi = 2 pi theta is the conformal angle.
    """

    center: tuple
    t_min: float
    t_max: float
    scale: float = 1.0
    theta_period: float = 1.0

    def __post_init__(self):
        if not self.t_max > self.t_min:
            raise ValueError(f"Cylinder needs t_max > t_min, got [{self.t_min}, {self.t_max}]")

    @property
    def inner_radius(self):
        return self.scale * float(np.exp(-self.t_max))

    @property
    def outer_radius(self):
        return self.scale * float(np.exp(-self.t_min))


@dataclass(eq=False)
class Bubble:
    center: tuple
    scales: list
    energy: float
    patch: Optional[MapSlice] = None
    depth: int = 1
    children: list = field(default_factory=list)

    def to_dict(self):
        return {
            "center": [float(c) for c in self.center],
            "scales": [float(r) for r in self.scales],
            "energy": float(self.energy),
            "depth": self.depth,
            "children": [child.to_dict() for child in self.children],
        }


@dataclass(eq=False)
class BubbleTree:
    total_energy: float
    body: Optional[MapSlice] = None
    body_energy: float = 0.0
    bubbles: list = field(default_factory=list)
    residual_neck_energy: float = 0.0
    verdict: Optional[SequenceVerdict] = None

    @property
    def bubble_energy(self):
        return float(sum(b.energy for b in self.bubbles))

    @property
    def identity_residual(self):
        """Relative mismatch of body + bubbles + necks against the total energy."""
        accounted = self.body_energy + self.bubble_energy + self.residual_neck_energy
        return abs(accounted - self.total_energy) / max(abs(self.total_energy), 1e-300)
