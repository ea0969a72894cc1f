from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .slice_model import BallCollection

ENDPOINT_KINDS = ("constant", "circle")


@dataclass(frozen=True, eq=False)
class Sweepout:
    """
    Discrete path of marked torus maps over the uniform grid t_k = k / M.

    Marks are carried by the slices' lattices.
    """

    times: np.ndarray
    slices: tuple
    endpoint_kinds: tuple = ("constant", "constant")

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        slices = tuple(self.slices)
        if len(slices) != len(times) or len(times) < 2:
            raise ValueError(f"Sweepout needs one slice per time, got {len(slices)} slices for {len(times)} times")
        if not np.allclose(times, np.linspace(0.0, 1.0, len(times)), atol=1e-12):
            raise ValueError("Sweepout times must be the uniform grid on [0, 1]")
        for kind, end in zip(self.endpoint_kinds, (slices[0], slices[-1])):
            if kind not in ENDPOINT_KINDS:
                raise ValueError(f"Unknown endpoint kind '{kind}'")
            if kind == "constant" and not (end.is_constant() and end.lattice.is_square):
                raise ValueError("Constant endpoints must be constant maps with mark i")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "slices", slices)
        object.__setattr__(self, "endpoint_kinds", tuple(self.endpoint_kinds))

    @classmethod
    def uniform(cls, slices, endpoint_kinds=("constant", "constant")):
        return cls(np.linspace(0.0, 1.0, len(slices)), tuple(slices), endpoint_kinds)

    def __len__(self):
        return len(self.slices)

    @property
    def target(self):
        return self.slices[0].target

    @property
    def marks(self):
        return [s.lattice.mark for s in self.slices]

    @property
    def interior(self):
        return range(1, len(self.slices) - 1)

    def with_slices(self, slices):
        return Sweepout(self.times, tuple(slices), self.endpoint_kinds)


@dataclass(frozen=True, eq=False)
class CoveringEntry:
    """
    One ball collection B_j with its tent r_j sampled at the time grid.

    ``core`` is I^{t_j} as inclusive index bounds; r_j is 1 there and falls
    linearly to 0 at the exclusive ``support`` bounds.
    """

    balls: BallCollection
    anchor: int
    core: tuple
    support: tuple
    weights: np.ndarray
    decrease: float = 0.0

    def radius_at(self, index):
        return float(self.weights[index])


@dataclass(eq=False)
class CoveringSchedule:
    entries: list = field(default_factory=list)
    size: int = 0
    eps1: float = 0.0
    near_critical: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def active_counts(self):
        counts = np.zeros(self.size, dtype=int)
        for entry in self.entries:
            counts += (entry.weights > 0).astype(int)
        return counts


@dataclass
class PropertyStarReport:
    worst: float = 0.0
    samples: list = field(default_factory=list)
    energy_drop: Optional[float] = None

    @property
    def ratio(self):
        """worst / sqrt(energy drop), the quantity bounded by C_psi."""
        if self.energy_drop is None or self.energy_drop <= 0:
            return None
        return self.worst / float(np.sqrt(self.energy_drop))


@dataclass(eq=False)
class TighteningReport:
    energies_before: np.ndarray
    energies_after: np.ndarray
    areas_after: np.ndarray
    continuity_before: float = 0.0
    continuity_after: float = 0.0
    deformation_steps: list = field(default_factory=list)
    property_star: list = field(default_factory=list)

    @property
    def w_estimate(self):
        return float(np.max(self.areas_after))

    @property
    def w_e_estimate(self):
        return float(np.max(self.energies_after))

    @property
    def drops(self):
        return self.energies_before - self.energies_after


@dataclass
class RoundRecord:
    round: int
    max_energy: float
    max_area: float
    gap: float
    worst_property_star: float
    delta: float
    argmax: int = 0
    mark_at_max: complex = 1j
    near_critical_defect: float = 0.0
    covering_size: int = 0
    rejected_reparametrizations: int = 0


@dataclass(eq=False)
class DriveHistory:
    """Per-round records of a min-max drive plus the artifacts later stages need."""

    records: list = field(default_factory=list)
    sweepout: Optional[Sweepout] = None
    near_critical: list = field(default_factory=list)
    property_star: list = field(default_factory=list)
    schedules: list = field(default_factory=list)

    @property
    def max_energies(self):
        return [r.max_energy for r in self.records]
