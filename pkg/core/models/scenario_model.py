from dataclasses import dataclass
from typing import Callable, Optional

EXPECTED_OUTCOMES = ("trivial", "tightens", "conformal-harmonic", "converged", "degenerate")


@dataclass(frozen=True)
class ScenarioSpec:
    """
    A named initial sweepout.

    ``builder(grid, time_samples, target)`` returns the Sweepout; ``target`` is
    only used by scenarios that accept any target. ``analysis_window`` (a time
    interval) names the slices whose marks the bubble analysis classifies; when
    it is None the per-round maximal slices of the drive are used.
    """

    name: str
    description: str
    builder: Callable
    expected: str
    target_name: Optional[str] = None
    analysis_window: Optional[tuple] = None

    def __post_init__(self):
        if self.expected not in EXPECTED_OUTCOMES:
            raise ValueError(f"Unknown expected outcome '{self.expected}'")

    def build(self, grid, time_samples, target=None):
        return self.builder(grid, time_samples, target)

    def describe(self):
        return {
            "name": self.name,
            "description": self.description,
            "expected": self.expected,
            "target": self.target_name,
        }
