"""
Error hierarchy for the minmax toolkit.

Every error carries ``provenance``, the name of the module family that raised it,
so the runner can report where a pipeline failed. Each class also derives from
the builtin a caller would naturally catch (``ValueError`` for bad input,
``RuntimeError`` for failed computations).
"""


class MinmaxError(Exception):
    """Base class for all toolkit errors."""

    provenance = "core"

    def __init__(self, message, provenance=None):
        super().__init__(message)
        if provenance is not None:
            self.provenance = provenance


class GridSizeError(MinmaxError, ValueError):
    """Grid shape is not a power of two of at least 8 per side."""

    provenance = "periodic-fields"


class GridFileError(MinmaxError, ValueError):
    """A PGRID1 file is malformed."""

    provenance = "periodic-fields"


class PreconditionError(MinmaxError, ValueError):
    """An operation was called outside its stated hypotheses."""


class DegeneracyError(MinmaxError, ValueError):
    """A metric is not positive definite at some node."""

    provenance = "beltrami-uniformize"

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NonConvergenceError(MinmaxError, RuntimeError):
    """An iteration hit its step limit."""

    def __init__(self, message, residual=None, best=None, provenance=None):
        super().__init__(message, provenance)
        self.residual = residual
        self.best = best


class FoldoverError(MinmaxError, RuntimeError):
    """A forward map has a non-positive Jacobian."""

    provenance = "beltrami-uniformize"

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class UniformizationError(MinmaxError, RuntimeError):
    """Uniformizing the pullback metric of a sweepout slice failed."""

    provenance = "sweepout-tighten"

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


class GeometryError(MinmaxError, ValueError):
    """A ball, annulus or projection leaves the region where it is defined."""

    provenance = "harmonic-core"


class HarmonicSliceError(PreconditionError):
    """A slice in the near-critical set admits no local energy decrease."""

    provenance = "sweepout-tighten"

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


class TighteningError(MinmaxError, RuntimeError):
    """A scheduled replacement could not be applied."""

    provenance = "sweepout-tighten"

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ScenarioError(MinmaxError, ValueError):
    """Unknown scenario name."""

    provenance = "cli-runner"

    def __init__(self, name, available):
        super().__init__(f"Unknown scenario '{name}'. Available: {', '.join(available)}")
        self.available = list(available)


class ConfigError(MinmaxError, ValueError):
    """Configuration file or overrides failed validation."""

    provenance = "cli-runner"
