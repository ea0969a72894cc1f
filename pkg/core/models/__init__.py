from .lattice_model import Lattice, Mark
from .field_model import PeriodicField, SpectralField, check_grid_shape
from .metric_model import MetricField, BeltramiField, UniformizationResult
from .target_model import (
    TargetManifold,
    Sphere,
    FlatTorusProduct,
    Ellipsoid,
    get_target,
    target_from_description,
    TARGETS,
)
from .slice_model import MapSlice, Ball, BallCollection
from .sweepout_model import (
    Sweepout,
    CoveringEntry,
    CoveringSchedule,
    PropertyStarReport,
    TighteningReport,
    RoundRecord,
    DriveHistory,
)
from .moduli_model import ModuliPoint, SequenceVerdict, CylinderRegion, Bubble, BubbleTree
from .scenario_model import ScenarioSpec, EXPECTED_OUTCOMES
