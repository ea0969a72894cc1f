from .spectral_service import SpectralService
from .pgrid_service import GridFileService
from .beltrami_service import BeltramiService
from .energy_service import EnergyService
from .replacement_service import ReplacementService
from .sweepout_service import SweepoutService
from .tightening_service import TighteningService
from .moduli_service import ModuliService
from .bubble_service import BubbleService
from .scenario_service import ScenarioService
from .manifest_service import ManifestService
from .pipeline_service import PipelineService

__all__ = [
    "SpectralService",
    "GridFileService",
    "BeltramiService",
    "EnergyService",
    "ReplacementService",
    "SweepoutService",
    "TighteningService",
    "ModuliService",
    "BubbleService",
    "ScenarioService",
    "ManifestService",
    "PipelineService",
]
