"""Grid-cell stream predictor for vessel destination ports and arrival times."""

from .config import EngineConfig
from .engine import PredictionEngine, load_snapshot, save_snapshot
from .geo import CellId, Coord, GridSpec
from .records import AisRecord, Port, PortRegistry

__version__ = "0.1.0"

__all__ = [
    "AisRecord",
    "CellId",
    "Coord",
    "EngineConfig",
    "GridSpec",
    "Port",
    "PortRegistry",
    "PredictionEngine",
    "load_snapshot",
    "save_snapshot",
    "__version__",
]
