"""DRS toolkit: sequence notation, graphs, Smatch and training data for DRS modelling."""
from __future__ import annotations

from .config import RunConfig
from .const import VERSION
from .coordinator import DrsToolkitCoordinator
from .exceptions import ConfigError, DataError, DrsToolkitError

__version__ = VERSION

__all__ = [
    "ConfigError",
    "DataError",
    "DrsToolkitCoordinator",
    "DrsToolkitError",
    "RunConfig",
    "__version__",
]
