"""Sliding-square reconfiguration: model, Gather&Compact, oracle, benchmarks."""

from ._kernels import NUMBA_ENABLED
from .grid import BoundingBox, Configuration
from .moves import Move, Trace, VerifyReport, verify_trace

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Configuration",
    "Move",
    "NUMBA_ENABLED",
    "Trace",
    "VerifyReport",
    "verify_trace",
    "__version__",
]
