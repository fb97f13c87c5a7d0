"""Pseudo-spectral laboratory for viscous shallow water with friction and capillarity.

Periodic grids and spectral operators, Littlewood-Paley/Besov diagnostics,
the primitive and momentum formulations, exponential time stepping, a
Picard fixed-point solver and a suite of numerical checks.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .grid import Grid  # noqa: E402
from .littlewood_paley import BesovSpec, besov_norm  # noqa: E402
from .models import MomentumState, Params, PrimitiveState, TransformedState  # noqa: E402
from .propagators import StepperConfig, evolve  # noqa: E402

__all__ = [
    "BesovSpec",
    "Grid",
    "MomentumState",
    "Params",
    "PrimitiveState",
    "StepperConfig",
    "TransformedState",
    "besov_norm",
    "evolve",
]
