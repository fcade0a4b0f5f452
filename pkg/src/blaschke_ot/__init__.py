"""Numerical geometry of transport-cost sub-level sets and rolling-ball inclusion."""

__version__ = "0.1.0"

from .cost_models import CostModel, DerivativeBundle, PowerCost, power_cost
from .diff_geometry import ImplicitSurface, Polyline2D, TangentFrame

__all__ = [
    "CostModel",
    "DerivativeBundle",
    "ImplicitSurface",
    "Polyline2D",
    "PowerCost",
    "TangentFrame",
    "power_cost",
    "__version__",
]
