"""Geometric-control toolkit for the Reinhardt problem.

Smoothed ``6k +- 2``-gons as bang-bang trajectories on ``SL2(R) x H*``,
their Pontryagin certification and a shooting search over extremal initial
conditions.
"""

__version__ = "0.1.0"

from . import control, costate, geometry, links, pmp, polygon, search  # noqa: E402
from .exceptions import (BracketFailure, ChartFailure, ClosureFailure,  # noqa: E402
                         DegenerateDenominator, NewtonDivergence, NotPositivelyOriented,
                         ReinhardtError, SingularSystem, StarExit, StepSizeUnderflow)
from .polygon import MINUS, PLUS, PolygonFamily, build_polygon  # noqa: E402

__all__ = [
    "geometry", "control", "links", "costate", "polygon", "pmp", "search",
    "PolygonFamily", "build_polygon", "PLUS", "MINUS",
    "ReinhardtError", "NotPositivelyOriented", "DegenerateDenominator", "StarExit",
    "StepSizeUnderflow", "BracketFailure", "ClosureFailure", "SingularSystem",
    "NewtonDivergence", "ChartFailure",
]
