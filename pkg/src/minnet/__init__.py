"""Minimum norm curve networks interpolating convex scattered data.

A curve network assigns a univariate function to every edge of a
triangulation of the projected data. The package computes networks that
minimize the ``L_p`` norm (``1 < p <= inf``) of the second derivative among
smooth, edge-convex networks interpolating the data.
"""

from .basis import BasicCurveNetwork, build_basic_networks, data_functionals
from .errors import (
    InvalidInput,
    MinNetError,
    NonConvexData,
    NotConverged,
    SolverError,
)
from .geometry import (
    ConvexityReport,
    ScatteredData,
    Triangulation,
    build_triangulation,
    check_convexity,
    validate_scattered,
)
from .linf_solver import (
    Certified,
    LinfOptions,
    LinfSolution,
    NotRepresentable,
    certificate_theorem3,
    solve_linf,
    univariate_min,
)
from .lp_solver import LpSolution, NewtonOptions, solve_lp
from .netcore import CurveNetwork, evaluate, norms, residuals

__version__ = "0.1.0"

__all__ = [
    "BasicCurveNetwork",
    "Certified",
    "ConvexityReport",
    "CurveNetwork",
    "InvalidInput",
    "LinfOptions",
    "LinfSolution",
    "LpSolution",
    "MinNetError",
    "NewtonOptions",
    "NonConvexData",
    "NotConverged",
    "NotRepresentable",
    "ScatteredData",
    "SolverError",
    "Triangulation",
    "build_basic_networks",
    "build_triangulation",
    "certificate_theorem3",
    "check_convexity",
    "data_functionals",
    "evaluate",
    "norms",
    "residuals",
    "solve_linf",
    "solve_lp",
    "univariate_min",
    "validate_scattered",
]
