"""Exact and floating-point polyhedral computation."""

from .bruteforce import brute_force_rays
from .cones import (
    ConeH,
    ConeV,
    DimensionError,
    NotPointedError,
    dual_cone,
    dualize,
    dumps,
    enumerate_rays,
    is_extremal,
    loads,
    membership,
    same_rays,
    vertices_of_polytope,
)
from .lp import InfeasibleError, LinearProgram, LPError, LPResult, UnboundedError, dual_program, solve_lp
from .numeric import APPROX, DEFAULT_TOL, EXACT, format_scalar, parse_rational, to_fraction

__all__ = [
    "APPROX", "DEFAULT_TOL", "EXACT", "ConeH", "ConeV", "DimensionError", "InfeasibleError",
    "LPError", "LPResult", "LinearProgram", "NotPointedError", "UnboundedError",
    "brute_force_rays", "dual_cone", "dual_program", "dualize", "dumps", "enumerate_rays",
    "format_scalar", "is_extremal", "loads", "membership", "parse_rational", "same_rays",
    "solve_lp", "to_fraction", "vertices_of_polytope",
]
