"""Naive extreme-ray enumeration, used as an oracle for the double description code.

Every (dim-1)-subset of the inequalities is tried: if the subset has full
rank its one-dimensional null space is a candidate ray, kept when it (or its
negative) satisfies all inequalities. Exponential, fine for dim <= 6.
"""

from __future__ import annotations

from itertools import combinations

from .cones import ConeH, ConeV
from .numeric import EXACT, integer_row, nullspace_exact, rank_exact


def brute_force_rays(cone: ConeH) -> ConeV:
    if cone.mode != EXACT:
        raise ValueError("the brute-force oracle runs in exact mode only")
    d = cone.dim
    ineq = [integer_row(r) for r in cone.inequalities]
    eq = [integer_row(r) for r in cone.equalities]
    if nullspace_exact(ineq + eq, d):
        raise ValueError("brute-force oracle expects a pointed cone")
    k = d - 1 - rank_exact(eq, d) if eq else d - 1
    found = []
    for subset in combinations(range(len(ineq)), k):
        rows = [ineq[i] for i in subset] + eq
        ns = nullspace_exact(rows, d)
        if len(ns) != 1:
            continue
        v = ns[0]
        vals = [sum(a * x for a, x in zip(r, v)) for r in ineq]
        if all(s >= 0 for s in vals):
            found.append(v)
        elif all(s <= 0 for s in vals):
            found.append([-x for x in v])
    return ConeV(found, d, mode=EXACT)
