"""Polyhedral cones in generator (V) and inequality (H) form.

Conversion between the two forms uses the double description method with
insertion in the given constraint order and the combinatorial adjacency
test. In exact mode all arithmetic is on Python integers (rows are scaled to
primitive integer vectors), so counts are certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .numeric import (
    DEFAULT_TOL,
    EXACT,
    check_mode,
    format_scalar,
    integer_row,
    nullspace_approx,
    nullspace_exact,
    parse_rational,
    primitive,
    rank_approx,
    rank_exact,
    to_fraction,
)


class DimensionError(ValueError):
    pass


class NotPointedError(ValueError):
    """Raised when a pointed cone is required but a lineality space exists."""

    def __init__(self, lineality):
        self.lineality = lineality
        super().__init__(f"cone has a lineality space of dimension {len(lineality)}")


# ---------------------------------------------------------------- canonical form

def _canon_exact(vec) -> tuple:
    fr = [to_fraction(v) for v in vec]
    lead = next((v for v in fr if v != 0), None)
    if lead is None:
        raise ValueError("zero vector is not a valid ray or inequality")
    scale = abs(lead)
    return tuple(v / scale for v in fr)


def _canon_approx(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("zero vector is not a valid ray or inequality")
    if abs(nrm - 1.0) < 1e-12:
        return v  # already unit length; keeps the canonical form a fixed point
    return v / nrm


def canonical_rows(rows: Iterable, mode: str, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Scale, deduplicate and lexicographically sort a list of rays."""
    rows = list(rows)
    if mode == EXACT:
        uniq = sorted({_canon_exact(r) for r in rows})
        out = np.empty((len(uniq), len(uniq[0]) if uniq else 0), dtype=object)
        for i, r in enumerate(uniq):
            out[i, :] = r
        return out
    canon = [_canon_approx(r) for r in rows]
    kept: list[np.ndarray] = []
    for v in canon:
        if not any(np.linalg.norm(v - w) <= 10 * tol for w in kept):
            kept.append(v)
    if not kept:
        return np.zeros((0, 0))
    arr = np.array(kept)
    keys = np.round(arr, 9)
    order = np.lexsort(keys.T[::-1])
    return arr[order]


def _as_rows(rows, dim, mode):
    rows = [] if rows is None else list(rows)
    for r in rows:
        if len(r) != dim:
            raise DimensionError(f"vector of length {len(r)} in a cone of dimension {dim}")
    if mode == EXACT:
        out = np.empty((len(rows), dim), dtype=object)
        for i, r in enumerate(rows):
            out[i, :] = [to_fraction(v) for v in r]
        return out
    return np.asarray(rows, dtype=float).reshape(len(rows), dim)


@dataclass(frozen=True, eq=False)
class ConeV:
    """cone(generators) + span(lineality)."""

    generators: np.ndarray
    dim: int
    lineality: np.ndarray = field(default=None)
    mode: str = EXACT
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        check_mode(self.mode)
        gens = _as_rows(self.generators, self.dim, self.mode)
        nonzero = [g for g in gens if any(v != 0 for v in g)]
        gens = canonical_rows(nonzero, self.mode, self.tol) if nonzero else _as_rows([], self.dim, self.mode)
        object.__setattr__(self, "generators", gens.reshape(len(gens), self.dim))
        lin = _as_rows(self.lineality, self.dim, self.mode)
        object.__setattr__(self, "lineality", lin)

    def __len__(self):
        return len(self.generators)

    @property
    def is_pointed(self) -> bool:
        return len(self.lineality) == 0


@dataclass(frozen=True, eq=False)
class ConeH:
    """{x : inequalities @ x >= 0, equalities @ x == 0}."""

    inequalities: np.ndarray
    dim: int
    equalities: np.ndarray = field(default=None)
    mode: str = EXACT
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        check_mode(self.mode)
        ineq = _as_rows(self.inequalities, self.dim, self.mode)
        nonzero = [g for g in ineq if any(v != 0 for v in g)]
        ineq = canonical_rows(nonzero, self.mode, self.tol) if nonzero else _as_rows([], self.dim, self.mode)
        object.__setattr__(self, "inequalities", ineq.reshape(len(ineq), self.dim))
        object.__setattr__(self, "equalities", _as_rows(self.equalities, self.dim, self.mode))

    def __len__(self):
        return len(self.inequalities)

    def contains(self, point) -> bool:
        return membership(point, self)


# ---------------------------------------------------------------- double description

def _dd_pointed(A: list, k: int, mode: str, tol: float) -> list:
    """Extreme rays of the pointed cone {z in R^k : A z >= 0}; rank(A) == k."""
    m = len(A)
    if k == 0:
        return []
    if mode == EXACT:
        dot = lambda a, r: sum(x * y for x, y in zip(a, r))  # noqa: E731
        rank = rank_exact
    else:
        dot = lambda a, r: float(np.dot(a, r))  # noqa: E731
        rank = lambda rows, ncols=None: rank_approx(rows, tol)  # noqa: E731

    init: list[int] = []
    for i in range(m):
        if rank([A[j] for j in init + [i]], k) > len(init):
            init.append(i)
            if len(init) == k:
                break
    if len(init) < k:
        raise NotPointedError([])

    rays, tight = [], []
    full = 0
    for i in init:
        full |= 1 << i
    for pos, i in enumerate(init):
        others = [A[j] for j in init if j != i]
        if mode == EXACT:
            v = nullspace_exact(others, k)[0] if others else [1]
        else:
            v = list(nullspace_approx(others, k, tol)[0]) if others else [1.0]
        if dot(A[i], v) < 0:
            v = [-x for x in v]
        rays.append(v if mode == EXACT else np.asarray(v) / np.linalg.norm(v))
        tight.append(full & ~(1 << i))

    done = set(init)
    for i in range(m):
        if i in done:
            continue
        done.add(i)
        a = A[i]
        vals = [dot(a, r) for r in rays]
        if mode == EXACT:
            sgn = [(v > 0) - (v < 0) for v in vals]
        else:
            sgn = [0 if abs(v) <= tol else (1 if v > 0 else -1) for v in vals]
        P = [j for j, s in enumerate(sgn) if s > 0]
        N = [j for j, s in enumerate(sgn) if s < 0]
        Z = [j for j, s in enumerate(sgn) if s == 0]
        new_rays, new_tight = [], []
        for p in P:
            for q in N:
                common = tight[p] & tight[q]
                if common.bit_count() < k - 2:
                    continue
                if any((tight[t] & common) == common for t in range(len(rays)) if t != p and t != q):
                    continue
                if mode == EXACT:
                    r = primitive([vals[p] * x - vals[q] * y for x, y in zip(rays[q], rays[p])])
                else:
                    r = vals[p] * np.asarray(rays[q]) - vals[q] * np.asarray(rays[p])
                    r = r / np.linalg.norm(r)
                new_rays.append(r)
                new_tight.append(common | (1 << i))
        bit = 1 << i
        rays = [rays[j] for j in P] + [rays[j] for j in Z] + new_rays
        tight = [tight[j] for j in P] + [tight[j] | bit for j in Z] + new_tight
    return rays


def _double_description(ineq: np.ndarray, eq: np.ndarray, dim: int, mode: str, tol: float):
    """Extreme rays and lineality basis of {x : ineq x >= 0, eq x == 0}."""
    if mode == EXACT:
        A = [integer_row(r) for r in ineq if any(v != 0 for v in r)]
        B = [integer_row(r) for r in eq if any(v != 0 for v in r)]
        lin = nullspace_exact(A + B, dim)
        N = nullspace_exact(B + lin, dim)
        Az = [[sum(a[t] * n[t] for t in range(dim)) for n in N] for a in A]
        Az = [primitive(r) for r in Az if any(r)]
        zr = _dd_pointed(Az, len(N), mode, tol)
        rays = [primitive([sum(z[s] * N[s][t] for s in range(len(N))) for t in range(dim)]) for z in zr]
        return rays, lin
    A = np.array([r / np.linalg.norm(r) for r in np.asarray(ineq, float) if np.linalg.norm(r) > tol]).reshape(-1, dim)
    B = np.array([r / np.linalg.norm(r) for r in np.asarray(eq, float) if np.linalg.norm(r) > tol]).reshape(-1, dim)
    lin = nullspace_approx(np.vstack([A, B]), dim, tol)
    N = nullspace_approx(np.vstack([B, lin]), dim, tol)
    Az = A @ N.T
    Az = [r / np.linalg.norm(r) for r in Az if np.linalg.norm(r) > tol]
    zr = _dd_pointed(Az, len(N), mode, tol)
    rays = [np.asarray(z) @ N for z in zr]
    return rays, [row for row in lin]


def enumerate_rays(cone: ConeH, require_pointed: bool = False) -> ConeV:
    """Extreme rays (and lineality) of an H-form cone."""
    rays, lin = _double_description(cone.inequalities, cone.equalities, cone.dim, cone.mode, cone.tol)
    if require_pointed and len(lin):
        raise NotPointedError(lin)
    return ConeV(rays, cone.dim, lineality=lin, mode=cone.mode, tol=cone.tol)


def dualize(cone: ConeV) -> ConeH:
    """Irredundant H-form of ``cone``.

    The returned inequality normals are exactly the extreme rays of the dual
    cone and the equalities span the orthogonal complement of the cone's
    linear hull. The trivial cone {0} yields zero inequalities (its dual is
    the whole space) with equalities spanning everything.
    """
    rays, lin = _double_description(cone.generators, cone.lineality, cone.dim, cone.mode, cone.tol)
    return ConeH(rays, cone.dim, equalities=lin, mode=cone.mode, tol=cone.tol)


def dual_cone(cone: ConeV) -> ConeV:
    """Generators of the dual cone {y : y.g >= 0 for all g in cone}."""
    h = dualize(cone)
    return ConeV(h.inequalities, cone.dim, lineality=h.equalities, mode=cone.mode, tol=cone.tol)


def same_rays(a: ConeV | np.ndarray, b: ConeV | np.ndarray, mode: str = EXACT, tol: float = DEFAULT_TOL) -> bool:
    """Equality of ray sets up to positive scaling and order."""
    ra = a.generators if isinstance(a, ConeV) else canonical_rows(a, mode, tol)
    rb = b.generators if isinstance(b, ConeV) else canonical_rows(b, mode, tol)
    if len(ra) != len(rb):
        return False
    if len(ra) == 0:
        return True
    if mode == EXACT:
        return {tuple(r) for r in ra} == {tuple(r) for r in rb}
    ra = np.array([_canon_approx(r) for r in ra])
    rb = np.array([_canon_approx(r) for r in rb])
    return all(np.min(np.linalg.norm(rb - r, axis=1)) <= 1e3 * tol for r in ra)


# ---------------------------------------------------------------- membership and extremality

def _check_dim(point, dim):
    if len(point) != dim:
        raise DimensionError(f"point of length {len(point)} in a cone of dimension {dim}")


def membership(point, cone: ConeH | ConeV) -> bool:
    _check_dim(point, cone.dim)
    if isinstance(cone, ConeH):
        if cone.mode == EXACT:
            p = [to_fraction(v) for v in point]
            ok_i = all(sum(a * x for a, x in zip(row, p)) >= 0 for row in cone.inequalities)
            ok_e = all(sum(a * x for a, x in zip(row, p)) == 0 for row in cone.equalities)
            return ok_i and ok_e
        p = np.asarray(point, dtype=float)
        scale = max(1.0, float(np.linalg.norm(p)))
        ok_i = all(float(np.dot(np.asarray(r, float), p)) >= -cone.tol * scale for r in cone.inequalities)
        ok_e = all(abs(float(np.dot(np.asarray(r, float), p))) <= cone.tol * scale for r in cone.equalities)
        return ok_i and ok_e
    return _in_cone_hull(point, cone.generators, cone.lineality, cone.mode, cone.tol)


def _in_cone_hull(point, gens, lineality, mode, tol) -> bool:
    from .lp import InfeasibleError, LinearProgram, solve_lp

    dim = len(point)
    gens = list(gens)
    lin = list(lineality) if lineality is not None else []
    cols = gens + lin + [[-v for v in l] for l in lin]
    if not cols:
        return all(v == 0 for v in point) if mode == EXACT else bool(np.linalg.norm(np.asarray(point, float)) <= tol)
    eq = [[c[t] for c in cols] for t in range(dim)]
    lp = LinearProgram(objective=np.zeros(len(cols), dtype=object if mode == EXACT else float),
                       eq=eq, eq_rhs=list(point), nonnegative=True)
    try:
        solve_lp(lp, mode=mode, tol=tol)
    except InfeasibleError:
        return False
    return True


def is_extremal(point, cone: ConeH | ConeV) -> bool:
    """True when ``point`` spans an extreme ray of the (pointed) cone.

    For a polytope given in homogenised form this is vertex extremality.
    """
    _check_dim(point, cone.dim)
    if not membership(point, cone):
        return False
    if all(v == 0 for v in point):
        return False
    if isinstance(cone, ConeH):
        if cone.mode == EXACT:
            p = [to_fraction(v) for v in point]
            act = [list(r) for r in cone.inequalities if sum(a * x for a, x in zip(r, p)) == 0]
            rank = rank_exact(act + [list(r) for r in cone.equalities], cone.dim)
        else:
            p = np.asarray(point, float)
            scale = max(1.0, float(np.linalg.norm(p)))
            act = [r for r in cone.inequalities if abs(float(np.dot(np.asarray(r, float), p))) <= cone.tol * scale]
            rows = np.array(list(act) + list(cone.equalities), dtype=float).reshape(-1, cone.dim)
            rank = rank_approx(rows, cone.tol)
        return rank == cone.dim - 1
    if cone.mode == EXACT:
        target = _canon_exact(point)
        others = [g for g in cone.generators if tuple(g) != target]
    else:
        target = _canon_approx(point)
        others = [g for g in cone.generators if np.linalg.norm(_canon_approx(g) - target) > 1e3 * cone.tol]
    return not _in_cone_hull(point, others, cone.lineality, cone.mode, cone.tol)


# ---------------------------------------------------------------- text format

def dumps(cone: ConeV | ConeH) -> str:
    """Line-oriented text: header ``V|H dim mode``, then one vector per line.

    Rows are tagged ``R`` (ray), ``L`` (lineality), ``I`` (a.x >= 0) or
    ``E`` (a.x = 0). Exact entries are written as ``p/q``.
    """
    kind = "V" if isinstance(cone, ConeV) else "H"
    lines = [f"{kind} {cone.dim} {cone.mode}"]
    if kind == "V":
        blocks = (("R", cone.generators), ("L", cone.lineality))
    else:
        blocks = (("I", cone.inequalities), ("E", cone.equalities))
    for tag, rows in blocks:
        for r in rows:
            lines.append(tag + " " + " ".join(format_scalar(v) if cone.mode == EXACT else repr(float(v)) for v in r))
    return "\n".join(lines) + "\n"


def loads(text: str) -> ConeV | ConeH:
    header = None
    rows: dict[str, list] = {"R": [], "L": [], "I": [], "E": []}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) not in (2, 3) or parts[0] not in ("V", "H"):
                raise ValueError(f"bad cone header: {line!r}")
            header = (parts[0], int(parts[1]), parts[2] if len(parts) == 3 else EXACT)
            check_mode(header[2])
            continue
        tag, *vals = line.split()
        if tag not in rows:
            raise ValueError(f"unknown row tag {tag!r}")
        if len(vals) != header[1]:
            raise DimensionError(f"row of length {len(vals)} in a cone of dimension {header[1]}")
        rows[tag].append([parse_rational(v) if header[2] == EXACT else float(Fraction(v)) for v in vals])
    if header is None:
        raise ValueError("empty cone description")
    kind, dim, mode = header
    if kind == "V":
        if rows["I"] or rows["E"]:
            raise ValueError("V-form cones only take R and L rows")
        return ConeV(rows["R"], dim, lineality=rows["L"], mode=mode)
    if rows["R"] or rows["L"]:
        raise ValueError("H-form cones only take I and E rows")
    return ConeH(rows["I"], dim, equalities=rows["E"], mode=mode)


def vertices_of_polytope(cone: ConeV, unit: Sequence) -> list:
    """Rescale rays of a homogenised polytope so that ``unit . v == 1``."""
    out = []
    for g in cone.generators:
        s = sum(a * b for a, b in zip(unit, g))
        if s <= 0:
            raise ValueError("ray not normalisable by the given unit functional")
        out.append([v / s for v in g])
    return out
