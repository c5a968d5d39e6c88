"""Dense two-phase simplex over exact rationals or floats.

Problems here are tiny (tens of variables, a few hundred rows), so a dense
tableau is simpler and more robust than anything sparse. Exact mode uses
Bland's rule and therefore always terminates; approx mode uses the largest
reduced cost with a largest-pivot tie-break and falls back to Bland's rule
when it stalls on degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numeric import APPROX, DEFAULT_TOL, EXACT, check_mode, exact_array


class LPError(RuntimeError):
    pass


class InfeasibleError(LPError):
    pass


class UnboundedError(LPError):
    pass


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Optimise ``objective @ x`` subject to ``ineq @ x >= ineq_rhs`` and
    ``eq @ x == eq_rhs``.

    Variables are free unless ``nonnegative`` is set.
    """

    objective: np.ndarray
    ineq: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    eq: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    sense: str = "max"
    nonnegative: bool = False

    def __post_init__(self):
        n = len(self.objective)
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        for name in ("ineq", "eq"):
            mat = getattr(self, name)
            rhs = getattr(self, name + "_rhs")
            if mat is None or len(mat) == 0:
                continue
            if any(len(row) != n for row in mat):
                raise ValueError(f"{name} rows must have length {n} (objective dimension)")
            if rhs is not None and len(rhs) != len(mat):
                raise ValueError(f"{name}_rhs length does not match {name}")

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True, eq=False)
class LPResult:
    value: object
    x: np.ndarray
    iterations: int


def _rows(mat, rhs, n, mode):
    if mat is None or len(mat) == 0:
        dtype = object if mode == EXACT else float
        return np.zeros((0, n), dtype=dtype), np.zeros(0, dtype=dtype)
    if mode == EXACT:
        m = exact_array(mat).reshape(-1, n)
        r = exact_array(rhs if rhs is not None else [0] * len(m))
    else:
        m = np.asarray(mat, dtype=float).reshape(-1, n)
        r = np.asarray(rhs if rhs is not None else np.zeros(len(m)), dtype=float)
    return m, r


class _Tableau:
    def __init__(self, T, basis, mode, tol):
        self.T = T
        self.basis = basis
        self.mode = mode
        self.tol = tol if mode == APPROX else 0
        self.iterations = 0

    def pivot(self, r, j):
        T = self.T
        T[r] = T[r] / T[r, j]
        col = T[:, j].copy()
        col[r] = 0
        T -= np.multiply.outer(col, T[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, cost_row_index, allowed, max_iter):
        """Maximise; the cost row holds reduced costs and -z in its last slot."""
        T = self.T
        tol = self.tol
        nrows = T.shape[0] - 1
        bland = self.mode == EXACT
        stall = 0
        for _ in range(max_iter):
            d = T[cost_row_index, :-1]
            cand = [j for j in allowed if d[j] > tol]
            if not cand:
                return
            if bland:
                j = cand[0]
            else:
                j = max(cand, key=lambda k: (d[k], -k))
            col = T[:nrows, j]
            rhs = T[:nrows, -1]
            rows = [i for i in range(nrows) if col[i] > tol]
            if not rows:
                raise UnboundedError("objective is unbounded on the feasible region")
            ratios = {i: rhs[i] / col[i] for i in rows}
            best = min(ratios.values())
            if bland:
                ties = [i for i in rows if ratios[i] == best]
                r = min(ties, key=lambda i: self.basis[i])
            else:
                ties = [i for i in rows if ratios[i] <= best + tol]
                r = max(ties, key=lambda i: (col[i], -self.basis[i]))
                if best <= tol:
                    stall += 1
                    if stall > 50:
                        bland = True
                else:
                    stall = 0
            self.pivot(r, j)
        raise LPError("simplex iteration limit reached")


def solve_lp(lp: LinearProgram, mode: str = EXACT, tol: float = DEFAULT_TOL) -> LPResult:
    """Solve ``lp``; returns the optimal value and an optimal vertex.

    Raises :class:`InfeasibleError` or :class:`UnboundedError`.
    """
    check_mode(mode)
    n = lp.num_vars
    zero = Fraction(0) if mode == EXACT else 0.0
    one = Fraction(1) if mode == EXACT else 1.0
    G, h = _rows(lp.ineq, lp.ineq_rhs, n, mode)
    A, b = _rows(lp.eq, lp.eq_rhs, n, mode)
    c = exact_array(lp.objective) if mode == EXACT else np.asarray(lp.objective, dtype=float)
    if lp.sense == "min":
        c = -c

    m1, m2 = len(G), len(A)
    nv = n if lp.nonnegative else 2 * n
    m = m1 + m2
    ncols = nv + m1 + m
    dtype = object if mode == EXACT else float
    T = np.empty((m + 1, ncols + 1), dtype=dtype)
    T[...] = zero
    for i in range(m):
        row = G[i] if i < m1 else A[i - m1]
        rhs = h[i] if i < m1 else b[i - m1]
        T[i, :n] = row
        if not lp.nonnegative:
            T[i, n:2 * n] = -row
        if i < m1:
            T[i, nv + i] = -one
        T[i, -1] = rhs
        if rhs < 0:
            T[i] = -T[i]
        T[i, nv + m1 + i] = one

    tab = _Tableau(T, [nv + m1 + i for i in range(m)], mode, tol)
    max_iter = 50 * (ncols + m + 10)
    art = set(range(nv + m1, ncols))

    # phase 1: maximise -(sum of artificials)
    T[m, :] = zero
    for i in range(m):
        T[m] += T[i]
    for j in art:
        T[m, j] = zero
    tab.run(m, list(range(nv + m1)), max_iter)
    infeas = T[m, -1]
    if (mode == EXACT and infeas != 0) or (mode == APPROX and abs(infeas) > tol * max(1.0, m)):
        raise InfeasibleError("constraints admit no feasible point")

    keep = []
    for i in range(m):
        if tab.basis[i] in art:
            j = next((j for j in range(nv + m1) if abs(T[i, j]) > tab.tol), None)
            if j is None:
                continue  # redundant equality
            tab.pivot(i, j)
        keep.append(i)
    T = np.concatenate([T[keep][:, : nv + m1], T[keep][:, -1:]], axis=1)
    basis = [tab.basis[i] for i in keep]
    mk = len(keep)

    cfull = np.empty(nv + m1, dtype=dtype)
    cfull[...] = zero
    cfull[:n] = c
    if not lp.nonnegative:
        cfull[n:2 * n] = -c
    cost = np.empty(nv + m1 + 1, dtype=dtype)
    cost[:-1] = cfull
    cost[-1] = zero
    for i in range(mk):
        cb = cfull[basis[i]]
        if cb != 0:
            cost = cost - cb * T[i]
    T2 = np.concatenate([T, cost[None, :]], axis=0)
    tab2 = _Tableau(T2, basis, mode, tol)
    tab2.iterations = tab.iterations
    tab2.run(mk, list(range(nv + m1)), max_iter)

    y = np.empty(nv + m1, dtype=dtype)
    y[...] = zero
    for i, bvar in enumerate(tab2.basis):
        y[bvar] = T2[i, -1]
    x = y[:n] if lp.nonnegative else y[:n] - y[n:2 * n]
    value = sum((ci * xi for ci, xi in zip(exact_array(lp.objective) if mode == EXACT
                                            else np.asarray(lp.objective, dtype=float), x)), zero)
    return LPResult(value=value, x=x, iterations=tab2.iterations)


def dual_program(lp: LinearProgram) -> LinearProgram:
    """The Lagrangian dual of a free-variable maximisation problem.

    For ``max c.x : Gx >= h, Ax = b`` this is
    ``min -h.y - b.z : G^T y + A^T z = -c, y >= 0`` with z free; the free part is
    encoded by splitting z.
    """
    if lp.sense != "max" or lp.nonnegative:
        raise ValueError("dual_program expects a free-variable maximisation problem")
    n = lp.num_vars
    G = [list(r) for r in (lp.ineq if lp.ineq is not None else [])]
    A = [list(r) for r in (lp.eq if lp.eq is not None else [])]
    h = list(lp.ineq_rhs) if G else []
    b = list(lp.eq_rhs) if A else []
    m1, m2 = len(G), len(A)
    # variables: y (m1), z+ (m2), z- (m2), all >= 0
    eq = []
    for k in range(n):
        eq.append([G[i][k] for i in range(m1)] + [A[i][k] for i in range(m2)]
                  + [-A[i][k] for i in range(m2)])
    eq_rhs = [-v for v in lp.objective]
    obj = [-v for v in h] + [-v for v in b] + list(b)
    return LinearProgram(objective=np.array(obj, dtype=object), eq=np.array(eq, dtype=object).reshape(n, -1),
                         eq_rhs=np.array(eq_rhs, dtype=object), sense="min", nonnegative=True)
