"""CHSH and CH functionals and the measurement sweep over a composite.

Winning probabilities are reported in [0, 1]. The eight CHSH variants are
the games a XOR b = xy XOR alpha*x XOR beta*y XOR gamma; the variants with
gamma = 0 are the upper orientations of the four functionals J^i and those
with gamma = 1 their lower orientations (value 1 - J^i).
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np
from scipy.optimize import linprog

from .composition import CorrelationVector, JointModel, min_tensor, random_separable
from .geometry import APPROX, EXACT, InfeasibleError, LinearProgram, LPError, solve_lp
from .systems import SystemModel

TSIRELSON = 0.5 + 1 / (2 * math.sqrt(2))

VARIANTS = [(a, b, g) for g in (0, 1) for a in (0, 1) for b in (0, 1)]

# (alpha, beta) of the CHSH variant paired with each CH functional
INDEX_VARIANT = {1: (1, 0), 2: (0, 1), 3: (0, 0), 4: (1, 1)}

# CH^i as (coefficient, a, b, x, y) terms
CH_TERMS = {
    1: [(1, 1, 0, 0, 1), (1, 1, 1, 1, 0), (1, 0, 1, 1, 1), (-1, 1, 1, 0, 0)],
    2: [(1, 1, 1, 0, 1), (1, 0, 1, 1, 0), (1, 1, 0, 1, 1), (-1, 1, 1, 0, 0)],
    3: [(1, 1, 0, 0, 1), (1, 0, 1, 1, 0), (1, 1, 1, 1, 1), (-1, 1, 1, 0, 0)],
    4: [(1, 1, 1, 0, 1), (1, 1, 1, 1, 0), (1, 0, 0, 1, 1), (-1, 1, 1, 0, 0)],
}


class ConjecturalWarning(UserWarning):
    """Formula evaluated outside the range where it was checked numerically."""


def variant_coefficients(alpha: int, beta: int, gamma: int) -> np.ndarray:
    """Winning-probability coefficients C[a, b, x, y] with uniform inputs."""
    c = np.zeros((2, 2, 2, 2), dtype=object)
    c[...] = Fraction(0)
    for a, b, x, y in product(range(2), repeat=4):
        if a ^ b == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma:
            c[a, b, x, y] = Fraction(1, 4)
    return c


@dataclass(frozen=True)
class BellFunctional:
    index: int
    form: str  # "CHSH" or "CH"
    coefficients: np.ndarray

    def __call__(self, p: CorrelationVector):
        return sum(self.coefficients[k] * p.entries[k] for k in np.ndindex(2, 2, 2, 2))


def chsh_functional(i: int) -> BellFunctional:
    alpha, beta = INDEX_VARIANT[i]
    return BellFunctional(i, "CHSH", variant_coefficients(alpha, beta, 0))


def ch_functional(i: int) -> BellFunctional:
    c = np.zeros((2, 2, 2, 2), dtype=object)
    c[...] = Fraction(0)
    for coef, a, b, x, y in CH_TERMS[i]:
        c[a, b, x, y] += coef
    return BellFunctional(i, "CH", c)


def win_probability(p: CorrelationVector, variant) -> object:
    c = variant_coefficients(*variant)
    return sum(c[k] * p.entries[k] for k in np.ndindex(2, 2, 2, 2))


def best_variant(p: CorrelationVector):
    """Largest winning probability over the eight variants, and the variant."""
    vals = [(win_probability(p, v), k) for k, v in enumerate(VARIANTS)]
    best = max(vals, key=lambda t: (t[0], -t[1]))
    return best[0], VARIANTS[best[1]]


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True, eq=False)
class SweepResult:
    optimum: object
    best_state: np.ndarray
    best_measurements: tuple  # effect indices (alice x=0, alice x=1, bob y=0, bob y=1)
    functional_index: int
    orientation: str  # "upper" (J^i) or "lower" (1 - J^i)
    problems_solved: int
    wall_time: float


def _objective(variant, ea, eb):
    """Coefficient vector on joint states for a variant and effect tuples.

    ``ea[x][a]`` and ``eb[y][b]`` are local effects.
    """
    c = variant_coefficients(*variant)
    out = None
    for a, b, x, y in product(range(2), repeat=4):
        if c[a, b, x, y] == 0:
            continue
        term = c[a, b, x, y] * np.kron(ea[x][a], eb[y][b])
        out = term if out is None else out + term
    return out


def _measurement_pairs(system: SystemModel):
    ms = system.measurements
    return [(i, j) for i, j in combinations(range(len(ms)), 2)]


def _solve_instance(rows, unit, obj, mode):
    if mode == EXACT:
        lp = LinearProgram(objective=obj, ineq=rows, ineq_rhs=np.zeros(len(rows), dtype=object),
                           eq=unit[None, :], eq_rhs=np.array([Fraction(1)], dtype=object))
        res = solve_lp(lp, mode=EXACT)
        return res.value, res.x
    res = linprog(-np.asarray(obj, float), A_ub=-np.asarray(rows, float), b_ub=np.zeros(len(rows)),
                  A_eq=np.asarray(unit, float)[None, :], b_eq=[1.0], bounds=[(None, None)] * len(unit),
                  method="highs")
    if res.status == 2:
        raise InfeasibleError("composite has no normalised state")
    if res.status != 0:
        raise LPError(f"LP solver failed: {res.message}")
    return -res.fun, res.x


_WORKER = {}


def _init_worker(ctx):
    _WORKER.clear()
    _WORKER.update(ctx)


def _run_block(tasks):
    ctx = _WORKER
    out = []
    for idx, (pa, pb) in tasks:
        ea = [ctx["ma"][pa[0]], ctx["ma"][pa[1]]]
        eb = [ctx["mb"][pb[0]], ctx["mb"][pb[1]]]
        best = None
        for k, v in enumerate(VARIANTS):
            obj = _objective(v, ea, eb)
            if ctx["mode"] == APPROX:
                obj = np.asarray(obj, float)
            try:
                val, x = _solve_instance(ctx["rows"], ctx["unit"], obj, ctx["mode"])
            except InfeasibleError as exc:
                raise InfeasibleError(f"instance alice={pa} bob={pb} variant={v}: {exc}") from exc
            if best is None or val > best[0]:
                best = (val, x, k)
        out.append((idx, pa, pb, best))
    return out


def _default_jobs() -> int:
    env = os.environ.get("GPT_SELFTEST_JOBS")
    return int(env) if env else 1


def optimize_chsh(joint: JointModel, reduce_symmetry: bool = True, jobs: int | None = None,
                  pair_filter=None) -> SweepResult:
    """Largest CHSH winning probability over the composite.

    One LP per choice of two distinct binary measurements on each side and
    per variant. When the local systems are rotation symmetric, Alice's
    first measurement is fixed to measurement 0. ``pair_filter(pa, pb)``
    restricts the sweep to a sub-family of measurement choices.
    """
    t0 = time.perf_counter()
    mode = joint.mode
    h = joint.state_constraints
    rows = np.asarray(h.inequalities, dtype=object if mode == EXACT else float)
    unit = joint.joint_unit
    if mode == APPROX:
        unit = np.asarray(unit, float)
    ma = [m.effects for m in joint.left.measurements]
    mb = [m.effects for m in joint.right.measurements]
    pairs_a = _measurement_pairs(joint.left)
    pairs_b = _measurement_pairs(joint.right)
    if not pairs_a or not pairs_b:
        raise ValueError("each side needs at least two distinct measurements")
    if reduce_symmetry and joint.left.symmetric:
        pairs_a = [p for p in pairs_a if p[0] == 0]
    choices = [(pa, pb) for pa in pairs_a for pb in pairs_b if pair_filter is None or pair_filter(pa, pb)]
    if not choices:
        raise ValueError("pair_filter leaves no measurement choices")
    tasks = list(enumerate(choices))
    ctx = {"rows": rows, "unit": unit, "ma": ma, "mb": mb, "mode": mode}
    jobs = _default_jobs() if jobs is None else jobs
    if jobs > 1 and len(tasks) > 1:
        size = max(1, len(tasks) // (4 * jobs))
        blocks = [tasks[i:i + size] for i in range(0, len(tasks), size)]
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(ctx,)) as ex:
            results = [r for block in ex.map(_run_block, blocks) for r in block]
    else:
        _init_worker(ctx)
        results = _run_block(tasks)
    results.sort(key=lambda r: r[0])
    best = None
    for idx, pa, pb, (val, x, k) in results:
        if best is None or val > best[3][0]:
            best = (idx, pa, pb, (val, x, k))
    _, pa, pb, (val, x, k) = best
    alpha, beta, gamma = VARIANTS[k]
    index = next(i for i, ab in INDEX_VARIANT.items() if ab == (alpha, beta))
    return SweepResult(optimum=val, best_state=np.asarray(x), best_measurements=(pa[0], pa[1], pb[0], pb[1]),
                       functional_index=index, orientation="upper" if gamma == 0 else "lower",
                       problems_solved=len(tasks) * len(VARIANTS), wall_time=time.perf_counter() - t0)


def replay(joint: JointModel, result: SweepResult):
    """Re-solve the recorded instance; returns its optimal value."""
    mode = joint.mode
    ma = [m.effects for m in joint.left.measurements]
    mb = [m.effects for m in joint.right.measurements]
    i0, i1, j0, j1 = result.best_measurements
    alpha, beta = INDEX_VARIANT[result.functional_index]
    gamma = 0 if result.orientation == "upper" else 1
    obj = _objective((alpha, beta, gamma), [ma[i0], ma[i1]], [mb[j0], mb[j1]])
    rows = np.asarray(joint.state_constraints.inequalities, dtype=object if mode == EXACT else float)
    unit = joint.joint_unit
    if mode == APPROX:
        obj, unit = np.asarray(obj, float), np.asarray(unit, float)
    return _solve_instance(rows, unit, obj, mode)[0]


def vertex_optimum(joint: JointModel):
    """Same optimum by evaluating every variant on every extremal state.

    Independent of any LP; only practical while the composite has few
    vertices.
    """
    dtype = object if joint.mode == EXACT else float
    ea = np.array([[np.asarray(e) for e in m.effects] for m in joint.left.measurements], dtype=dtype)
    eb = np.array([[np.asarray(e) for e in m.effects] for m in joint.right.measurements], dtype=dtype)
    verts = np.array([np.asarray(v).reshape(joint.left.dim, joint.right.dim) for v in joint.vertices], dtype=dtype)
    # table[v, i, a, j, b] = probability of outcomes (a, b) for measurements (i, j) on vertex v
    table = np.einsum("iap,vpq,jbq->viajb", ea, verts, eb)
    best = None
    for pa in _measurement_pairs(joint.left):
        for pb in _measurement_pairs(joint.right):
            for v in VARIANTS:
                c = variant_coefficients(*v)
                val = sum(c[a, b, x, y] * table[:, pa[x], a, pb[y], b]
                          for a, b, x, y in product(range(2), repeat=4) if c[a, b, x, y] != 0)
                top = max(val)
                if best is None or top > best:
                    best = top
    return best


# ---------------------------------------------------------------- closed forms

def odd_polygon_formula(n: int) -> float:
    """Optimal CHSH winning probability for an odd polygon, by n mod 8."""
    if n % 2 != 1:
        raise ValueError("odd_polygon_formula needs odd n")
    if n < 3:
        raise ValueError("n must be at least 3")
    if not 5 <= n <= 29:
        warnings.warn(f"n={n} is outside the checked range 5..29; value is conjectural", ConjecturalWarning)
    s = 1 / math.cos(math.pi / n)

    def p(m):
        return (m + n) / (4 * n) * math.pi

    k = n % 8
    if k == 5:
        inner = 4 * math.cos(p(3)) + 2 * math.sin(p(1)) + 2 * math.sin(p(5))
    elif k == 7:
        inner = 2 * math.sin(p(3)) + 6 * math.cos(p(1))
    elif k == 1:
        inner = 2 * math.cos(p(3)) + 6 * math.sin(p(1))
    else:
        inner = 2 * math.cos(p(1)) + 2 * math.cos(p(5)) + 4 * math.sin(p(3))
    return 0.5 + (1 + s * (inner + s - 2)) / (4 * (1 + s) ** 2)


def selfdual_polygon_formula(n: int) -> float:
    """Optimal CHSH winning probability for a self-dualised even polygon."""
    if n % 2 != 0:
        raise ValueError("selfdual_polygon_formula needs even n")
    if n < 4:
        raise ValueError("n must be at least 4")
    if n > 30:
        warnings.warn(f"n={n} is outside the checked range 4..30; value is conjectural", ConjecturalWarning)
    pi = math.pi
    k = n % 8
    if k == 4:
        return 0.5 + math.sqrt(2) / 4 * math.cos(pi / n)
    if k == 6:
        return 0.5 + (2 * math.cos((2 + n) / (4 * n) * pi) - math.cos((3 * n - 2) / (4 * n) * pi)
                      + math.sin((6 + n) / (4 * n) * pi)) / 8
    if k == 0:
        return 0.5 + math.sqrt(2) / 4
    return 0.5 + 3 / 8 * math.sin((2 + n) / (4 * n) * pi) - math.cos((3 * n - 6) / (4 * n) * pi) / 8


# ---------------------------------------------------------------- classical ceiling

@dataclass(frozen=True)
class ClassicalReport:
    system: str
    samples: int
    seed: int
    max_win: object
    violations: int
    decomposition_ok: bool


def lhv_decomposition(weights, joint: JointModel, na, nb) -> CorrelationVector:
    """Correlations of a separable state rebuilt as a local hidden variable model.

    ``weights`` index products of extremal local states in the order used
    by :func:`min_tensor`.
    """
    sa, sb = joint.left.states, joint.right.states
    total = np.zeros((2, 2, 2, 2), dtype=object)
    total[...] = 0
    k = 0
    for s in sa:
        for t in sb:
            w = weights[k]
            k += 1
            if w == 0:
                continue
            for a, b, x, y in product(range(2), repeat=4):
                total[a, b, x, y] += w * (na[x].effects[a] @ s) * (nb[y].effects[b] @ t)
    return CorrelationVector(total)


def _pair_tables(tab, pairs_a, pairs_b):
    """tab[i, a, j, b] regrouped as out[pa, pb, a, b, x, y] over measurement pairs."""
    ia = np.array(pairs_a)
    ib = np.array(pairs_b)
    # out[p, q, x, a, y, b] = tab[ia[p, x], a, ib[q, y], b]
    out = tab[ia[:, None, :, None, None, None], np.arange(2)[None, None, None, :, None, None],
              ib[None, :, None, None, :, None], np.arange(2)[None, None, None, None, None, :]]
    return out.transpose(0, 1, 3, 5, 2, 4)


def classical_bound_check(samples: int = 1000, seed: int = 0, system: SystemModel | None = None) -> ClassicalReport:
    """Sample separable states and confirm no CHSH variant beats 3/4.

    Every pair of distinct measurements on each side and every variant is
    tried. Exact systems use exact rational mixtures; the local hidden
    variable rebuild must then reproduce the correlations with no error.
    """
    from .systems import gbit_square

    system = gbit_square() if system is None else system
    joint = min_tensor(system, system)
    rng = np.random.default_rng(seed)
    exact = system.mode == EXACT
    dtype = object if exact else float
    d = system.dim
    eff = np.array([[np.asarray(e) for e in m.effects] for m in system.measurements], dtype=dtype)
    local = np.array([np.asarray(v) for v in system.states], dtype=dtype)
    on_states = np.einsum("map,sp->mas", eff, local)  # response of each effect on each extremal state
    pairs = _measurement_pairs(system)
    coeffs = np.array([variant_coefficients(*v) for v in VARIANTS], dtype=object)
    if not exact:
        coeffs = coeffs.astype(float)
    bound = Fraction(3, 4) if exact else 0.75 + 1e-9
    k = len(system.states)
    worst, violations, ok = None, 0, True
    for _ in range(samples):
        state, w = random_separable(joint, rng, exact=exact)
        m = np.asarray(state, dtype=dtype).reshape(d, d)
        direct = np.einsum("map,pq,nbq->manb", eff, m, eff)
        rebuilt = np.einsum("mas,st,nbt->manb", on_states, np.asarray(w, dtype=dtype).reshape(k, k), on_states)
        diff = (direct - rebuilt).ravel()
        if exact:
            ok &= all(v == 0 for v in diff)
        else:
            ok &= float(np.max(np.abs(diff.astype(float)))) <= 1e-12
        grouped = _pair_tables(direct, pairs, pairs)
        values = np.einsum("pqabxy,vabxy->pqv", grouped, coeffs)
        top = values.max()
        violations += int(np.sum(values > bound))
        if worst is None or top > worst:
            worst = top
    return ClassicalReport(system.label, samples, seed, worst, violations, ok)
