"""The adaptive CHSH game.

Bob holds halves of two bipartite sources, S_AB and S_B'C, and announces
two bits b that pick which CHSH variant Alice and Charlie must win. With
joint states written as matrices (rows: first subsystem, columns: second)
and Bob's effect on BB' written as a matrix E over B x B' coordinates, the
joint probability is

    P(a, b, c | rA, rC) = e_a^rA . M_AB . E_b . M_B'C . f_c^rC

and the unnormalised post-measurement state on AC is M_AB . E . M_B'C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .chsh import CH_TERMS, VARIANTS, best_variant
from .composition import RESTRICTED, CorrelationVector, JointModel, correlation_vector, is_separable, min_tensor
from .geometry import EXACT, ConeH, ConeV, dualize, enumerate_rays
from .geometry.numeric import exact_array, integer_row, to_fraction
from .systems import Measurement, SystemModel, binary, gbit_square

BOB_OUTCOMES = [(0, 0), (0, 1), (1, 0), (1, 1)]

# winning condition per Bob outcome as a CHSH variant (alpha, beta, gamma) in
#   a XOR c = rA*rC XOR alpha*rA XOR beta*rC XOR gamma
WIN_VARIANT = {(0, 0): (0, 1, 0), (0, 1): (1, 1, 0), (1, 0): (1, 1, 1), (1, 1): (0, 1, 1)}


def Q(a: int, b: tuple, c: int, ra: int, rc: int) -> int:
    alpha, beta, gamma = WIN_VARIANT[tuple(b)]
    return int(a ^ c == (ra & rc) ^ (alpha & ra) ^ (beta & rc) ^ gamma)


@dataclass(frozen=True, eq=False)
class Strategy:
    """Sources, Bob's four effects on BB' and the input-indexed local measurements.

    ``bob`` maps each outcome in BOB_OUTCOMES to a matrix over B x B'
    coordinates.
    """

    source_ab: np.ndarray
    source_bc: np.ndarray
    bob: dict
    alice: tuple
    charlie: tuple

    def check(self, unit_b, unit_bp, tol: float = 1e-9) -> None:
        total = sum(np.asarray(self.bob[b]) for b in BOB_OUTCOMES)
        target = np.outer(unit_b, unit_bp)
        diff = total - target
        if diff.dtype == object and all(isinstance(v, Fraction) for v in diff.ravel()):
            ok = all(v == 0 for v in diff.ravel())
        else:
            ok = float(np.max(np.abs(np.asarray(diff, float)))) <= tol
        if not ok:
            raise ValueError("Bob's effects do not sum to the joint unit effect")


def joint_distribution(strategy: Strategy) -> dict:
    """P(a, b, c | rA, rC) keyed by (a, b, c, rA, rC)."""
    out = {}
    for b in BOB_OUTCOMES:
        core = strategy.source_ab @ strategy.bob[b] @ strategy.source_bc
        for ra, rc, a, c in product(range(2), repeat=4):
            out[a, b, c, ra, rc] = strategy.alice[ra].effects[a] @ core @ strategy.charlie[rc].effects[c]
    return out


def p_win(strategy: Strategy):
    """Winning probability with uniformly random questions."""
    dist = joint_distribution(strategy)
    total = sum(p for (a, b, c, ra, rc), p in dist.items() if Q(a, b, c, ra, rc))
    return total / 4


def conditional_table(strategy: Strategy, b) -> CorrelationVector:
    """P(a, c | rA, rC, b) as a correlation vector over (a, c, rA, rC)."""
    core = strategy.source_ab @ strategy.bob[tuple(b)] @ strategy.source_bc
    out = np.empty((2, 2, 2, 2), dtype=core.dtype)
    for ra, rc in product(range(2), repeat=2):
        block = [[strategy.alice[ra].effects[a] @ core @ strategy.charlie[rc].effects[c] for c in range(2)]
                 for a in range(2)]
        s = sum(sum(r) for r in block)
        for a, c in product(range(2), repeat=2):
            out[a, c, ra, rc] = block[a][c] / s
    return CorrelationVector(out)


def outcome_probability(strategy: Strategy, b):
    """Probability of Bob's outcome b (independent of the questions)."""
    core = strategy.source_ab @ strategy.bob[tuple(b)] @ strategy.source_bc
    m = strategy.alice[0]
    n = strategy.charlie[0]
    return sum(m.effects[a] @ core @ n.effects[c] for a in range(2) for c in range(2))


# ---------------------------------------------------------------- bound mode

def post_measurement_state(m_ab, effect, m_bc, unit_a=None, unit_c=None):
    """Normalised AC state after Bob's effect, and the outcome weight.

    The units default to the last coordinate functional. Returns
    ``(None, 0)`` for a zero-probability outcome.
    """
    core = m_ab @ effect @ m_bc
    if unit_a is None and unit_c is None:
        w = core[-1, -1]
    else:
        w = unit_a @ core @ unit_c
    if w == 0 or (not isinstance(w, Fraction) and abs(float(w)) < 1e-14):
        return None, 0
    return core / w, w


def bound_mode_value(m_ab, effect, m_bc, system: SystemModel):
    """Best CHSH winning probability Alice and Charlie reach after one effect of Bob.

    This bounds p_win from above when Bob's measurement contains the effect;
    it is not necessarily achievable by a full measurement.
    """
    s, w = post_measurement_state(m_ab, effect, m_bc, system.unit, system.unit)
    if s is None:
        return None
    ms = system.measurements
    best = None
    for i in range(len(ms)):
        for j in range(len(ms)):
            if i == j and len(ms) > 1:
                continue
            for k in range(len(ms)):
                for l in range(len(ms)):
                    if k == l and len(ms) > 1:
                        continue
                    p = correlation_vector(s.reshape(-1), (ms[i], ms[j]), (ms[k], ms[l]),
                                           dims=(system.dim, system.dim))
                    v, _ = best_variant(p)
                    if best is None or v > best:
                        best = v
    return best


def tensor_product_bound(system: SystemModel, kind: str) -> object:
    """Largest bound-mode value over extremal sources and extremal effects of Bob.

    ``kind`` is "min" or "max". For the minimal tensor product the states
    are products and the effects are the full dual cone; for the maximal
    one it is the other way round.
    """
    from .composition import max_tensor

    if kind == "min":
        joint = min_tensor(system, system)
        effects = dualize(joint.generators_v).inequalities
    elif kind == "max":
        joint = max_tensor(system, system)
        effects = np.array([np.kron(e, f) for e in system.effects for f in system.effects], dtype=object)
    else:
        raise ValueError("kind must be 'min' or 'max'")
    d = system.dim
    verts = [np.asarray(v).reshape(d, d) for v in joint.vertices]
    best = None
    for e in effects:
        E = np.asarray(e).reshape(d, d)
        for ma in verts:
            for mc in verts:
                v = bound_mode_value(ma, E, mc, system)
                if v is not None and (best is None or v > best):
                    best = v
    return best


# ---------------------------------------------------------------- references

def _pauli():
    i2 = np.eye(2, dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return [i2, x, y, z]


def _ket(theta):
    return np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=complex)


BELL = {
    (0, 0): np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
    (0, 1): np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2),
    (1, 0): np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    (1, 1): np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
}

ALICE_ANGLES = (0.0, math.pi / 2)
CHARLIE_ANGLES = (math.pi / 4, 3 * math.pi / 4)


def pauli_state(rho) -> np.ndarray:
    """T[i, j] = Tr(rho sigma_i x sigma_j)."""
    p = _pauli()
    return np.array([[np.trace(rho @ np.kron(a, b)).real for b in p] for a in p])


def pauli_effect(op) -> np.ndarray:
    """Single-qubit effect coefficients Tr(E sigma_i) / 2."""
    return np.array([np.trace(op @ s).real / 2 for s in _pauli()])


def pauli_joint_effect(op) -> np.ndarray:
    """Two-qubit effect coefficients Tr(E sigma_j x sigma_k) / 4."""
    p = _pauli()
    return np.array([[np.trace(op @ np.kron(a, b)).real / 4 for b in p] for a in p])


def _basis_measurement(theta) -> Measurement:
    k0, k1 = _ket(theta), _ket(theta + math.pi)
    return Measurement((pauli_effect(np.outer(k0, k0.conj())), pauli_effect(np.outer(k1, k1.conj()))))


def quantum_reference() -> Strategy:
    """Bell-state sources, Bell-basis measurement for Bob, fixed qubit bases."""
    phi = BELL[0, 0]
    state = pauli_state(np.outer(phi, phi.conj()))
    bob = {b: pauli_joint_effect(np.outer(BELL[b], BELL[b].conj())) for b in BOB_OUTCOMES}
    alice = tuple(_basis_measurement(t) for t in ALICE_ANGLES)
    charlie = tuple(_basis_measurement(t) for t in CHARLIE_ANGLES)
    return Strategy(state, state, bob, alice, charlie)


def quantum_table_entries(amplitude: float) -> np.ndarray:
    """The b = (0, 0) conditional table for amplitude a, as [a, c, rA, rC]."""
    out = np.empty((2, 2, 2, 2))
    for a, c, ra, rc in product(range(2), repeat=4):
        win = Q(a, (0, 0), c, ra, rc)
        out[a, c, ra, rc] = (1 + amplitude) / 4 if win else (1 - amplitude) / 4
    return out


class NoDistinguishablePairError(ValueError):
    pass


def distinguishable_pair(system: SystemModel, tol: float = 1e-9):
    """Indices (s, t, k): effect k gives 1 on state s and 0 on state t."""
    exact = system.mode == EXACT
    for k, e in enumerate(system.effects):
        vals = [e @ s for s in system.states]
        ones = [i for i, v in enumerate(vals) if (v == 1 if exact else abs(float(v) - 1) <= tol)]
        zeros = [i for i, v in enumerate(vals) if (v == 0 if exact else abs(float(v)) <= tol)]
        if ones and zeros:
            return ones[0], zeros[0], k
    raise NoDistinguishablePairError(f"{system.label} has no perfectly distinguishable pair of states")


def classical_reference(system: SystemModel) -> Strategy:
    """Shared-randomness strategy reaching 3/4 in any theory with two distinguishable states."""
    i, j, k = distinguishable_pair(system)
    s, t = system.states[i], system.states[j]
    e = system.effects[k]
    u = system.unit
    ebar = u - e
    half = Fraction(1, 2) if system.mode == EXACT else 0.5
    source = half * (np.outer(s, s) + np.outer(t, t))
    same = half * (np.outer(e, e) + np.outer(ebar, ebar))
    diff = half * (np.outer(e, ebar) + np.outer(ebar, e))
    bob = {(0, 0): same, (1, 0): same, (0, 1): diff, (1, 1): diff}
    m = binary(e, u)
    return Strategy(source, source, bob, (m, m), (m, m))


def uniform_responders(system: SystemModel) -> Strategy:
    """Alice and Charlie answer with fair coins whatever they hold."""
    u = system.unit
    half = Fraction(1, 2) if system.mode == EXACT else 0.5
    coin = Measurement((half * u, half * u))
    s = system.states[0]
    src = np.outer(s, s)
    quarter = half * half
    bob = {b: quarter * np.outer(u, u) for b in BOB_OUTCOMES}
    return Strategy(src, src, bob, (coin, coin), (coin, coin))


# ---------------------------------------------------------------- CH-restricted gbit models

def _gbit_effect(x, a):
    g = gbit_square()
    return g.effects[x] if a == 0 else g.unit - g.effects[x]


def variant_vector(alpha, beta, gamma) -> np.ndarray:
    """Winning probability of a variant as a functional on 9 gbit-pair coordinates."""
    c = exact_array(np.zeros(9, dtype=int))
    for a, b, x, y in product(range(2), repeat=4):
        if a ^ b == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma:
            c = c + Fraction(1, 4) * np.kron(_gbit_effect(x, a), _gbit_effect(y, b))
    return c


def ch_vector(i: int) -> np.ndarray:
    c = exact_array(np.zeros(9, dtype=int))
    for coef, a, b, x, y in CH_TERMS[i]:
        c = c + coef * np.kron(_gbit_effect(x, a), _gbit_effect(y, b))
    return c


def deterministic_states() -> list:
    g = gbit_square()
    return [np.kron(s, t) for s in g.states for t in g.states]


def isotropic_states(eps) -> list:
    """The eight depolarised boxes: 1/2 - eps on winning entries, eps elsewhere."""
    eps = to_fraction(eps)
    out = []
    for alpha, beta, gamma in VARIANTS:
        m = exact_array(np.zeros((3, 3), dtype=int))
        for x, y in product(range(2), repeat=2):
            wins = 0 == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma
            m[x, y] = Fraction(1, 2) - eps if wins else eps
        m[0, 2] = m[1, 2] = m[2, 0] = m[2, 1] = Fraction(1, 2)
        m[2, 2] = Fraction(1)
        out.append(m.reshape(-1))
    return out


def _check_epsilon(eps) -> Fraction:
    eps = to_fraction(eps)
    if not 0 <= eps <= Fraction(1, 8):
        raise ValueError(f"epsilon must lie in [0, 1/8], got {eps}")
    return eps


@dataclass(frozen=True, eq=False)
class EpsilonModel:
    epsilon: Fraction
    c_eps: ConeV
    d_eps: ConeV
    c_constraints: ConeH
    isotropic: list
    deterministic: list
    vertices: list = field(repr=False)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def ray_count(self) -> int:
        return len(self.d_eps)

    def joint(self) -> JointModel:
        g = gbit_square()
        return JointModel(g, g, RESTRICTED, constraints_h=self.c_constraints, generators_v=self.c_eps)


def epsilon_constraints(eps) -> ConeH:
    """Product positivity plus every CHSH variant at most 1 - 2 eps."""
    eps = _check_epsilon(eps)
    g = gbit_square()
    uu = np.kron(g.unit, g.unit)
    rows = [np.kron(e, f) for e in g.effects for f in g.effects]
    rows += [(1 - 2 * eps) * uu - variant_vector(*v) for v in VARIANTS]
    return ConeH(rows, 9)


def build_epsilon_model(eps) -> EpsilonModel:
    eps = _check_epsilon(eps)
    h = epsilon_constraints(eps)
    c = enumerate_rays(h)
    iso = isotropic_states(eps)
    det = deterministic_states()
    d_h = dualize(ConeV(det + iso, 9))
    d = ConeV(d_h.inequalities, 9, lineality=d_h.equalities)
    verts = []
    for gvec in c.generators:
        verts.append(gvec / gvec[8])
    return EpsilonModel(eps, c, d, h, iso, det, verts)


# ---------------------------------------------------------------- post-measurement sweep

@dataclass(frozen=True, eq=False)
class SweepReport:
    epsilon: Fraction
    ch_min: Fraction
    ch_max: Fraction
    witness_min: tuple  # (state index AB, state index B'C, effect index)
    witness_max: tuple
    state_min: np.ndarray
    state_max: np.ndarray
    triples: int
    pruned: bool

    @property
    def p_win_upper(self) -> Fraction:
        return Fraction(3, 4) - self.ch_min / 2

    @property
    def p_win_lower(self) -> Fraction:
        return Fraction(3, 4) - self.ch_max / 2


_INT_LIMIT = 2 ** 62


def _is_product_effect(e, tol=0) -> bool:
    """Whether a 3x3 effect lies in the cone of products of local effect rays."""
    from .geometry import membership

    g = gbit_square()
    prods = ConeV([np.kron(a, b) for a in g.effects for b in g.effects], 9)
    return membership(exact_array(e), prods)


def _extreme(nums, dens, which):
    """Exact extremum of nums/dens over entries with dens > 0; returns (value, flat index)."""
    ok = dens > 0
    ratio = np.where(ok, nums / np.where(ok, dens, 1), np.nan)
    target = np.nanmax(ratio) if which == "max" else np.nanmin(ratio)
    cand = np.argwhere(ok & (np.abs(ratio - target) <= 1e-9 * max(1.0, abs(target))))
    best = None
    for idx in cand:
        idx = tuple(idx)
        v = Fraction(int(nums[idx]), int(dens[idx]))
        if best is None or (v > best[0] if which == "max" else v < best[0]):
            best = (v, idx)
    return best


def post_measurement_sweep(model: EpsilonModel, prune: bool = False) -> SweepReport:
    """Exact CH range of the AC states reachable from extremal triples.

    Every pair of extremal C_eps states is combined with every extremal ray
    of D_eps; zero-probability branches are skipped. With ``prune`` the
    separable states and the effects in the product cone are left out and
    the classical range [0, 1] they can reach is merged in afterwards.
    """
    ms = [integer_row(v) for v in model.c_eps.generators]
    es = [integer_row(v) for v in model.d_eps.generators]
    state_idx = list(range(len(ms)))
    effect_idx = list(range(len(es)))
    if prune:
        g = gbit_square()
        sep = min_tensor(g, g)
        state_idx = [i for i in state_idx if not is_separable(exact_array(ms[i]) / ms[i][8], sep)]
        effect_idx = [k for k in effect_idx if not _is_product_effect(es[k])]
    M = np.array([ms[i] for i in state_idx], dtype=np.int64).reshape(-1, 3, 3)
    E = np.array([es[k] for k in effect_idx], dtype=np.int64).reshape(-1, 3, 3)
    W = np.array([[int(v) for v in ch_vector(i)] for i in (1, 2, 3, 4)], dtype=np.int64)
    bound = (np.abs(M).max(initial=0) ** 2) * np.abs(E).max(initial=0) * 27 * max(1, np.abs(W).sum(axis=1).max())
    if bound >= _INT_LIMIT:
        raise OverflowError("integer coordinates too large for the vectorised exact sweep")
    lo = hi = None
    for k in range(len(E)):
        A = np.einsum("aij,jk->aik", M, E[k])
        X = np.einsum("aij,bjk->abik", A, M).reshape(len(M), len(M), 9)
        den = X[..., 8]
        if (den < 0).any():
            raise ArithmeticError("negative outcome weight; effect is not valid on the state pair")
        if not (den > 0).any():
            continue
        num = X @ W.T
        dd = np.broadcast_to(den[..., None], num.shape)
        top = _extreme(num, dd, "max")
        bot = _extreme(num, dd, "min")
        if hi is None or top[0] > hi[0]:
            hi = (top[0], (state_idx[top[1][0]], state_idx[top[1][1]], effect_idx[k]))
        if lo is None or bot[0] < lo[0]:
            lo = (bot[0], (state_idx[bot[1][0]], state_idx[bot[1][1]], effect_idx[k]))
    if prune:
        if hi is None or hi[0] < 1:
            hi = (Fraction(1), None)
        if lo is None or lo[0] > 0:
            lo = (Fraction(0), None)

    def witness(w):
        if w is None:
            return None
        i, j, k = w
        mi = exact_array(ms[i]).reshape(3, 3)
        mj = exact_array(ms[j]).reshape(3, 3)
        ek = exact_array(es[k]).reshape(3, 3)
        s, _ = post_measurement_state(mi, ek, mj)
        return s

    return SweepReport(model.epsilon, lo[0], hi[0], lo[1], hi[1], witness(lo[1]), witness(hi[1]),
                       len(M) * len(M) * len(E), prune)


# ---------------------------------------------------------------- structural checks

def _random_weights(rng, k):
    w = [Fraction(int(v)) for v in rng.integers(1, 10, size=k)]
    total = sum(w)
    return [v / total for v in w]


def _entangled_vertices(model: EpsilonModel) -> list:
    g = gbit_square()
    sep = min_tensor(g, g)
    return [v for v in model.vertices if not is_separable(v, sep)]


def separable_effect_check(model: EpsilonModel, samples: int = 100, seed: int = 0) -> tuple:
    """Apply random separable effects of Bob to entangled state pairs.

    Returns ``(checked, failures)``, counting conditioned AC states that are
    not separable. Zero-probability outcomes are redrawn.
    """
    g = gbit_square()
    sep = min_tensor(g, g)
    ent = _entangled_vertices(model)
    if not ent:
        raise ValueError(f"no entangled extremal states at epsilon={model.epsilon}")
    prods = [np.kron(e, f).reshape(3, 3) for e in g.effects for f in g.effects]
    rng = np.random.default_rng(seed)
    checked = failures = 0
    while checked < samples:
        ks = rng.choice(len(prods), size=3, replace=False)
        w = _random_weights(rng, 3)
        E = sum(wi * prods[k] for wi, k in zip(w, ks))
        i, j = rng.integers(len(ent), size=2)
        s, p = post_measurement_state(ent[i].reshape(3, 3), E, ent[j].reshape(3, 3))
        if s is None:
            continue
        checked += 1
        failures += not is_separable(s.reshape(-1), sep)
    return checked, failures


def mixed_triple_check(model: EpsilonModel, samples: int = 100, seed: int = 0, support: int = 2) -> tuple:
    """Conditioned states of mixed triples against the hull of their extremal triples.

    Each sample mixes ``support`` extremal states for each source and
    ``support`` extremal rays for Bob's effect. The conditioned AC state must
    lie in the convex hull of the conditioned states of the extremal triples
    it is built from. Returns ``(checked, failures)``.
    """
    from .geometry import membership

    rng = np.random.default_rng(seed)
    verts = [v.reshape(3, 3) for v in model.vertices]
    rays = [exact_array(r).reshape(3, 3) for r in model.d_eps.generators]
    checked = failures = 0
    while checked < samples:
        ia = rng.choice(len(verts), size=support, replace=False)
        ic = rng.choice(len(verts), size=support, replace=False)
        ie = rng.choice(len(rays), size=support, replace=False)
        la, lc, le = (_random_weights(rng, support) for _ in range(3))
        m_ab = sum(w * verts[i] for w, i in zip(la, ia))
        m_bc = sum(w * verts[i] for w, i in zip(lc, ic))
        E = sum(w * rays[k] for w, k in zip(le, ie))
        s, p = post_measurement_state(m_ab, E, m_bc)
        if s is None:
            continue
        hull = []
        for i, j, k in product(ia, ic, ie):
            t, q = post_measurement_state(verts[i], rays[k], verts[j])
            if t is not None:
                hull.append(t.reshape(-1))
        checked += 1
        failures += not membership(s.reshape(-1), ConeV(hull, 9))
    return checked, failures


# ---------------------------------------------------------------- closed forms

def ch_bounds(eps) -> tuple:
    eps = _check_epsilon(eps)
    d = 96 * eps ** 2 - 12 * eps + 1
    return 2 * eps * (8 * eps - 1) / d, (80 * eps ** 2 - 10 * eps + 1) / d


def gbit_bound(eps) -> Fraction:
    """Upper bound on p_win for CH-restricted square gbits."""
    eps = _check_epsilon(eps)
    return Fraction(3, 4) + eps * (1 - 8 * eps) / (96 * eps ** 2 - 12 * eps + 1)


def gbit_lower_bound(eps) -> Fraction:
    """3/4 - (1/2) CH_max, the lower companion implied by the CH range."""
    return Fraction(3, 4) - ch_bounds(eps)[1] / 2


def gbit_lower_bound_unhalved(eps) -> Fraction:
    """The lower companion without the factor 1/2 on the CH term."""
    return Fraction(3, 4) - ch_bounds(eps)[1]


def isotropic_wiring_bound(eps):
    """CHSH ceiling 1/2 + (e' + 1)/4 with e' = 1 - 4(1 - eps)/(2 - eps), for eps in [2/3, 1]."""
    if isinstance(eps, (int, Fraction, str)):
        eps = to_fraction(eps)
    if eps < Fraction(2, 3) or eps > 1:
        raise ValueError("the wiring bound is only stated for eps in [2/3, 1]")
    e2 = 1 - 4 * (1 - eps) / (2 - eps)
    return Fraction(1, 2) + (e2 + 1) / 4 if isinstance(eps, Fraction) else 0.5 + (e2 + 1) / 4


def gbit_report(eps, prune: bool = False) -> dict:
    """JSON-ready summary of the sweep against the closed forms."""
    from .geometry import format_scalar

    eps = _check_epsilon(eps)
    model = build_epsilon_model(eps)
    rep = post_measurement_sweep(model, prune=prune)
    lo, hi = ch_bounds(eps)
    ok = rep.ch_min == lo and rep.ch_max == hi and rep.p_win_upper == gbit_bound(eps)
    return {
        "epsilon": format_scalar(eps),
        "vertex_count": model.vertex_count,
        "ray_count": model.ray_count,
        "ch_min": format_scalar(rep.ch_min),
        "ch_max": format_scalar(rep.ch_max),
        "p_win_upper": format_scalar(rep.p_win_upper),
        "p_win_lower": format_scalar(rep.p_win_lower),
        "matches_closed_form": ok,
        "pruned": prune,
        "witness_min": list(rep.witness_min) if rep.witness_min else None,
        "witness_max": list(rep.witness_max) if rep.witness_max else None,
    }
