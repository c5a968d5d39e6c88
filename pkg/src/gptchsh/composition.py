"""Bipartite composites of two local systems.

A joint state over systems of dimensions dA and dB is stored as a flat
vector of length dA*dB in Kronecker order, so that ``kron(e, f) @ S`` is the
probability of the product effect and ``S.reshape(dA, dB)`` is the matrix
with ``e @ M @ f`` giving the same number.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import (
    APPROX,
    DEFAULT_TOL,
    EXACT,
    ConeH,
    ConeV,
    InfeasibleError,
    LinearProgram,
    dualize,
    enumerate_rays,
    membership,
    solve_lp,
)
from .systems import Measurement, SystemModel

MIN_TP = "min_tp"
MAX_TP = "max_tp"
GEN_MAX_TP = "generalized_max_tp"
RESTRICTED = "restricted"


class RestrictedEffectsError(ValueError):
    """max_tensor called on a system whose effects are not the full dual cone."""


def _kron_rows(first, second, mode):
    rows = [np.kron(np.asarray(a, dtype=object if mode == EXACT else float),
                    np.asarray(b, dtype=object if mode == EXACT else float))
            for a in first for b in second]
    return np.array(rows, dtype=object if mode == EXACT else float)


@dataclass(frozen=True, eq=False)
class JointModel:
    """A composite state space in H-form, V-form, or both.

    Whichever form is missing is computed on first access under a lock, so
    concurrent readers see one enumeration result.
    """

    left: SystemModel
    right: SystemModel
    kind: str
    constraints_h: ConeH | None = None
    generators_v: ConeV | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.constraints_h is None and self.generators_v is None:
            raise ValueError("a joint model needs constraints or generators")

    @property
    def mode(self) -> str:
        return EXACT if self.left.mode == EXACT and self.right.mode == EXACT else APPROX

    @property
    def dim(self) -> int:
        return self.left.dim * self.right.dim

    @property
    def joint_unit(self) -> np.ndarray:
        return np.kron(self.left.unit, self.right.unit)

    @property
    def state_constraints(self) -> ConeH:
        with self._lock:
            if self.constraints_h is None:
                object.__setattr__(self, "constraints_h", dualize(self.generators_v))
            return self.constraints_h

    @property
    def state_generators(self) -> ConeV:
        with self._lock:
            if self.generators_v is None:
                object.__setattr__(self, "generators_v", enumerate_rays(self.constraints_h))
            return self.generators_v

    @property
    def vertices(self) -> list:
        """Extremal normalised joint states."""
        u = self.joint_unit
        out = []
        for g in self.state_generators.generators:
            s = g @ u
            if s == 0 or (self.mode == APPROX and abs(s) < DEFAULT_TOL):
                raise ValueError("generator with zero normalisation")
            out.append(g / s)
        return out

    def product(self, sa, sb) -> np.ndarray:
        return np.kron(sa, sb)


def min_tensor(left: SystemModel, right: SystemModel) -> JointModel:
    """Convex hull of products of extremal local states."""
    mode = EXACT if left.mode == EXACT and right.mode == EXACT else APPROX
    gens = _kron_rows(left.states, right.states, mode)
    return JointModel(left, right, MIN_TP, generators_v=ConeV(gens, left.dim * right.dim, mode=mode))


def _tensor_constraints(rows, dim, mode):
    return ConeH(rows, dim, mode=mode)


def max_tensor(left: SystemModel, right: SystemModel) -> JointModel:
    """All joint states nonnegative on products of extremal effect rays."""
    for s in (left, right):
        if s.restricted:
            raise RestrictedEffectsError(f"{s.label} has a restricted effect space; "
                                         "use generalized_max_tensor")
    mode = EXACT if left.mode == EXACT and right.mode == EXACT else APPROX
    rows = _kron_rows(left.effects, right.effects, mode)
    return JointModel(left, right, MAX_TP, constraints_h=_tensor_constraints(rows, left.dim * right.dim, mode))


def generalized_max_tensor(left: SystemModel, right: SystemModel) -> JointModel:
    """States nonnegative on E_A x Emax(S_B) and on Emax(S_A) x E_B."""
    mode = EXACT if left.mode == EXACT and right.mode == EXACT else APPROX
    rows = np.concatenate([_kron_rows(left.effects, right.max_effects, mode),
                           _kron_rows(left.max_effects, right.effects, mode)])
    return JointModel(left, right, GEN_MAX_TP, constraints_h=_tensor_constraints(rows, left.dim * right.dim, mode))


# ---------------------------------------------------------------- correlations

@dataclass(frozen=True, eq=False)
class CorrelationVector:
    """P(ab|xy) stored as ``entries[a, b, x, y]``."""

    entries: np.ndarray

    def __post_init__(self):
        if np.shape(self.entries) != (2, 2, 2, 2):
            raise ValueError("a correlation vector has shape (2, 2, 2, 2)")

    def __getitem__(self, key):
        return self.entries[key]

    def flat(self) -> np.ndarray:
        return np.asarray(self.entries).reshape(16)

    def table(self) -> np.ndarray:
        """4x4 display: row 2x + a, column 2y + b."""
        t = np.empty((4, 4), dtype=np.asarray(self.entries).dtype)
        for a in range(2):
            for b in range(2):
                for x in range(2):
                    for y in range(2):
                        t[2 * x + a, 2 * y + b] = self.entries[a, b, x, y]
        return t

    def to_csv(self) -> str:
        from .geometry import format_scalar

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in self.table():
            w.writerow([format_scalar(v) for v in row])
        return buf.getvalue()

    def is_normalised(self, tol: float = DEFAULT_TOL) -> bool:
        for x in range(2):
            for y in range(2):
                s = sum(self.entries[a, b, x, y] for a in range(2) for b in range(2))
                if not _zero(s - 1, tol):
                    return False
        return True

    def is_nonsignalling(self, tol: float = DEFAULT_TOL) -> bool:
        e = self.entries
        for a in range(2):
            for x in range(2):
                m = [e[a, 0, x, y] + e[a, 1, x, y] for y in range(2)]
                if not _zero(m[0] - m[1], tol):
                    return False
        for b in range(2):
            for y in range(2):
                m = [e[0, b, x, y] + e[1, b, x, y] for x in range(2)]
                if not _zero(m[0] - m[1], tol):
                    return False
        return True


def _zero(v, tol):
    if isinstance(v, Fraction) or isinstance(v, int):
        return v == 0
    return abs(float(v)) <= tol


def correlation_vector(state, na: tuple[Measurement, Measurement], nb: tuple[Measurement, Measurement],
                       dims: tuple[int, int] | None = None) -> CorrelationVector:
    """Entries (e_a^x tensor f_b^y)(S) for binary measurements."""
    state = np.asarray(state)
    if dims is None:
        dims = (len(na[0].effects[0]), len(nb[0].effects[0]))
    if state.size != dims[0] * dims[1]:
        raise ValueError(f"state of size {state.size} does not match local dimensions {dims}")
    m = state.reshape(dims)
    out = np.empty((2, 2, 2, 2), dtype=m.dtype)
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    out[a, b, x, y] = na[x].effects[a] @ m @ nb[y].effects[b]
    return CorrelationVector(out)


def is_member(state, joint: JointModel) -> bool:
    """Membership of a normalised state in the composite."""
    u = joint.joint_unit
    norm = np.asarray(state) @ u
    if joint.mode == EXACT:
        if norm != 1:
            return False
    elif abs(float(norm) - 1) > 1e-7:
        return False
    if joint.constraints_h is not None:
        return membership(state, joint.constraints_h)
    return membership(state, joint.generators_v)


def is_separable(state, joint: JointModel) -> bool:
    """LP membership of ``state`` in the convex hull of product states."""
    mode = joint.mode
    gens = _kron_rows(joint.left.states, joint.right.states, mode)
    k = len(gens)
    # feasibility of  gens^T w = state,  w >= 0
    lp = LinearProgram(objective=np.zeros(k, dtype=object if mode == EXACT else float),
                       eq=gens.T, eq_rhs=np.asarray(state), sense="max", nonnegative=True)
    try:
        solve_lp(lp, mode=mode)
    except InfeasibleError:
        return False
    return True


def random_separable(joint: JointModel, rng: np.random.Generator, exact: bool = False):
    """Dirichlet-weighted mixture of products of extremal local states.

    With ``exact`` the weights are rounded to rationals with denominator
    1000 and renormalised, so the result is an exact mixture.
    """
    gens = _kron_rows(joint.left.states, joint.right.states, joint.mode)
    w = rng.dirichlet(np.ones(len(gens)))
    if exact:
        ints = np.maximum(np.round(w * 1000).astype(int), 0)
        if ints.sum() == 0:
            ints[0] = 1
        total = int(ints.sum())
        w = np.array([Fraction(int(i), total) for i in ints], dtype=object)
        return w @ gens, w
    return w @ np.asarray(gens, dtype=float), w
