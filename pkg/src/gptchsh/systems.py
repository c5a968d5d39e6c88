"""Single GPT systems: state and effect cones, unit effect and measurements.

States are stored as normalised extremal state vectors and effects as the
extremal rays of the effect cone, each scaled so that its largest value on
a normalised state is exactly 1. Probabilities are plain dot products
``effect @ state``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .geometry import APPROX, DEFAULT_TOL, EXACT, ConeV, dualize, dumps, membership, same_rays
from .geometry.numeric import exact_array


class ZeroProbabilityError(ValueError):
    """Conditioning on an outcome that occurs with probability zero."""


def _vec(values, mode):
    return exact_array(values) if mode == EXACT else np.asarray(values, dtype=float)


def _scale_to_unit_max(effects, states, mode):
    out = []
    for e in effects:
        top = max(e @ s for s in states)
        if top <= 0:
            raise ValueError("effect ray vanishes on every state")
        out.append(e / top)
    return np.array(out, dtype=object if mode == EXACT else float)


@dataclass(frozen=True)
class Measurement:
    effects: tuple

    def __post_init__(self):
        if len(self.effects) < 2:
            raise ValueError("a measurement needs at least two outcomes")

    def check(self, unit, tol: float = DEFAULT_TOL) -> None:
        total = sum(self.effects[1:], self.effects[0])
        diff = np.asarray(total - unit, dtype=object)
        if any(isinstance(v, Fraction) for v in np.ravel(diff)):
            if any(v != 0 for v in np.ravel(diff)):
                raise ValueError("effects do not sum to the unit effect")
        elif np.max(np.abs(np.asarray(diff, dtype=float))) > tol:
            raise ValueError("effects do not sum to the unit effect")

    def probabilities(self, state) -> list:
        return [e @ state for e in self.effects]


def binary(effect, unit) -> Measurement:
    return Measurement((effect, unit - effect))


@dataclass(frozen=True, eq=False)
class SystemModel:
    label: str
    states: np.ndarray
    effects: np.ndarray
    unit: np.ndarray
    mode: str = EXACT
    restricted: bool = False
    self_dual: bool = False
    n: int | None = None
    symmetric: bool = False
    tol: float = DEFAULT_TOL
    fiducial: tuple = field(default=())

    @property
    def dim(self) -> int:
        return len(self.unit)

    @property
    def state_cone(self) -> ConeV:
        return ConeV(self.states, self.dim, mode=self.mode, tol=self.tol)

    @property
    def effect_cone(self) -> ConeV:
        return ConeV(self.effects, self.dim, mode=self.mode, tol=self.tol)

    @cached_property
    def max_effects(self) -> np.ndarray:
        """Extremal ray effects of the unrestricted effect space."""
        if not self.restricted:
            return self.effects
        rays = [_vec(r, self.mode) for r in dualize(self.state_cone).inequalities]
        return _scale_to_unit_max(rays, self.states, self.mode)

    @cached_property
    def measurements(self) -> list[Measurement]:
        """Binary measurements {e, u - e} built from the extremal ray effects.

        Pairs that coincide up to outcome relabelling appear once.
        """
        seen, out = [], []
        for e in self.effects:
            comp = self.unit - e
            if self._is_zero(comp) or self._is_zero(e):
                continue
            if any(self._close(e, f) for f in seen):
                continue
            seen.extend([e, comp])
            out.append(binary(e, self.unit))
        return out

    def _is_zero(self, v) -> bool:
        if self.mode == EXACT:
            return all(x == 0 for x in v)
        return float(np.max(np.abs(np.asarray(v, float)))) <= self.tol

    def _close(self, a, b) -> bool:
        return self._is_zero(a - b)

    def probability(self, effect, state):
        return effect @ state

    def describe(self) -> dict:
        return {"label": self.label, "n": self.n, "mode": self.mode, "self_dual": self.self_dual,
                "dim": self.dim, "states": len(self.states), "effects": len(self.effects)}

    def to_json(self) -> str:
        return json.dumps(self.describe(), sort_keys=True)

    def to_text(self) -> str:
        return ("# states\n" + dumps(self.state_cone) + "# effects\n" + dumps(self.effect_cone))


# ---------------------------------------------------------------- constructors

def _angle_order(vectors):
    keys = [round(math.atan2(float(v[1]), float(v[0])) % (2 * math.pi), 9) for v in vectors]
    return [vectors[i] for i in sorted(range(len(vectors)), key=lambda i: keys[i])]


def polygon_system(n: int, radius: float | None = None) -> SystemModel:
    """Regular n-gon gbit; vertex k at (r cos(2k pi/n), r sin(2k pi/n), 1).

    The effect cone is computed as the dual of the state cone.
    """
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    r = math.sqrt(1 / math.cos(math.pi / n)) if radius is None else float(radius)
    th = 2 * math.pi * np.arange(n) / n
    states = np.stack([r * np.cos(th), r * np.sin(th), np.ones(n)], axis=1)
    unit = np.array([0.0, 0.0, 1.0])
    cone = ConeV(states, 3, mode=APPROX)
    rays = [np.asarray(v, float) for v in dualize(cone).inequalities]
    effects = _scale_to_unit_max(_angle_order(rays), states, APPROX)
    return SystemModel(f"polygon-{n}", states, effects, unit, mode=APPROX, n=n, symmetric=True)


def classical_system(k: int) -> SystemModel:
    """Simplex with k pure states (exact)."""
    if k < 2:
        raise ValueError("a classical system needs at least 2 pure states")
    states = exact_array(np.eye(k, dtype=int))
    unit = exact_array([1] * k)
    rays = [exact_array(r) for r in dualize(ConeV(states, k)).inequalities]
    effects = _scale_to_unit_max(rays[::-1], states, EXACT)
    return SystemModel("trit" if k == 3 else f"classical-{k}", states, effects, unit, mode=EXACT, n=k,
                       symmetric=True)


def trit() -> SystemModel:
    return classical_system(3)


def gbit_square() -> SystemModel:
    """Square gbit: states (P(0|0), P(0|1), 1) with deterministic corners."""
    states = exact_array([[0, 0, 1], [0, 1, 1], [1, 0, 1], [1, 1, 1]])
    unit = exact_array([0, 0, 1])
    computed = dualize(ConeV(states, 3))
    ordered = exact_array([[1, 0, 0], [0, 1, 0], [-1, 0, 1], [0, -1, 1]])
    if not same_rays(computed.inequalities, ordered):
        raise AssertionError("dual of the square is not the fiducial effect set")
    effects = _scale_to_unit_max(list(ordered), states, EXACT)
    fid = (binary(effects[0], unit), binary(effects[1], unit))
    return SystemModel("gbit-square", states, effects, unit, mode=EXACT, n=4, symmetric=True, fiducial=fid)


def self_dualize(system: SystemModel) -> SystemModel:
    """Rescale the state space into its dual, then restrict effects to the state cone.

    Works for systems written as (p, 1) with unit effect (0, ..., 0, 1). The
    scale is the largest one keeping every pair of states at nonnegative
    inner product; afterwards each effect ray is a state ray.
    """
    unit = np.asarray(system.unit)
    d = system.dim
    if not all(unit[i] == 0 for i in range(d - 1)) or unit[-1] != 1:
        raise ValueError("self_dualize needs the unit effect (0, ..., 0, 1)")
    if any(s[-1] != 1 for s in system.states):
        raise ValueError("self_dualize needs states normalised in the last coordinate")
    pts = [np.asarray(s[:-1], dtype=float) for s in system.states]
    mu = -min(float(p @ q) for p in pts for q in pts)
    if mu <= 0:
        raise ValueError("state space admits no self-dualising scale: states are not contained "
                         "in the dual cone for any scaling")
    t = 1 / math.sqrt(mu)
    states = np.array([np.append(t * p, 1.0) for p in pts])
    gram = states @ states.T
    if gram.min() < -1e-9:
        raise ValueError("rescaled state cone is not contained in its dual cone")
    effects = _scale_to_unit_max(list(states), states, APPROX)
    state_cone = ConeV(states, d, mode=APPROX)
    for k, e in enumerate(effects):
        if not membership(np.append(np.zeros(d - 1), 1.0) - e, state_cone):
            raise ValueError(f"complement of effect {k} is outside the state cone; "
                             "unit effect decomposition fails")
    dual_rays = dualize(state_cone).inequalities
    restricted = not same_rays(ConeV(effects, d, mode=APPROX), dual_rays, mode=APPROX)
    label = system.label + "-selfdual"
    return SystemModel(label, states, effects, np.asarray(unit, float), mode=APPROX, restricted=restricted,
                       self_dual=True, n=system.n, symmetric=system.symmetric)


def apply_linear_map(system: SystemModel, T) -> SystemModel:
    """States map by T, effects by the inverse transpose; T must fix the unit effect."""
    if system.mode == EXACT:
        from .geometry.numeric import rref

        T = exact_array(T)
        d = system.dim
        aug = [list(T[i]) + [Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        red, piv = rref(aug, 2 * d)
        if piv[:d] != list(range(d)):
            raise ValueError("linear map is not invertible")
        Tinv = exact_array([row[d:] for row in red])
        effT = Tinv.T
    else:
        T = np.asarray(T, float)
        effT = np.linalg.inv(T).T
    new_unit = effT @ system.unit
    if not system._close(new_unit, system.unit):
        raise ValueError("linear map does not fix the unit effect")
    states = np.array([T @ s for s in system.states], dtype=object if system.mode == EXACT else float)
    effects = np.array([effT @ e for e in system.effects], dtype=object if system.mode == EXACT else float)
    return SystemModel(system.label + "-mapped", states, effects, system.unit, mode=system.mode,
                       restricted=system.restricted, self_dual=system.self_dual, n=system.n,
                       symmetric=system.symmetric)


def condition(state, effect, side: str, unit):
    """Post-measurement state of the other subsystem and the outcome probability.

    ``state`` is a joint state matrix (rows: A coordinates, columns: B
    coordinates); ``unit`` is the unit effect of the subsystem that is kept.
    """
    state = np.asarray(state)
    if side == "A":
        unnorm = effect @ state
    elif side == "B":
        unnorm = state @ effect
    else:
        raise ValueError("side must be 'A' or 'B'")
    prob = unnorm @ unit
    if prob == 0 or (not isinstance(prob, Fraction) and abs(float(prob)) <= 1e-15):
        raise ZeroProbabilityError("outcome has zero probability")
    return unnorm / prob, prob
