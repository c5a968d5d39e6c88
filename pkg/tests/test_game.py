import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gptchsh.chsh import TSIRELSON
from gptchsh.composition import is_separable, min_tensor
from gptchsh.game import (
    BOB_OUTCOMES,
    Q,
    NoDistinguishablePairError,
    Strategy,
    build_epsilon_model,
    ch_bounds,
    ch_vector,
    classical_reference,
    conditional_table,
    gbit_bound,
    gbit_lower_bound,
    gbit_lower_bound_unhalved,
    isotropic_wiring_bound,
    joint_distribution,
    mixed_triple_check,
    outcome_probability,
    p_win,
    post_measurement_state,
    post_measurement_sweep,
    quantum_reference,
    quantum_table_entries,
    separable_effect_check,
    tensor_product_bound,
    uniform_responders,
)
from gptchsh.geometry import ConeV, membership
from gptchsh.geometry.numeric import exact_array, rank_exact
from gptchsh.systems import SystemModel, classical_system, gbit_square, polygon_system, trit

EPSILONS = [Fraction(1, 20), Fraction(1, 16), Fraction(1, 12), Fraction(1, 10), Fraction(3, 32), Fraction(1, 8)]


# ---------------------------------------------------------------- game rules

def test_every_outcome_of_bob_splits_answers_evenly():
    for b in BOB_OUTCOMES:
        for ra, rc in product(range(2), repeat=2):
            wins = sum(Q(a, b, c, ra, rc) for a, c in product(range(2), repeat=2))
            assert wins == 2


def test_rule_for_first_outcome_matches_reference_table():
    # sign pattern of the (0, 0) table: "+" where a xor c = (not rA) and rC
    for a, c, ra, rc in product(range(2), repeat=4):
        assert Q(a, (0, 0), c, ra, rc) == int(a ^ c == ((1 - ra) & rc))


def test_uniform_responders_win_half():
    for s in (gbit_square(), trit()):
        assert p_win(uniform_responders(s)) == Fraction(1, 2)


@pytest.mark.parametrize("make", [gbit_square, trit, lambda: classical_system(2), lambda: polygon_system(5)],
                         ids=["gbit", "trit", "bit", "pentagon"])
def test_classical_reference_reaches_three_quarters(make):
    s = make()
    strat = classical_reference(s)
    strat.check(s.unit, s.unit)
    v = p_win(strat)
    if isinstance(v, Fraction):
        assert v == Fraction(3, 4)
    else:
        assert abs(v - 0.75) < 1e-12


def test_classical_reference_needs_distinguishable_states():
    g = gbit_square()
    mixed = g.states[0] * Fraction(1, 2) + g.states[3] * Fraction(1, 2)
    # a one-state "system" has nothing to distinguish
    blob = SystemModel("blob", (mixed,), g.effects, g.unit)
    with pytest.raises(NoDistinguishablePairError):
        classical_reference(blob)


def test_strategy_check_rejects_bad_measurement():
    g = gbit_square()
    s = uniform_responders(g)
    bad = Strategy(s.source_ab, s.source_bc, {b: s.bob[(0, 0)] for b in BOB_OUTCOMES} | {(1, 1): 0 * s.bob[(0, 0)]},
                   s.alice, s.charlie)
    with pytest.raises(ValueError):
        bad.check(g.unit, g.unit)


# ---------------------------------------------------------------- quantum reference

def _hilbert_reference():
    """Same protocol computed on four qubits A B B' C, without the Pauli picture."""
    def proj(theta):
        k = np.array([math.cos(theta / 2), math.sin(theta / 2)])
        return np.outer(k, k)

    s = 1 / math.sqrt(2)
    bell = {(0, 0): [s, 0, 0, s], (0, 1): [s, 0, 0, -s], (1, 0): [0, s, s, 0], (1, 1): [0, s, -s, 0]}
    phi = np.array(bell[0, 0])
    psi = np.kron(phi, phi)
    rho = np.outer(psi, psi)
    alice = [(proj(0), proj(math.pi)), (proj(math.pi / 2), proj(3 * math.pi / 2))]
    charlie = [(proj(math.pi / 4), proj(5 * math.pi / 4)), (proj(3 * math.pi / 4), proj(7 * math.pi / 4))]
    out = {}
    for b in BOB_OUTCOMES:
        v = np.array(bell[b])
        B = np.outer(v, v)
        for ra, rc, a, c in product(range(2), repeat=4):
            op = np.kron(np.kron(alice[ra][a], B), charlie[rc][c])
            out[a, b, c, ra, rc] = float(np.trace(op @ rho))
    return out


def test_quantum_reference_matches_hilbert_space():
    ref = _hilbert_reference()
    got = joint_distribution(quantum_reference())
    assert max(abs(got[k] - ref[k]) for k in ref) < 1e-12


def test_quantum_reference_value_and_table():
    q = quantum_reference()
    assert abs(p_win(q) - TSIRELSON) < 1e-12
    table = conditional_table(q, (0, 0)).entries
    eps = 1 / math.sqrt(2)
    assert np.max(np.abs(np.asarray(table, float) - quantum_table_entries(eps))) < 1e-12
    for b in BOB_OUTCOMES:
        assert abs(outcome_probability(q, b) - 0.25) < 1e-12
        t = np.asarray(conditional_table(q, b).entries, float)
        win = sum(t[a, c, ra, rc] for a, c, ra, rc in product(range(2), repeat=4) if Q(a, b, c, ra, rc)) / 4
        assert abs(win - TSIRELSON) < 1e-12


def test_quantum_conditional_tables_are_nonsignalling():
    q = quantum_reference()
    for b in BOB_OUTCOMES:
        t = conditional_table(q, b)
        assert t.is_normalised(1e-12) and t.is_nonsignalling(1e-12)


# ---------------------------------------------------------------- CH-restricted gbits

@pytest.fixture(scope="module")
def models():
    return {e: build_epsilon_model(e) for e in EPSILONS + [Fraction(0)]}


def test_vertex_and_ray_counts(models):
    for e, m in models.items():
        if e == Fraction(1, 8):
            assert m.vertex_count == 16 and m.ray_count == 24
        elif e == 0:
            assert m.vertex_count == 24 and m.ray_count == 16
        else:
            assert m.vertex_count == 80 and m.ray_count == 80


@pytest.mark.parametrize("eps", [Fraction(1, 16), Fraction(1, 10)])
def test_vertices_are_tight_on_rank_eight_facets(models, eps):
    m = models[eps]
    rows = [list(r) for r in m.c_constraints.inequalities]
    for v in m.vertices:
        vals = [sum(a * x for a, x in zip(r, v)) for r in rows]
        assert all(x >= 0 for x in vals)
        tight = [r for r, x in zip(rows, vals) if x == 0]
        assert rank_exact(tight, 9) == 8


@pytest.mark.parametrize("eps", [Fraction(1, 16), Fraction(1, 10)])
def test_effect_rays_are_tight_on_rank_eight_generators(models, eps):
    m = models[eps]
    gens = [list(g) for g in m.deterministic + m.isotropic]
    assert len(gens) == 24
    for r in m.d_eps.generators:
        vals = [sum(a * x for a, x in zip(r, g)) for g in gens]
        assert all(x >= 0 for x in vals)
        tight = [g for g, x in zip(gens, vals) if x == 0]
        assert len(tight) >= 8 and rank_exact(tight, 9) == 8


def test_generating_states_are_members(models):
    for e, m in models.items():
        for s in m.deterministic + m.isotropic:
            assert membership(s, m.c_constraints)


def test_epsilon_out_of_range():
    for bad in (Fraction(-1, 10), Fraction(1, 7)):
        with pytest.raises(ValueError):
            build_epsilon_model(bad)


@pytest.mark.parametrize("eps", EPSILONS)
def test_sweep_matches_closed_forms(models, eps):
    rep = post_measurement_sweep(models[eps])
    lo, hi = ch_bounds(eps)
    assert rep.ch_min == lo and rep.ch_max == hi
    assert rep.p_win_upper == gbit_bound(eps)
    assert rep.p_win_lower == gbit_lower_bound(eps)
    # witnesses reproduce the extremes
    for s, target in ((rep.state_min, lo), (rep.state_max, hi)):
        vals = [ch_vector(i) @ s.reshape(-1) for i in (1, 2, 3, 4)]
        assert target in vals


@pytest.mark.parametrize("eps", [Fraction(1, 16), Fraction(1, 8)])
def test_pruning_is_lossless(models, eps):
    a = post_measurement_sweep(models[eps])
    b = post_measurement_sweep(models[eps], prune=True)
    assert (a.ch_min, a.ch_max) == (b.ch_min, b.ch_max)
    assert b.triples < a.triples


def test_zero_epsilon_endpoint_only_has_product_effects(models):
    # with PR boxes among the generating states only product effects survive
    rep = post_measurement_sweep(models[Fraction(0)])
    assert (rep.ch_min, rep.ch_max) == ch_bounds(0)
    assert rep.p_win_upper == gbit_bound(0) == Fraction(3, 4)


def test_gbit_bound_peak():
    assert gbit_bound(Fraction(1, 16)) == Fraction(4, 5)
    assert gbit_bound(0) == gbit_bound(Fraction(1, 8)) == Fraction(3, 4)
    grid = [Fraction(k, 800) for k in range(101)]
    vals = [gbit_bound(e) for e in grid]
    assert max(vals) == Fraction(4, 5) and grid[vals.index(max(vals))] == Fraction(1, 16)


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=0, max_value=Fraction(1, 8)))
def test_bounds_relations(eps):
    lo, hi = ch_bounds(eps)
    assert lo <= 0 <= 1 <= hi
    assert Fraction(3, 4) <= gbit_bound(eps) <= 1
    assert gbit_lower_bound(eps) == 1 - gbit_bound(eps)
    assert gbit_lower_bound_unhalved(eps) == gbit_lower_bound(eps) - hi / 2


def test_lower_bound_forms_differ():
    e = Fraction(1, 16)
    assert gbit_lower_bound(e) == Fraction(1, 5)
    assert gbit_lower_bound_unhalved(e) == Fraction(3, 4) - Fraction(11, 10)


def test_isotropic_wiring_bound():
    assert isotropic_wiring_bound(Fraction(2, 3)) == Fraction(3, 4)
    assert isotropic_wiring_bound(1) == 1
    assert isotropic_wiring_bound(Fraction(4, 5)) == Fraction(5, 6)
    assert abs(isotropic_wiring_bound(0.9) - float(isotropic_wiring_bound(Fraction(9, 10)))) < 1e-15
    with pytest.raises(ValueError):
        isotropic_wiring_bound(Fraction(1, 2))
    with pytest.raises(ValueError):
        isotropic_wiring_bound(Fraction(11, 10))


# ---------------------------------------------------------------- structural properties

def test_separable_effects_keep_conditioned_states_separable(models):
    assert separable_effect_check(models[Fraction(1, 16)], samples=30, seed=3) == (30, 0)
    with pytest.raises(ValueError):
        separable_effect_check(models[Fraction(1, 8)], samples=1)


def test_entangled_effect_can_swap_entanglement(models):
    m = models[Fraction(1, 16)]
    g = gbit_square()
    sep = min_tensor(g, g)
    pr = [v for v in m.vertices if not is_separable(v, sep)][0].reshape(3, 3)
    found = False
    for r in m.d_eps.generators:
        s, _ = post_measurement_state(pr, exact_array(r).reshape(3, 3), pr)
        if s is not None and not is_separable(s.reshape(-1), sep):
            found = True
            break
    assert found


@pytest.mark.parametrize("eps", [Fraction(1, 8), Fraction(1, 16)])
def test_mixed_triples_stay_in_extremal_hull(models, eps):
    assert mixed_triple_check(models[eps], samples=30, seed=5) == (30, 0)


def test_hull_membership_is_not_vacuous(models):
    m = models[Fraction(1, 16)]
    pts = [v for v in m.vertices[:5]]
    outside = m.vertices[5]
    assert not membership(outside, ConeV(pts, 9))


@pytest.mark.slow
@pytest.mark.parametrize("make,kind", [(gbit_square, "min"), (gbit_square, "max"), (trit, "min"), (trit, "max")],
                         ids=["gbit-min", "gbit-max", "trit-min", "trit-max"])
def test_tensor_products_cap_the_game_at_three_quarters(make, kind):
    assert tensor_product_bound(make(), kind) == Fraction(3, 4)


def test_tensor_product_bound_kind_error():
    with pytest.raises(ValueError):
        tensor_product_bound(trit(), "middle")
