import math
import warnings
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from gptchsh.chsh import (
    TSIRELSON,
    VARIANTS,
    ConjecturalWarning,
    best_variant,
    ch_functional,
    chsh_functional,
    classical_bound_check,
    lhv_decomposition,
    odd_polygon_formula,
    optimize_chsh,
    replay,
    selfdual_polygon_formula,
    variant_coefficients,
    vertex_optimum,
    win_probability,
)
from gptchsh.composition import (
    CorrelationVector,
    correlation_vector,
    generalized_max_tensor,
    max_tensor,
    min_tensor,
    random_separable,
)
from gptchsh.geometry import APPROX, ConeH, enumerate_rays, is_extremal, vertices_of_polytope
from gptchsh.geometry.numeric import rank_exact
from gptchsh.systems import gbit_square, polygon_system, self_dualize, trit


def idx(a, b, x, y):
    return 8 * a + 4 * b + 2 * x + y


def ns_constraints():
    """Normalisation and no-signalling rows on the 16 entries P[a, b, x, y]."""
    rows = []
    for x, y in product(range(2), repeat=2):
        r = [0] * 16
        for a, b in product(range(2), repeat=2):
            r[idx(a, b, x, y)] = 1
        rows.append(r)
    for a, x in product(range(2), repeat=2):
        r = [0] * 16
        for b in range(2):
            r[idx(a, b, x, 0)] += 1
            r[idx(a, b, x, 1)] -= 1
        rows.append(r)
    for b, y in product(range(2), repeat=2):
        r = [0] * 16
        for a in range(2):
            r[idx(a, b, 0, y)] += 1
            r[idx(a, b, 1, y)] -= 1
        rows.append(r)
    return rows


def ns_vertices():
    eq = [r + [0] for r in ns_constraints()]
    for r in eq[:4]:
        r[16] = -1
    cone = enumerate_rays(ConeH(np.eye(17, dtype=int)[:16], 17, equalities=eq))
    verts = vertices_of_polytope(cone, [0] * 16 + [1])
    return [CorrelationVector(np.array(v[:16], dtype=object).reshape(2, 2, 2, 2)) for v in verts]


def flat(c):
    return [c[a, b, x, y] for a, b, x, y in product(range(2), repeat=4)]


# ---------------------------------------------------------------- functionals

def test_first_functional_matches_its_eight_terms():
    terms = [(1, 1, 0, 1), (0, 0, 0, 1), (1, 1, 0, 0), (0, 0, 0, 0),
             (1, 1, 1, 1), (0, 0, 1, 1), (1, 0, 1, 0), (0, 1, 1, 0)]
    expected = np.zeros((2, 2, 2, 2), dtype=object)
    expected[...] = Fraction(0)
    for k in terms:
        expected[k] = Fraction(1, 4)
    assert (chsh_functional(1).coefficients == expected).all()


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_chsh_and_ch_agree_on_nonsignalling_boxes(i):
    j, ch = chsh_functional(i), ch_functional(i)
    verts = ns_vertices()
    assert len(verts) == 24
    for p in verts:
        assert j(p) == Fraction(3, 4) - ch(p) / 2
    # coefficient-wise the identity only holds modulo the constraints
    residual = [a + b / 2 for a, b in zip(flat(j.coefficients), flat(ch.coefficients))]
    norm = [Fraction(3, 16)] * 16  # evaluates to 3/4 on every normalised box
    diff = [r - n for r, n in zip(residual, norm)]
    rows = ns_constraints()
    assert rank_exact(rows + [diff], 16) == rank_exact(rows, 16)
    assert any(d != 0 for d in diff)


def test_deterministic_boxes_win_between_quarter_and_three_quarters():
    for a0, a1, b0, b1 in product(range(2), repeat=4):
        e = np.zeros((2, 2, 2, 2), dtype=object)
        e[...] = Fraction(0)
        for x, y in product(range(2), repeat=2):
            e[(a0, a1)[x], (b0, b1)[y], x, y] = Fraction(1)
        p = CorrelationVector(e)
        for i in range(1, 5):
            assert Fraction(1, 4) <= chsh_functional(i)(p) <= Fraction(3, 4)
        assert best_variant(p)[0] == Fraction(3, 4)


def test_variants_partition_each_input_pair():
    for alpha, beta in product(range(2), repeat=2):
        up, low = variant_coefficients(alpha, beta, 0), variant_coefficients(alpha, beta, 1)
        assert ((up + low) == Fraction(1, 4)).all()
    assert len(set(VARIANTS)) == 8


def test_pr_box_wins_one_variant_with_certainty():
    e = np.zeros((2, 2, 2, 2), dtype=object)
    e[...] = Fraction(0)
    for a, b, x, y in product(range(2), repeat=4):
        if a ^ b == x & y:
            e[a, b, x, y] = Fraction(1, 2)
    p = CorrelationVector(e)
    assert win_probability(p, (0, 0, 0)) == 1
    assert best_variant(p) == (1, (0, 0, 0))


# ---------------------------------------------------------------- sweep

@pytest.mark.parametrize("n,value", [(7, 0.8462), (9, 0.8497)])
def test_odd_polygon_optimum(n, value):
    p = polygon_system(n)
    r = optimize_chsh(max_tensor(p, p))
    assert abs(r.optimum - value) < 1e-4
    assert abs(r.optimum - odd_polygon_formula(n)) < 1e-9


@pytest.mark.parametrize("n", [5, 11, 13])
def test_reference_odd_values_come_from_unequal_separations(n):
    """The closed form is reproduced once Alice and Bob use pairs with different
    angular separation; the unrestricted optimum lies strictly above it."""
    p = polygon_system(n)
    joint = max_tensor(p, p)

    def sep(pair):
        d = (pair[1] - pair[0]) % n
        return min(d, n - d)

    restricted = optimize_chsh(joint, pair_filter=lambda pa, pb: sep(pa) != sep(pb))
    assert abs(restricted.optimum - odd_polygon_formula(n)) < 1e-9
    full = optimize_chsh(joint)
    assert full.optimum > odd_polygon_formula(n) + 1e-3
    assert full.optimum < TSIRELSON


def test_classical_composites_reach_three_quarters():
    g = gbit_square()
    assert optimize_chsh(min_tensor(g, g)).optimum == Fraction(3, 4)
    t = trit()
    assert optimize_chsh(max_tensor(t, t)).optimum == Fraction(3, 4)


@pytest.mark.parametrize("n", [5, 7])
def test_best_state_replays_and_is_extremal(n):
    p = polygon_system(n)
    joint = max_tensor(p, p)
    r = optimize_chsh(joint)
    assert abs(replay(joint, r) - r.optimum) < 1e-9
    assert r.orientation in ("upper", "lower") and 1 <= r.functional_index <= 4
    assert is_extremal(r.best_state, joint.state_constraints)
    assert r.problems_solved == 8 * (n - 1) * n * (n - 1) // 2


@pytest.mark.parametrize("make", [lambda: polygon_system(5), lambda: polygon_system(7),
                                  lambda: self_dualize(polygon_system(4)), lambda: self_dualize(polygon_system(6))],
                         ids=["odd5", "odd7", "sd4", "sd6"])
def test_symmetry_reduction_is_lossless(make):
    s = make()
    joint = generalized_max_tensor(s, s)
    a = optimize_chsh(joint, reduce_symmetry=True)
    b = optimize_chsh(joint, reduce_symmetry=False)
    assert abs(a.optimum - b.optimum) < 1e-9
    assert a.problems_solved <= b.problems_solved


def test_lp_route_matches_vertex_route():
    g = gbit_square()
    for joint in (min_tensor(g, g), max_tensor(g, g)):
        assert optimize_chsh(joint).optimum == vertex_optimum(joint)
    p = polygon_system(5)
    joint = max_tensor(p, p)
    assert abs(optimize_chsh(joint).optimum - vertex_optimum(joint)) < 1e-9
    s = self_dualize(polygon_system(4))
    joint = generalized_max_tensor(s, s)
    assert abs(optimize_chsh(joint).optimum - vertex_optimum(joint)) < 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("make", [lambda: polygon_system(7), lambda: self_dualize(polygon_system(6))],
                         ids=["odd7", "sd6"])
def test_lp_route_matches_vertex_route_larger(make):
    s = make()
    joint = generalized_max_tensor(s, s)
    assert abs(optimize_chsh(joint).optimum - vertex_optimum(joint)) < 1e-9


@pytest.mark.parametrize("n", [5, 7, 9, 11, 13])
def test_odd_polygons_stay_below_tsirelson(n):
    p = polygon_system(n)
    assert optimize_chsh(max_tensor(p, p), jobs=2).optimum <= TSIRELSON - 1e-4


@pytest.mark.parametrize("n,value", [(4, 0.75), (6, 0.8125), (8, 0.5 + math.sqrt(2) / 4), (10, 0.8420), (12, None)])
def test_selfdual_optimum(n, value):
    s = self_dualize(polygon_system(n))
    opt = optimize_chsh(generalized_max_tensor(s, s)).optimum
    if value is not None:
        assert abs(opt - value) < 1e-4
    assert abs(opt - selfdual_polygon_formula(n)) < 1e-9
    assert opt <= TSIRELSON + 1e-9


def test_parallel_sweep_is_deterministic():
    p = polygon_system(7)
    joint = max_tensor(p, p)
    serial = optimize_chsh(joint, jobs=1)
    par = optimize_chsh(joint, jobs=3)
    assert par.optimum == serial.optimum
    assert par.best_measurements == serial.best_measurements
    assert par.functional_index == serial.functional_index and par.orientation == serial.orientation
    assert np.array_equal(par.best_state, serial.best_state)


def test_jobs_default_reads_environment(monkeypatch):
    g = gbit_square()
    monkeypatch.setenv("GPT_SELFTEST_JOBS", "2")
    assert optimize_chsh(max_tensor(g, g)).optimum == 1


# ---------------------------------------------------------------- closed forms

def test_formula_errors_and_warnings():
    with pytest.raises(ValueError):
        odd_polygon_formula(6)
    with pytest.raises(ValueError):
        odd_polygon_formula(1)
    with pytest.raises(ValueError):
        selfdual_polygon_formula(7)
    with pytest.raises(ValueError):
        selfdual_polygon_formula(2)
    with pytest.warns(ConjecturalWarning):
        odd_polygon_formula(31)
    with pytest.warns(ConjecturalWarning):
        odd_polygon_formula(3)
    with pytest.warns(ConjecturalWarning):
        selfdual_polygon_formula(32)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        odd_polygon_formula(29)
        selfdual_polygon_formula(30)


def test_formula_reference_values():
    assert selfdual_polygon_formula(8) == 0.5 + math.sqrt(2) / 4
    assert selfdual_polygon_formula(16) == 0.5 + math.sqrt(2) / 4
    assert abs(selfdual_polygon_formula(4) - 0.75) < 1e-12
    assert abs(selfdual_polygon_formula(6) - 0.8125) < 1e-12
    assert abs(odd_polygon_formula(5) - 0.8028) < 1e-4
    assert abs(odd_polygon_formula(11) - 0.8441) < 1e-4


@pytest.mark.parametrize("residue", [1, 3, 5, 7])
def test_odd_formula_converges_monotonically(residue):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConjecturalWarning)
        vals = [odd_polygon_formula(n) for n in range(8 + residue, 400, 8)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v < TSIRELSON for v in vals)
    assert TSIRELSON - vals[-1] < 1e-4


@pytest.mark.parametrize("residue", [2, 4, 6])
def test_selfdual_formula_converges_monotonically(residue):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConjecturalWarning)
        vals = [selfdual_polygon_formula(n) for n in range(8 + residue, 400, 8)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v <= TSIRELSON + 1e-12 for v in vals)
    assert TSIRELSON - vals[-1] < 1e-4


# ---------------------------------------------------------------- classical ceiling

def test_opposite_deterministic_mixture_reaches_three_quarters():
    g = gbit_square()
    s0, s1 = g.states[0], g.states[3]
    state = (np.kron(s0, s0) + np.kron(s1, s1)) / 2
    ms = g.fiducial
    p = correlation_vector(state, ms, ms)
    assert best_variant(p)[0] == Fraction(3, 4)


@pytest.mark.parametrize("name", ["gbit", "trit", "pentagon"])
def test_classical_bound_check_small(name):
    system = {"gbit": gbit_square, "trit": trit, "pentagon": lambda: polygon_system(5)}[name]()
    rep = classical_bound_check(samples=30, seed=7, system=system)
    assert rep.violations == 0 and rep.decomposition_ok
    if system.mode == APPROX:
        assert rep.max_win <= 0.75 + 1e-9
    else:
        assert rep.max_win <= Fraction(3, 4)


def test_hidden_variable_rebuild_matches_correlations():
    t = trit()
    joint = min_tensor(t, t)
    state, w = random_separable(joint, np.random.default_rng(11), exact=True)
    ms = t.measurements
    for na, nb in (((ms[0], ms[1]), (ms[1], ms[2])), ((ms[2], ms[0]), (ms[0], ms[1]))):
        p = correlation_vector(state, na, nb, dims=(3, 3))
        q = lhv_decomposition(w, joint, na, nb)
        assert all(p.entries[k] == q.entries[k] for k in np.ndindex(2, 2, 2, 2))


def test_pair_filter_must_leave_something():
    g = gbit_square()
    with pytest.raises(ValueError):
        optimize_chsh(max_tensor(g, g), pair_filter=lambda pa, pb: False)
