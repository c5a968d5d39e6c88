from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from gptchsh.chsh import optimize_chsh
from gptchsh.composition import (
    CorrelationVector,
    RestrictedEffectsError,
    correlation_vector,
    generalized_max_tensor,
    is_member,
    is_separable,
    max_tensor,
    min_tensor,
)
from gptchsh.game import build_epsilon_model, isotropic_states
from gptchsh.geometry import dumps
from gptchsh.geometry.numeric import exact_array
from gptchsh.systems import gbit_square, polygon_system, self_dualize, trit

H = Fraction(1, 2)
PR = exact_array([H, H, H, H, 0, H, H, H, 1])


def fiducial_vector(state):
    g = gbit_square()
    return correlation_vector(state, g.fiducial, g.fiducial)


def relabelings():
    """Local input/output relabelings of a two-input two-output box, as index maps."""
    out = []
    for flip_a0, flip_a1, flip_b0, flip_b1, swap_x, swap_y in product(range(2), repeat=6):
        def f(a, b, x, y, fa=(flip_a0, flip_a1), fb=(flip_b0, flip_b1), sx=swap_x, sy=swap_y):
            return a ^ fa[x], b ^ fb[y], x ^ sx, y ^ sy
        out.append(f)
    return out


def relabel(p: CorrelationVector, f) -> tuple:
    new = {}
    for a, b, x, y in product(range(2), repeat=4):
        new[f(a, b, x, y)] = p.entries[a, b, x, y]
    return tuple(new[k] for k in sorted(new))


def test_gbit_min_tensor():
    g = gbit_square()
    m = min_tensor(g, g)
    assert len(m.vertices) == 16
    assert all(is_separable(v, m) for v in m.vertices)
    assert optimize_chsh(m).optimum == Fraction(3, 4)


def test_gbit_max_tensor_is_box_world():
    g = gbit_square()
    m = max_tensor(g, g)
    verts = m.vertices
    assert len(verts) == 24
    pr_like = [v for v in verts if not is_separable(v, min_tensor(g, g))]
    assert len(pr_like) == 8
    assert optimize_chsh(m).optimum == 1


def test_trit_max_tensor_is_classical():
    t = trit()
    m = max_tensor(t, t)
    assert all(is_separable(v, min_tensor(t, t)) for v in m.vertices)
    assert optimize_chsh(m).optimum == Fraction(3, 4)


def test_max_tensor_rejects_restricted_systems():
    s = self_dualize(polygon_system(6))
    with pytest.raises(RestrictedEffectsError):
        max_tensor(s, s)


@pytest.mark.parametrize("system", [gbit_square(), polygon_system(5)], ids=lambda s: s.label)
def test_generalized_max_equals_max_for_unrestricted(system):
    a = generalized_max_tensor(system, system).state_constraints
    b = max_tensor(system, system).state_constraints
    assert dumps(a) == dumps(b)


def test_min_inside_restricted_inside_max():
    g = gbit_square()
    mn, mx = min_tensor(g, g), max_tensor(g, g)
    ce = build_epsilon_model(Fraction(1, 16)).joint()
    for v in mn.vertices:
        assert is_member(v, mx) and is_member(v, ce)
    for v in ce.vertices:
        assert is_member(v, mx)
    assert not is_member(PR, ce) and is_member(PR, mx)


@pytest.mark.parametrize("kind", ["min", "max", "eps"])
def test_vertex_sets_closed_under_relabelling(kind):
    g = gbit_square()
    joint = {"min": lambda: min_tensor(g, g), "max": lambda: max_tensor(g, g),
             "eps": lambda: build_epsilon_model(Fraction(1, 16)).joint()}[kind]()
    vectors = [fiducial_vector(v) for v in joint.vertices]
    keys = {relabel(p, lambda *k: k) for p in vectors}
    for f in relabelings():
        for p in vectors:
            assert relabel(p, f) in keys


@pytest.mark.parametrize("kind", ["min", "max", "eps"])
def test_members_are_exactly_nonsignalling(kind):
    g = gbit_square()
    joint = {"min": lambda: min_tensor(g, g), "max": lambda: max_tensor(g, g),
             "eps": lambda: build_epsilon_model(Fraction(1, 20)).joint()}[kind]()
    for v in joint.vertices:
        p = fiducial_vector(v)
        assert p.is_normalised() and p.is_nonsignalling()
        assert all(isinstance(x, Fraction) and 0 <= x <= 1 for x in p.flat())


def test_polygon_composites_are_nonsignalling():
    p = polygon_system(5)
    joint = max_tensor(p, p)
    ms = p.measurements
    for v in joint.vertices[:40]:
        cv = correlation_vector(v, (ms[0], ms[2]), (ms[1], ms[3]), dims=(3, 3))
        assert cv.is_normalised(1e-9) and cv.is_nonsignalling(1e-9)
        assert np.all(cv.flat() > -1e-9)


def test_deterministic_product_table_and_csv():
    g = gbit_square()
    s = np.kron(g.states[3], g.states[0])  # (1,1) on A, (0,0) on B
    p = fiducial_vector(s)
    t = p.table()
    # row 2x + a, column 2y + b: A always answers 0, B always answers 1
    expected = np.zeros((4, 4), dtype=int)
    for x in range(2):
        for y in range(2):
            expected[2 * x, 2 * y + 1] = 1
    assert (t == expected).all()
    lines = p.to_csv().splitlines()
    assert lines[0] == "0,1,0,1" and lines[1] == "0,0,0,0"


def test_correlation_vector_shape_errors():
    g = gbit_square()
    with pytest.raises(ValueError):
        correlation_vector(np.zeros(8), g.fiducial, g.fiducial)
    with pytest.raises(ValueError):
        CorrelationVector(np.zeros((2, 2, 2)))


def test_separability():
    g = gbit_square()
    m = min_tensor(g, g)
    assert not is_separable(PR, m)
    for iso in isotropic_states(Fraction(1, 8)):
        assert is_separable(iso, m)
    for iso in isotropic_states(Fraction(1, 16)):
        assert not is_separable(iso, m)


def test_lazy_vertices_are_computed_once_under_concurrency():
    g = gbit_square()
    joint = max_tensor(g, g)
    with ThreadPoolExecutor(8) as ex:
        gens = list(ex.map(lambda _: joint.state_generators, range(16)))
    assert all(x is gens[0] for x in gens)
