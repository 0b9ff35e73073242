import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dag_problem
from isobn.errors import FeasibilityError
from isobn.isotonic import (
    IsotonicProblem,
    count_lower_sets,
    lower_set_count,
    lower_sets,
    mls_solve,
    oracle_solve,
    pav_solve,
    weighted_average,
)
from isobn.signs import Sign, SignedInfluence, build_order

EPS = 1e-9
THREE_PARENT = [
    SignedInfluence(0, Sign.PLUS),
    SignedInfluence(2, Sign.MINUS, ((0, 0),)),
    SignedInfluence(2, Sign.ZERO, ((0, 1), (1, 0))),
]


def cube_order(k):
    return build_order([SignedInfluence(i, Sign.PLUS) for i in range(k)], k)


def is_lower(subset, n, edges):
    return all(a in subset for a, b in edges if b in subset)


def brute_lower_sets(n, edges):
    out = set()
    for r in range(1, n + 1):
        for s in itertools.combinations(range(n), r):
            if is_lower(set(s), n, edges):
                out.add(frozenset(s))
    return out


def x2_zero_problem():
    # local nodes: 0=(0,0,0), 1=(0,0,1), 2={(1,0,0),(1,0,1)}
    return IsotonicProblem([0.4, 0.2, 10 / 23], [10, 5, 23], [(1, 0), (0, 2), (1, 2)])


def x2_one_problem():
    # local nodes: 0=(0,1,0), 1=(0,1,1), 2=(1,1,0), 3=(1,1,1)
    return IsotonicProblem([0.5, 0.5, 0.4, 0.4], [20, EPS, 5, 10], [(0, 2), (1, 0), (1, 3)])


def test_weighted_average_examples():
    p = IsotonicProblem([0.4, 0.2], [10, 5])
    assert weighted_average({1}, p) == pytest.approx(0.2, abs=1e-15)
    assert weighted_average({0, 1}, p) == pytest.approx(5 / 15, abs=1e-15)
    assert weighted_average([0], p) == 0.4
    with pytest.raises(ValueError):
        weighted_average(set(), p)


def test_three_parent_order_components_match_hand_built_problems():
    order = build_order(THREE_PARENT, 3)
    assert order.component_edges(0) == sorted(x2_zero_problem().edges)
    assert sorted(order.component_edges(1)) == sorted(x2_one_problem().edges)


def test_lower_sets_x2_zero():
    p = x2_zero_problem()
    sets = set(lower_sets(3, p.edges))
    assert sets == {frozenset({1}), frozenset({0, 1}), frozenset({0, 1, 2})}
    avgs = sorted(weighted_average(s, p) for s in sets)
    assert avgs == pytest.approx(sorted([1 / 5, 5 / 15, 15 / 38]), abs=1e-15)


def test_lower_sets_x2_one_match_table():
    p = x2_one_problem()
    sets = set(lower_sets(4, p.edges))
    assert sets == {
        frozenset({1}), frozenset({1, 0}), frozenset({1, 3}),
        frozenset({1, 0, 2}), frozenset({1, 0, 3}), frozenset({1, 0, 2, 3}),
    }
    expected = {
        frozenset({1}): 0.5,
        frozenset({1, 0}): 10 / 20,
        frozenset({1, 3}): 4 / 10,
        frozenset({1, 0, 2}): 12 / 25,
        frozenset({1, 0, 3}): 14 / 30,
        frozenset({1, 0, 2, 3}): 16 / 35,
    }
    for s, v in expected.items():
        assert abs(weighted_average(s, p) - v) < 1e-6


@pytest.mark.parametrize("k, count", [(1, 2), (2, 5), (3, 19), (4, 167), (5, 7580)])
def test_boolean_lattice_lower_set_counts(k, count):
    order = cube_order(k)
    n = len(order.classes)
    assert sum(1 for _ in lower_sets(n, order.edges)) == count
    assert count_lower_sets(n, order.edges) == count


def test_count_for_six_parents_and_cap():
    order = cube_order(6)
    assert count_lower_sets(64, order.edges) == 7828353
    big = cube_order(7)
    with pytest.raises(FeasibilityError) as exc:
        next(lower_sets(128, big.edges))
    assert exc.value.estimated > exc.value.cap


def test_lower_sets_is_lazy():
    order = cube_order(5)
    it = lower_sets(32, order.edges)
    first = next(it)
    assert isinstance(first, frozenset) and first


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lower_sets_match_subset_enumeration(seed):
    g, w, edges = random_dag_problem(np.random.default_rng(seed), max_nodes=7)
    n = len(g)
    got = list(lower_sets(n, edges))
    assert len(got) == len(set(got))
    assert set(got) == brute_lower_sets(n, edges)
    assert count_lower_sets(n, edges) == len(got)


def test_mls_x2_zero():
    sol = mls_solve(x2_zero_problem())
    np.testing.assert_allclose(sol.fitted, [0.4, 0.2, 10 / 23], atol=1e-12)
    assert sol.blocks == ((1,), (0,), (2,))


def test_mls_x2_one_and_trace():
    trace = []
    sol = mls_solve(x2_one_problem(), trace=trace)
    np.testing.assert_allclose(sol.fitted, [0.48, 0.4, 0.48, 0.4], atol=1e-6)
    assert sol.blocks == ((1, 3), (0, 2))
    # second round sees the remaining lower sets {(0,1,0)} and {(0,1,0),(1,1,0)}
    second = {frozenset(i for i in range(4) if m >> i & 1): v for m, v in trace[1].items()}
    assert second[frozenset({0})] == pytest.approx(10 / 20, abs=1e-6)
    assert second[frozenset({0, 2})] == pytest.approx(12 / 25, abs=1e-6)


def test_mls_ties_are_pooled():
    # two incomparable nodes with equal minimum average are removed together
    p = IsotonicProblem([0.1, 0.1, 0.5], [1, 3, 2], [(0, 2), (1, 2)])
    sol = mls_solve(p)
    assert sol.blocks[0] == (0, 1)


def test_mls_identity_on_isotonic_input():
    p = IsotonicProblem([0.1, 0.2, 0.3, 0.9], [1, 2, 3, 4], [(0, 1), (1, 2), (0, 3)])
    sol = mls_solve(p)
    assert np.array_equal(sol.fitted, p.g)
    assert all(len(b) == 1 for b in sol.blocks)


def test_pav_examples():
    sol = pav_solve(IsotonicProblem([0.4, 0.2], [10, 5], [(0, 1)]))
    np.testing.assert_allclose(sol.fitted, [1 / 3, 1 / 3], atol=1e-15)
    p = IsotonicProblem([0.2, 0.8, 0.5], [1, 1, 1], [(0, 1), (1, 2)])
    np.testing.assert_allclose(pav_solve(p).fitted, [0.2, 0.65, 0.65], atol=1e-15)
    np.testing.assert_allclose(oracle_solve(p).fitted, [0.2, 0.65, 0.65], atol=1e-15)
    iso = IsotonicProblem([0.1, 0.5, 0.7], [1, 1, 1], [(0, 1), (1, 2)])
    assert np.array_equal(pav_solve(iso).fitted, iso.g)


def test_pav_rejects_non_chain():
    with pytest.raises(ValueError, match="not a chain"):
        pav_solve(IsotonicProblem([0.1, 0.2, 0.3], [1, 1, 1], [(0, 1), (0, 2)]))


def test_oracle_examples():
    np.testing.assert_allclose(oracle_solve(x2_zero_problem()).fitted, mls_solve(x2_zero_problem()).fitted, atol=1e-12)
    single = IsotonicProblem([0.37], [4])
    assert oracle_solve(single).fitted[0] == 0.37
    with pytest.raises(ValueError):
        oracle_solve(IsotonicProblem(np.zeros(9), np.ones(9)))


def test_oracle_matches_mls_on_random_five_node_problems():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = 5
        perm = rng.permutation(n)
        edges = [(int(perm[i]), int(perm[j])) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        p = IsotonicProblem(rng.uniform(0, 1, n), rng.integers(1, 21, n), edges)
        np.testing.assert_allclose(mls_solve(p).fitted, oracle_solve(p).fitted, atol=1e-9)


def upper_sets_brute(n, edges):
    for r in range(1, n + 1):
        for s in itertools.combinations(range(n), r):
            s = set(s)
            if all(b in s for a, b in edges if a in s):
                yield s


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_oracle_satisfies_projection_conditions(seed):
    # f is the weighted projection of g onto the isotonic cone iff the residual
    # r = w(g - f) sums to zero, is orthogonal to f, and has non-positive mass
    # on every upper set
    g, w, edges = random_dag_problem(np.random.default_rng(seed), max_nodes=6)
    p = IsotonicProblem(g, w, edges)
    f = oracle_solve(p).fitted
    r = w * (g - f)
    assert abs(r.sum()) < 1e-9
    assert abs(np.dot(r, f)) < 1e-9
    for u in upper_sets_brute(len(g), edges):
        assert r[list(u)].sum() <= 1e-9


@st.composite
def problems(draw, max_nodes=7):
    seed = draw(st.integers(0, 2**32 - 1))
    return IsotonicProblem(*random_dag_problem(np.random.default_rng(seed), max_nodes=max_nodes))


def isotonic(f, edges, tol):
    return all(f[a] <= f[b] + tol for a, b in edges)


@settings(max_examples=200, deadline=None)
@given(problems())
def test_mls_properties(p):
    sol = mls_solve(p)
    f = sol.fitted
    assert isotonic(f, p.edges, 1e-12)
    # weighted mean preserved
    assert abs(np.dot(p.w, f) - np.dot(p.w, p.g)) < 1e-9
    # blocks partition the nodes and carry their own weighted average
    assert sorted(i for b in sol.blocks for i in b) == list(range(p.n))
    for b in sol.blocks:
        assert np.all(f[list(b)] == f[b[0]])
        assert abs(f[b[0]] - weighted_average(b, p)) < 1e-12
        if len(b) == 1:
            assert f[b[0]] == p.g[b[0]]
    # idempotent
    again = mls_solve(IsotonicProblem(f, p.w, p.edges))
    np.testing.assert_allclose(again.fitted, f, atol=1e-12)
    # isolated nodes keep their estimate
    touched = {a for e in p.edges for a in e}
    for i in range(p.n):
        if i not in touched:
            assert f[i] == p.g[i]


@settings(max_examples=100, deadline=None)
@given(problems(max_nodes=8))
def test_mls_matches_oracle(p):
    np.testing.assert_allclose(mls_solve(p).fitted, oracle_solve(p).fitted, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.integers(1, 30)), min_size=1, max_size=10))
def test_pav_equals_mls_on_chains(items):
    g = [a for a, _ in items]
    w = [b for _, b in items]
    p = IsotonicProblem(g, w, [(i, i + 1) for i in range(len(g) - 1)])
    np.testing.assert_allclose(pav_solve(p).fitted, mls_solve(p).fitted, atol=1e-12)


def test_lower_set_count_formulas():
    assert lower_set_count(4, 3) == (168**8 - 1, 1336)
    assert lower_set_count(4, 3)[0] == pytest.approx(6.35e17, rel=1e-3)
    assert lower_set_count(6, 0) == (7828353, 7828353)
    assert lower_set_count(0, 0) == (1, 1)
    with pytest.raises(ValueError):
        lower_set_count(8, 0)


def test_undecomposed_formula_by_enumeration():
    # k1=2 signed parents plus one unsigned parent: whole order has 2 components
    order = build_order([SignedInfluence(0, Sign.PLUS), SignedInfluence(1, Sign.PLUS), SignedInfluence(2, Sign.UNSIGNED)], 3)
    n = len(order.classes)
    assert sum(1 for _ in lower_sets(n, order.edges)) == lower_set_count(2, 1)[0] == 35
    per_component = sum(count_lower_sets(len(c), order.component_edges(i)) for i, c in enumerate(order.components))
    assert per_component == lower_set_count(2, 1)[1] == 10


def test_problem_validation():
    with pytest.raises(ValueError):
        IsotonicProblem([0.1], [0])
    with pytest.raises(ValueError):
        IsotonicProblem([math.nan], [1])
    with pytest.raises(ValueError):
        IsotonicProblem([0.1], [1], [(0, 3)])
    with pytest.raises(ValueError, match="cycle"):
        mls_solve(IsotonicProblem([0.1, 0.2], [1, 1], [(0, 1), (1, 0)]))
