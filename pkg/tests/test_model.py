import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isobn.errors import NetworkError
from isobn.model import (
    config_index,
    joint_distribution,
    parent_configurations,
    validate_network,
)
from isobn.simulate import reference_network


def chain_abc():
    return validate_network(
        ["A", "B", "C"],
        {"B": ["A"], "C": ["B"]},
        {"A": {(): 0.3}, "B": {(0,): 0.2, (1,): 0.9}, "C": {(0,): 0.5, (1,): 0.1}},
    )


def brute_force_joint(net):
    """Product of CPT entries, one assignment at a time."""
    V = len(net)
    out = []
    for a in itertools.product((0, 1), repeat=V):
        p = 1.0
        for v in range(V):
            pa = tuple(a[q] for q in net.parents[v])
            p1 = net.cpt[v][config_index(pa)]
            p *= p1 if a[v] else 1 - p1
        out.append(p)
    return np.array(out)


def test_chain_is_valid():
    net = chain_abc()
    assert net.parent_names("B") == ("A",)
    assert net.parent_names("C") == ("B",)
    assert net.is_complete


def test_self_loop_reports_cycle():
    with pytest.raises(NetworkError, match="cycle.*Y"):
        validate_network(["Y"], {"Y": ["Y"]})


def test_longer_cycle_names_members():
    with pytest.raises(NetworkError) as exc:
        validate_network(["A", "B", "C"], {"B": ["A"], "C": ["B"], "A": ["C"]})
    msg = str(exc.value)
    assert all(n in msg for n in "ABC")


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(variables=["A", "A"]), "duplicate"),
        (dict(variables=["A"], parents={"A": ["Z"]}), "unknown parent"),
        (dict(variables=["A"], cpt={"A": {(): 1.5}}), "outside"),
        (dict(variables=["A", "B"], parents={"B": ["A"]}, cpt={"B": {(0,): 0.5}}), "missing"),
    ],
)
def test_validation_errors(kwargs, match):
    with pytest.raises(NetworkError, match=match):
        validate_network(**kwargs)


def test_three_parent_fragment_has_eight_configurations(three_parent):
    net, _, _ = three_parent
    assert net.parent_names("Y") == ("X1", "X2", "X3")
    assert len(parent_configurations(net, "Y")) == 8


def test_parent_configurations_order():
    net = validate_network(["A", "B", "Y"], {"Y": ["A", "B"]})
    assert parent_configurations(net, "A") == [()]
    assert parent_configurations(net, "Y") == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [config_index(c) for c in parent_configurations(net, "Y")] == [0, 1, 2, 3]


def test_joint_single_and_independent():
    net = validate_network(["Y"], cpt={"Y": {(): 0.3}})
    np.testing.assert_allclose(joint_distribution(net), [0.7, 0.3], atol=1e-15)
    net = validate_network(["A", "B"], cpt={"A": {(): 0.5}, "B": {(): 0.5}})
    np.testing.assert_allclose(joint_distribution(net), [0.25] * 4, atol=1e-15)


def test_joint_matches_brute_force_on_reference():
    net, _, _ = reference_network()
    joint = joint_distribution(net)
    np.testing.assert_allclose(joint, brute_force_joint(net), atol=1e-15)
    assert abs(joint.sum() - 1) < 1e-9


def test_joint_requires_cpt_and_respects_cap():
    with pytest.raises(NetworkError, match="no CPT"):
        joint_distribution(validate_network(["A"]))
    net = validate_network(["A", "B"], cpt={"A": {(): 0.5}, "B": {(): 0.5}})
    with pytest.raises(NetworkError, match="capped"):
        joint_distribution(net, cap=1)


@st.composite
def random_networks(draw):
    V = draw(st.integers(1, 6))
    names = [f"V{i}" for i in range(V)]
    parents = {}
    cpt = {}
    for i in range(V):
        ps = [names[j] for j in range(i) if draw(st.booleans())][:3]
        parents[names[i]] = ps
        probs = draw(st.lists(st.floats(0, 1), min_size=1 << len(ps), max_size=1 << len(ps)))
        cpt[names[i]] = {c: p for c, p in zip(itertools.product((0, 1), repeat=len(ps)), probs)}
    return validate_network(names, parents, cpt)


@settings(max_examples=60, deadline=None)
@given(random_networks())
def test_joint_sums_to_one_and_recovers_roots(net):
    joint = joint_distribution(net)
    assert abs(joint.sum() - 1) < 1e-9
    assert np.all(joint >= 0)
    V = len(net)
    for v in range(V):
        if net.parents[v]:
            continue
        bit = (np.arange(1 << V) >> (V - 1 - v)) & 1
        assert abs(joint[bit == 1].sum() - net.cpt[v][0]) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 8))
def test_parent_configurations_complete(k):
    names = [f"P{i}" for i in range(k)] + ["Y"]
    net = validate_network(names, {"Y": names[:-1]})
    configs = parent_configurations(net, "Y")
    assert len(configs) == 2**k
    assert len(set(configs)) == 2**k
