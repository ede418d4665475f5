import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from discatom.fixtures import load_fixture
from discatom.free import element_of_term
from discatom.preorder import (
    PreorderSpec,
    atomic_counterexample,
    boolean_natural_order,
    check_preorder_matrix,
    cover_set,
    covers,
    find_cover_in_interval,
    holds,
    is_atomic,
    relation_matrix,
    strictly_less,
    verify_preorder,
)
from discatom.terms import App, TermError

from conftest import CONFIGS, free


def brute_covers(leq, a):
    n = len(leq)
    lt = lambda p, q: leq[p][q] and not leq[q][p]
    return [c for c in range(n) if lt(a, c) and not any(lt(a, x) and lt(x, c) for x in range(n))]


def brute_atomic(leq):
    n = len(leq)
    for a, b in itertools.product(range(n), repeat=2):
        if leq[a][b] and not leq[b][a]:
            if not any(leq[c][b] for c in brute_covers(leq, a)):
                return False
    return True


@st.composite
def preorders(draw):
    n = draw(st.integers(1, 7))
    rel = np.array(draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))).reshape(n, n)
    rel |= np.eye(n, dtype=bool)
    for k in range(n):  # Warshall
        rel |= rel[:, [k]] & rel[[k], :]
    return rel


@given(preorders())
def test_every_finite_preorder_is_atomic(leq):
    assert check_preorder_matrix(leq).is_preorder
    assert atomic_counterexample(leq) is None
    assert brute_atomic(leq.tolist())


def test_non_atomic_relation_is_detected():
    # not transitive: 0 < 1 < 3 < 2 and 0 < 3, 0 < 2, but 1 is not below 2;
    # the only cover of 0 is 1, so (0, 2) has no cover of 0 inside it
    leq = np.eye(4, dtype=bool)
    for a, b in [(0, 1), (1, 3), (3, 2), (0, 3), (0, 2)]:
        leq[a, b] = True
    assert not check_preorder_matrix(leq).transitive
    assert atomic_counterexample(leq) == (0, 2)
    assert not brute_atomic(leq.tolist())


def test_boolean_order_examples(b2):
    alg = b2.presentation.generators[0]
    spec = boolean_natural_order(alg.signature)
    assert spec == b2.order("boolean")
    assert holds(spec, alg, 0, 1)
    assert not holds(spec, alg, 1, 0)
    assert strictly_less(spec, alg, 0, 1)
    assert not strictly_less(spec, alg, 1, 1)


def test_boolean_order_on_free_m2(b2):
    fa = free("B2", 2)
    spec = b2.order("boolean")
    rep = verify_preorder(spec, fa)
    assert rep.reflexive and rep.transitive and rep.antisymmetric
    zero = element_of_term(fa, App("zero")).index
    one = element_of_term(fa, App("one")).index
    atoms = [i for i in range(fa.size) if sum(fa.values[i]) == 1]
    assert len(atoms) == 4
    assert cover_set(spec, fa, zero) == sorted(atoms)
    for a in atoms:
        assert covers(spec, fa, zero, a)
    assert not covers(spec, fa, zero, one)
    assert not covers(spec, fa, zero, zero)
    assert find_cover_in_interval(spec, fa, zero, one) == min(atoms)
    for a in atoms:
        assert find_cover_in_interval(spec, fa, zero, a) == a


def test_boolean_order_requires_binary_meet(b2):
    with pytest.raises(TermError):
        boolean_natural_order(b2.presentation.signature, "meet")
    with pytest.raises(TermError):
        boolean_natural_order(b2.presentation.signature, "not")


def test_collapsed_preorder_on_d3min(d3min):
    alg = d3min.presentation.generators[0]
    spec = d3min.order("collapsed")
    rep = verify_preorder(spec, alg)
    assert rep.is_preorder and not rep.antisymmetric
    assert holds(spec, alg, 1, 2) and holds(spec, alg, 2, 1)
    assert not strictly_less(spec, alg, 1, 2)
    cap = lambda z: min(z, 1)
    for a, b in itertools.product(range(3), repeat=2):
        assert holds(spec, alg, a, b) == (min(cap(a), cap(b)) == cap(a))


def test_linear_order_cover(d3min):
    alg = d3min.presentation.generators[0]
    spec = d3min.order("linear")
    assert find_cover_in_interval(spec, alg, 0, 2) == 1
    with pytest.raises(ValueError, match="precondition"):
        find_cover_in_interval(spec, alg, 2, 0)


def test_equality_is_discrete_and_vacuously_atomic(b2):
    spec = b2.order("equality")
    fa = free("B2", 2)
    rep = verify_preorder(spec, fa)
    assert rep.is_preorder and rep.antisymmetric
    assert is_atomic(spec, fa) == (True, None)
    assert not relation_matrix(spec, fa)[0, 1]


@pytest.mark.parametrize("name, m, order", CONFIGS)
def test_holds_agrees_with_matrix_and_coordinates(name, m, order):
    fx = load_fixture(name)
    spec = fx.order(order)
    fa = free(name, m)
    leq = relation_matrix(spec, fa)
    for a, b in itertools.product(range(fa.size), repeat=2):
        direct = holds(spec, fa, a, b)
        pointwise = all(
            holds(spec, fa.generator_of(j), int(fa.values[a, j]), int(fa.values[b, j]))
            for j in range(len(fa.coordinates))
        )
        assert direct == pointwise == bool(leq[a, b])


@pytest.mark.parametrize("name, m, order", CONFIGS)
def test_order_invariants_on_free(name, m, order):
    spec = load_fixture(name).order(order)
    fa = free(name, m)
    assert verify_preorder(spec, fa).is_preorder
    assert is_atomic(spec, fa) == (True, None)
    leq = relation_matrix(spec, fa).tolist()
    for a in range(fa.size):
        cs = cover_set(spec, fa, a)
        assert cs == brute_covers(leq, a)
        for c in cs:
            assert strictly_less(spec, fa, a, c)
        for b in range(fa.size):
            if strictly_less(spec, fa, a, b):
                c = find_cover_in_interval(spec, fa, a, b)
                assert covers(spec, fa, a, c) and holds(spec, fa, c, b)


def test_preorder_spec_parse_rejects_third_variable(b2):
    with pytest.raises(TermError):
        PreorderSpec.parse("(and x z)", "x", b2.presentation.signature)


def test_non_preorder_reported():
    leq = np.array([[1, 1, 0], [0, 1, 1], [0, 0, 1]], dtype=bool)
    rep = check_preorder_matrix(leq)
    assert rep.reflexive and not rep.transitive
    assert rep.counterexamples["transitive"] == (0, 1, 2)
