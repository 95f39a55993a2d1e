import itertools
import random

import pytest
from hypothesis import given, strategies as st

from haarlab.dyadic import (Interval, IntervalCollection, all_intervals, carleson_constant,
                            carleson_sums, condensation_score, contains, cover_measure, disjoint, g1,
                            g1_all, gn, is_block)
from haarlab.rational import DyadicRational

from conftest import collections, intervals

I0 = Interval(0, 0)
L0, R0 = Interval(1, 0), Interval(1, 1)
Q = [Interval(2, k) for k in range(4)]
D2 = IntervalCollection(all_intervals(2))


def C(*members):
    return IntervalCollection(members)


class TestInterval:
    def test_validation(self):
        with pytest.raises(ValueError):
            Interval(1, 2)
        with pytest.raises(ValueError):
            Interval(-1, 0)

    def test_text_form(self):
        assert Interval.parse("3:5") == Interval(3, 5)
        assert str(Interval(3, 5)) == "3:5"

    def test_measure_and_endpoints(self):
        I = Interval(3, 5)
        assert I.measure == DyadicRational(1, 3)
        assert I.left == DyadicRational(5, 3)
        assert I.right == DyadicRational(6, 3)

    def test_family(self):
        assert I0.children() == (L0, R0)
        assert Q[3].parent() == R0
        assert list(Q[1].ancestors()) == [L0, I0]
        with pytest.raises(ValueError):
            I0.parent()

    def test_cells(self):
        assert list(R0.cells(3)) == [4, 5, 6, 7]


def test_contains_examples():
    assert contains(I0, L0)
    assert not contains(L0, R0)
    assert contains(Q[2], Q[2])
    assert not contains(L0, I0)


def test_dichotomy_exhaustive_to_depth_8():
    D = all_intervals(8)
    for I, J in itertools.combinations(D[::3], 2):
        assert contains(I, J) or contains(J, I) or disjoint(I, J)
        assert not (disjoint(I, J) and (contains(I, J) or contains(J, I)))


def test_collection_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        IntervalCollection([L0, L0])
    assert IntervalCollection.parse("0:0,1:0") == C(I0, L0)


def test_cover_measure_examples():
    assert cover_measure(C(L0, Q[0])) == DyadicRational(1, 1)
    assert cover_measure(C(Q[0], Q[2])) == DyadicRational(1, 1)
    assert cover_measure(D2) == 1
    assert cover_measure(C()) == 0


@given(collections())
def test_cover_measure_bounds(E):
    m = cover_measure(E)
    assert max(I.measure for I in E) <= m <= sum((I.measure for I in E), DyadicRational(0))


def test_g1_examples():
    assert g1(I0, D2) == C(L0, R0)
    assert g1(I0, C(I0, Q[0], Q[1])) == C(Q[0], Q[1])
    assert g1(Q[0], D2) == C()


def test_gn_examples():
    assert gn(I0, D2, 2) == C(*Q)
    assert gn(I0, C(I0), 1) == C()
    with pytest.raises(ValueError):
        gn(I0, D2, 0)


@given(intervals(4), collections(6))
def test_gn_one_is_g1_and_members_disjoint_inside(K, E):
    assert gn(K, E, 1) == g1(K, E)
    for n in (1, 2, 3):
        G = list(gn(K, E, n))
        assert all(contains(K, J) and J != K for J in G)
        assert all(disjoint(a, b) for a, b in itertools.combinations(G, 2))


@given(collections(6))
def test_g1_all_agrees_with_g1(E):
    table = g1_all(E)
    for K in E:
        assert IntervalCollection(table[K]) == g1(K, E)


def test_carleson_examples():
    assert carleson_constant(C(I0)) == 1
    assert carleson_constant(C(I0, L0, Q[0])) == DyadicRational(7, 2)
    assert carleson_constant(D2) == 3
    with pytest.raises(ValueError):
        carleson_constant(C())


@given(collections(6))
def test_carleson_constant_is_the_sup_brute_force(E):
    const = carleson_constant(E)
    for I in E:
        total = sum((J.measure for J in E if contains(I, J)), DyadicRational(0))
        assert const >= total / I.measure
        assert carleson_sums(E)[I] == total / I.measure


@given(collections(6))
def test_partition_identity(B):
    for I0_ in B:
        total = DyadicRational(0)
        for K in B:
            if contains(I0_, K):
                total += K.measure - cover_measure(g1(K, B))
        assert total == I0_.measure


def test_partition_identity_500_random():
    rnd = random.Random(7)
    pool = all_intervals(6)
    for _ in range(500):
        B = set(rnd.sample(pool, rnd.randint(1, 25)))
        table = g1_all(B)
        for top in B:
            total = sum((K.measure - cover_measure(table[K]) for K in B if contains(top, K)),
                        DyadicRational(0))
            assert total == top.measure


def test_is_block_examples():
    assert is_block(C(I0, L0), D2)
    assert not is_block(C(I0, Q[0]), D2)
    assert is_block(C(Q[3]), C(Q[3], I0))
    assert not is_block(C(L0, R0), D2)
    with pytest.raises(ValueError):
        is_block(C(I0), C(L0))


def test_condensation_examples():
    assert condensation_score(D2, 1) == (I0, 1)
    assert condensation_score(C(I0), 1) == (I0, 0)
    assert condensation_score(C(I0, Q[0]), 1) == (I0, DyadicRational(1, 2))
    with pytest.raises(ValueError):
        condensation_score(C(), 1)


def test_condensation_tie_break_prefers_shallow_then_left():
    # both level-1 intervals have a child below, score 1/2 each; [0,1) is absent
    E = C(L0, R0, Interval(2, 0), Interval(2, 2))
    assert condensation_score(E, 1) == (L0, DyadicRational(1, 1))
