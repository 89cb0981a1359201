import random

import pytest
from hypothesis import given, strategies as st

from ascentlab.foundations import (
    DEFAULT_X, EVENS, ODDS, FULL_SET, EMPTY_SET, GT, LT, EQ,
    Ordinal, OrdinalBoundError, ProfileViolation, UPSet, XSequence,
    filter_classify, finite_set, is_cobounded, multiples, ord_compare,
    singleton, upset_algebra,
)
from oracles import brute_classify, brute_op, upset_window


def rand_upset(rng: random.Random) -> UPSet:
    p = rng.choice([1, 2, 3, 4, 6, 8, 12])
    t = rng.randrange(0, 12)
    residues = frozenset(r for r in range(p) if rng.random() < 0.5)
    low = frozenset(k for k in range(t) if rng.random() < 0.5)
    return UPSet.make(t, p, residues, low)


# -- ordinals ---------------------------------------------------------------

def test_ord_compare_examples():
    assert ord_compare(Ordinal(1, 0), Ordinal(0, 5)) == GT
    assert ord_compare(Ordinal(0, 3), Ordinal(0, 3)) == EQ
    assert ord_compare(Ordinal(1, 2), Ordinal(2, 0)) == LT


def test_ordinal_structure():
    assert Ordinal(1, 0).is_limit
    assert not Ordinal(1, 1).is_limit
    assert Ordinal(0, 0).succ() == Ordinal(0, 1)
    assert Ordinal(2, 5).pred() == Ordinal(2, 4)
    with pytest.raises(ValueError):
        Ordinal(1, 0).pred()


def test_ordinal_bound_rejected():
    with pytest.raises(OrdinalBoundError):
        Ordinal(4, 0)


# -- upset algebra ----------------------------------------------------------

def test_algebra_trivial_examples():
    assert upset_algebra("intersect", EVENS, multiples(3)) == multiples(6)
    assert upset_algebra("complement", EVENS) == ODDS


def test_difference_default_x_derived():
    # difference(X0, X1) on the default sequence; oracle: pointwise on [0, 256)
    x0, x1 = DEFAULT_X.entry(0), DEFAULT_X.entry(1)
    d = upset_algebra("difference", x0, x1)
    assert upset_window(d, 256) == brute_op("difference", x0, x1, 256)
    assert d.members(16) == [0, 2, 6, 10, 14]


def test_canonical_form_is_extensional():
    a = UPSet.make(7, 4, frozenset({0, 2}), frozenset({0, 2, 4, 6}))
    b = EVENS
    assert a == b
    assert UPSet.make(0, 8, frozenset({0, 2, 4, 6})) == EVENS


def test_algebra_agrees_with_brute_force():
    rng = random.Random(7)
    for _ in range(400):
        a, b = rand_upset(rng), rand_upset(rng)
        bound = 4 * (a.period * b.period) + a.threshold + b.threshold + 8
        for kind in ("union", "intersect", "difference"):
            got = upset_algebra(kind, a, b)
            assert upset_window(got, bound) == brute_op(kind, a, b, bound), (kind, a, b)
        got = upset_algebra("complement", a)
        assert upset_window(got, bound) == brute_op("complement", a, None, bound)


def test_rank_nth_roundtrip():
    rng = random.Random(3)
    for _ in range(100):
        a = rand_upset(rng)
        if a.is_finite:
            continue
        for n in range(20):
            k = a.nth(n)
            assert k in a
            assert a.rank(k) == n


def test_to_aps_partition():
    rng = random.Random(5)
    for _ in range(50):
        a = rand_upset(rng)
        aps, singles = a.to_aps()
        got = set(singles)
        for ap in aps:
            m = 0
            while ap.member(m) < 64:
                got.add(ap.member(m))
                m += 1
        assert {k for k in got if k < 64} == upset_window(a, 64)


def test_is_cobounded():
    assert is_cobounded(finite_set({0, 1, 2}).complement())
    assert not is_cobounded(EVENS)
    assert is_cobounded(FULL_SET)


# -- filter / ideal ---------------------------------------------------------

def test_filter_classify_examples():
    assert filter_classify(EVENS) == filter_classify(EVENS, DEFAULT_X)
    v = filter_classify(EVENS)
    assert v.kind == "in_filter" and v.witness == 1
    v = filter_classify(ODDS)
    assert v.kind == "in_ideal" and v.witness == 1
    v = filter_classify(multiples(3))
    assert v.kind == "neither"


def test_filter_witnesses_revalidate():
    rng = random.Random(11)
    for _ in range(300):
        y = rand_upset(rng)
        v = filter_classify(y)
        if v.in_filter:
            assert DEFAULT_X.entry(v.witness).is_subset(y)
        elif v.in_ideal:
            assert DEFAULT_X.entry(v.witness).disjoint(y)
        else:
            kind, _ = brute_classify(y, DEFAULT_X, 40, 2048)
            assert kind == "neither"


def test_filter_monotone():
    rng = random.Random(13)
    for _ in range(200):
        y = rand_upset(rng)
        z = y.union(rand_upset(rng))
        if filter_classify(y).in_filter:
            assert filter_classify(z).in_filter
        if filter_classify(z).in_ideal:
            assert filter_classify(y.intersect(z)).in_ideal


def test_filter_exclusive_exhaustive():
    rng = random.Random(17)
    for _ in range(200):
        y = rand_upset(rng)
        v = filter_classify(y)
        kind, _ = brute_classify(y, DEFAULT_X, 64, 4096)
        assert v.kind == kind


# -- X sequence profiles ----------------------------------------------------

def test_default_x_passes_both_profiles():
    DEFAULT_X.validate("s3")
    DEFAULT_X.validate("s4")


def test_bad_profiles_rejected():
    with pytest.raises(ProfileViolation):
        XSequence(FULL_SET, 4).validate()  # co-bounded X0
    with pytest.raises(ProfileViolation):
        XSequence(ODDS, 4).validate()  # X1 not inside X0
    with pytest.raises(ProfileViolation):
        XSequence(multiples(4), 4).validate("s4")  # X0 == X1 up to a tail


def test_escape_witnesses():
    for k in (0, 3, 4, 17, 40):
        n = DEFAULT_X.escape_index(k)
        assert k not in DEFAULT_X.entry(n)
    n = DEFAULT_X.escape_finite([4, 8, 40])
    for k in (4, 8, 40):
        assert k not in DEFAULT_X.entry(n)


@given(st.integers(0, 200), st.integers(0, 200))
def test_upset_singleton_membership(a, b):
    s = singleton(a)
    assert (b in s) == (a == b)
    assert s.union(singleton(b)) == finite_set({a, b})


@given(st.integers(0, 6).flatmap(lambda _: st.tuples(
    st.integers(0, 10), st.sampled_from([1, 2, 3, 4, 6, 8]),
    st.sets(st.integers(0, 7)), st.sets(st.integers(0, 9)))))
def test_upset_algebra_laws(parts):
    t, p, residues, low = parts
    a = UPSet.make(t, p, frozenset(r % p for r in residues), frozenset(k for k in low if k < t))
    b = a.complement()
    assert a.union(b) == FULL_SET
    assert a.intersect(b) == EMPTY_SET
    assert a.union(a) == a and a.intersect(a) == a
    assert a.complement().complement() == a
    assert a.difference(b) == a
