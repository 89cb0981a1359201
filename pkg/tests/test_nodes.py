import random

import pytest

from ascentlab.foundations import BadHeight, Ordinal, ZERO, OMEGA
from ascentlab.nodes import (
    EMPTY_NODE, BlockWord, Ramp, SymNode, const_node, delta, eq_star,
    eq_star_threshold, eval_at, graft, mutually_exclusive, node, restrict,
)
from oracles import brute_delta, brute_eq_star, brute_me


def rand_node(rng: random.Random, max_blocks: int = 2) -> SymNode:
    blocks = []
    for _ in range(rng.randrange(0, max_blocks + 1)):
        pre = [rng.randrange(0, 6) for _ in range(rng.randrange(0, 4))]
        tl = [rng.randrange(0, 6) for _ in range(rng.randrange(1, 4))]
        blocks.append(BlockWord.make(pre, tl))
    final = tuple(rng.randrange(0, 6) for _ in range(rng.randrange(0, 5)))
    return SymNode(tuple(blocks), final)


# -- representation ----------------------------------------------------------

def test_blockword_canonical():
    assert BlockWord.make((), (3, 3)) == BlockWord.make((), (3,))
    assert BlockWord.make((1, 2), (2,)) == BlockWord.make((1,), (2,))
    w = BlockWord.make((7,), (1, 2))
    assert [w.eval(j) for j in range(5)] == [7, 1, 2, 1, 2]


def test_node_equality_is_extensional():
    a = SymNode((BlockWord.make((3,), (3,)),), ())
    b = const_node(3, OMEGA)
    assert a == b


def test_eval_and_domains():
    s = node(4, 5, 6)
    assert s.dom == Ordinal(0, 3)
    assert eval_at(s, Ordinal(0, 1)) == 5
    assert eval_at(const_node(3, OMEGA), Ordinal(0, 1000)) == 3
    s2 = SymNode((BlockWord.make((7,), (1, 2)),), ())
    assert eval_at(s2, Ordinal(0, 4)) == 2  # unrolls to 7,1,2,1,2,...
    with pytest.raises(BadHeight):
        eval_at(s, Ordinal(0, 3))


def test_restrict():
    assert restrict(node(4, 5, 6), Ordinal(0, 2)) == node(4, 5)
    s = node(1, 2)
    assert restrict(s, s.dom) == s
    c2 = const_node(3, Ordinal(2, 0))
    assert restrict(c2, OMEGA) == const_node(3, OMEGA)
    with pytest.raises(BadHeight):
        restrict(node(1), Ordinal(0, 2))


# -- delta -------------------------------------------------------------------

def test_delta_trivial():
    assert delta(EMPTY_NODE, node(5)) == ZERO
    assert delta(node(1, 2, 3), node(1, 2, 4)) == Ordinal(0, 2)


def test_delta_derived_window():
    s = const_node(7, OMEGA)
    t = SymNode((BlockWord.make((7, 7, 8), (7,)),), ())
    expected = brute_delta(s, t)  # frozen from the window oracle
    assert expected == Ordinal(0, 2)
    assert delta(s, t) == expected


def test_delta_initial_segment():
    s = node(1, 2)
    t = node(1, 2, 9)
    assert delta(s, t) == s.dom


# -- graft -------------------------------------------------------------------

def test_graft_trivial():
    assert graft(node(9), node(1, 2, 3)) == node(9, 2, 3)
    t = node(4, 4)
    assert graft(EMPTY_NODE, t) == t
    assert graft(node(1, 2, 3), node(0)) == node(1)


def test_graft_into_block():
    s = node(9, 9)
    t = const_node(3, OMEGA)
    g = graft(s, t)
    assert g.dom == OMEGA
    assert [g.eval_at(Ordinal(0, j)) for j in range(4)] == [9, 9, 3, 3]


def test_graft_left_idempotent():
    rng = random.Random(2)
    for _ in range(200):
        s, t = rand_node(rng), rand_node(rng)
        assert graft(s, graft(s, t)) == graft(s, t)


# -- eq_star -----------------------------------------------------------------

def test_eq_star_trivial():
    assert eq_star(node(1, 2), node(9, 2))
    assert not eq_star(node(1, 2), node(1, 3))
    assert eq_star(EMPTY_NODE, EMPTY_NODE)


def test_eq_star_derived():
    s = SymNode((BlockWord.make((0, 1), (5,)),), ())
    t = const_node(5, OMEGA)
    assert brute_eq_star(s, t)
    assert eq_star(s, t)
    assert eq_star_threshold(s, t) == Ordinal(0, 2)


def test_eq_star_equivalence_relation():
    rng = random.Random(4)
    nodes = [rand_node(rng) for _ in range(60)]
    doms = {}
    for s in nodes:
        doms.setdefault(s.dom, []).append(s)
    for group in doms.values():
        for s in group:
            assert eq_star(s, s)
            for t in group:
                assert eq_star(s, t) == eq_star(t, s)
                for u in group:
                    if eq_star(s, t) and eq_star(t, u):
                        assert eq_star(s, u)


# -- mutual exclusivity -------------------------------------------------------

def test_me_trivial():
    assert mutually_exclusive(node(1, 2), node(2, 1))
    assert not mutually_exclusive(node(1, 2), node(1, 9))
    assert mutually_exclusive(EMPTY_NODE, node(3, 4))


def test_me_vs_eq_star_on_restriction():
    # exclusive nodes with a shared successor-height restriction are not
    # eventually equal there
    s, t = node(1, 2, 3), node(2, 3, 4)
    assert mutually_exclusive(s, t)
    d = min(s.dom, t.dom)
    assert not eq_star(restrict(s, d), restrict(t, d))


# -- randomized agreement with the evaluation oracle --------------------------

def test_random_agreement_with_brute_force():
    rng = random.Random(6)
    for _ in range(1500):
        s, t = rand_node(rng), rand_node(rng)
        assert delta(s, t) == brute_delta(s, t), (s, t)
        assert mutually_exclusive(s, t) == brute_me(s, t), (s, t)
        if s.dom == t.dom:
            assert eq_star(s, t) == brute_eq_star(s, t), (s, t)


def test_ramp_template_instantiation():
    tmpl = SymNode((), (Ramp(2, 0), 7))
    assert tmpl.instantiate(3) == node(6, 7)
    assert not tmpl.is_concrete()
    with pytest.raises(ValueError):
        tmpl.eval_at(ZERO)


def test_reindex_composes():
    tmpl = SymNode((), (Ramp(2, 1),))
    # m := 3m' + 2 turns 2m+1 into 6m'+5
    assert tmpl.reindex(3, 2) == SymNode((), (Ramp(6, 5),))


from hypothesis import given, strategies as st

entry_st = st.integers(0, 5)
finite_node_st = st.lists(entry_st, max_size=5).map(lambda es: node(*es))


@given(finite_node_st, finite_node_st, finite_node_st)
def test_graft_laws(s, t, u):
    # grafting keeps s where defined and is idempotent on the left
    g = graft(s, t)
    assert g.dom == t.dom
    lo = min(s.dom, t.dom)
    for j in range(lo.n):
        assert g.eval_at(Ordinal(0, j)) == s.eval_at(Ordinal(0, j))
    assert graft(s, graft(s, t)) == graft(s, t)
    # mixing is associative once the domains are ordered (otherwise the
    # left grouping truncates s and the law genuinely fails)
    if s.dom <= t.dom <= u.dom:
        assert graft(graft(s, t), u) == graft(s, graft(t, u))


@given(finite_node_st, finite_node_st)
def test_delta_bounds(s, t):
    d = delta(s, t)
    lo = min(s.dom, t.dom)
    assert d <= lo
    is_initial = all(s.eval_at(Ordinal(0, j)) == t.eval_at(Ordinal(0, j))
                     for j in range(lo.n))
    assert (d == lo) == is_initial
