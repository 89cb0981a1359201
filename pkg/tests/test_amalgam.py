import pytest

from ascentlab.foundations import FULL_SET, OMEGA, Ordinal
from ascentlab.amalgam import (
    ChainDescriptor, HypothesisViolated, NotUniformTail, amalgamate,
)
from ascentlab.ascent import supp
from ascentlab.conditions import S_X, check_condition, leq_s
from ascentlab.fixtures import uniform_chain
from ascentlab.nodes import BlockWord, Ramp, SymNode, const_node
from ascentlab.trees import tree_contains, vanishing_levels


def test_uniform_fixture_amalgam():
    ch = uniform_chain(3, Ordinal(1, 2))
    out, z = amalgamate(ch)
    assert out.eta == OMEGA
    assert out.tree.height == Ordinal(1, 1)
    # the union family is tau -> constant-2tau of domain omega
    for tau in (0, 1, 3):
        assert out.top.at(tau) == const_node(2 * tau, OMEGA)
    # z union on (omega, omega+2) = {omega+1}
    key = Ordinal(1, 1)
    assert z.in_domain(key)
    v = z.at(key)
    assert v.dom == OMEGA
    rep = check_condition(out, S_X)
    assert rep.ok, rep.violations
    assert vanishing_levels(out.tree).levels == frozenset({OMEGA})


def test_amalgam_extends_members_with_full_support():
    ch = uniform_chain(4, Ordinal(1, 2))
    out, _ = amalgamate(ch)
    for m in ch.members:
        assert leq_s(out, m.cond)
        assert supp(m.cond.top, out.top) == FULL_SET


def test_amalgam_delta_gamma_plus_one_has_empty_zmap():
    ch = uniform_chain(3, Ordinal(1, 1))
    out, z = amalgamate(ch)
    assert not z.entries
    # the vanishing branch is still recorded
    cat = out.tree.catalog_at(OMEGA)
    assert [s.tag for s in cat.singles if not s.admitted] == ["y"]
    assert vanishing_levels(out.tree).levels == frozenset({OMEGA})


def test_membership_characterization():
    ch = uniform_chain(3, Ordinal(1, 2))
    out, z = amalgamate(ch)
    # grafts of lower nodes onto admitted branches are members
    x = SymNode((), (9, 9))
    b = out.top.at(2)
    from ascentlab.nodes import graft
    assert tree_contains(out.tree, graft(x, b))
    assert tree_contains(out.tree, graft(x, z.at(Ordinal(1, 1))))
    # the skipped z-union is outside, even grafted
    cat = out.tree.catalog_at(OMEGA)
    y = next(s.node for s in cat.singles if not s.admitted)
    assert not tree_contains(out.tree, y)
    assert not tree_contains(out.tree, graft(x, y))


def test_chain_without_tail_rejected():
    ch = uniform_chain(3, Ordinal(1, 2))
    with pytest.raises(NotUniformTail):
        amalgamate(ChainDescriptor(ch.members, None, ch.gamma, ch.delta))


def test_bad_z_bullet_rejected():
    ch = uniform_chain(2, Ordinal(1, 2))
    # corrupt a z value: make it eventually equal to the top family at 0
    m = ch.members[1]
    zero_node = m.cond.top.at(0)
    entries = dict(m.z.entries)
    entries[Ordinal(1, 1)] = zero_node
    from ascentlab.amalgam import ChainMember, ZMap
    corrupted = ChainMember(m.beta, m.cond,
                            ZMap.make(m.z.lo, m.z.hi, m.z.closed_hi, m.z.cells, entries))
    members = (ch.members[0], corrupted)
    with pytest.raises(HypothesisViolated) as e:
        amalgamate(ChainDescriptor(members, ch.tail, ch.gamma, ch.delta))
    assert "z" in e.value.bullet


def test_closed_delta_interval():
    ch = uniform_chain(3, Ordinal(1, 1), closed_delta=True)
    out, z = amalgamate(ch)
    assert z.in_domain(Ordinal(1, 1))
    assert check_condition(out, S_X).ok
