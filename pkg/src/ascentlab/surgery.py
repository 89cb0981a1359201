"""Branch surgery: extending a limit-length path by grafted cofinal
branches, deliberately omitting one so the new top level vanishes.

The derived branches b_n live over the head set of the sequence; a bijection
pi of omega onto that set minus the omitted index, fixing the deeper filter
sets pointwise, reindexes them into the new top ascent level. The new tree
level consists of the grafts onto the kept branches, so the omitted branch
witnesses vanishing and the construction adds exactly one vanishing level.
"""

from __future__ import annotations

from typing import Optional

from .foundations import FULL_SET, ProfileViolation, UPSet, XSequence
from .ascent import (
    AscentLevel, PiecewiseMap, identity_map, level_reindex, me_family,
    order_iso, restrict_level_domain, restrict_map,
)
from .aposet import NotLinked, PathDescriptor, derive_branches
from .conditions import Condition, S_X, check_condition, leq_s
from .trees import (
    BranchCatalog, CatalogFamily, CatalogSingle, SymTree, tree_contains,
    vanishing_levels,
)


class BadPi(ValueError):
    """The reindexing map is not a bijection onto the kept head set fixing
    the deeper filter set."""


def canonical_pi(x: XSequence, n0: int) -> PiecewiseMap:
    """Identity on X_1, order isomorphism of the rest onto the kept part of
    X_0; deterministic."""
    x1 = x.entry(1)
    target = x.x0.difference(x1).difference(_single(n0))
    iso = order_iso(x1.complement(), target)
    ident = identity_map(x1)
    return PiecewiseMap(ident.pieces + iso.pieces, ident.points + iso.points)


def _single(k: int) -> UPSet:
    from .foundations import singleton
    return singleton(k)


def validate_pi(pi: PiecewiseMap, x: XSequence, n0: int) -> None:
    if not pi.is_injective():
        raise BadPi("map is not injective")
    if pi.domain() != FULL_SET:
        raise BadPi("map must be defined on every index")
    if pi.image() != x.x0.difference(_single(n0)):
        raise BadPi("image must be the head set minus the omitted index")
    x1 = x.entry(1)
    fixed = restrict_map(pi, x1)
    for p in fixed.pieces:
        if p.a != p.ap.step or p.b != p.ap.start:
            raise BadPi("map moves a point of the deeper filter set")
    for k, v in fixed.points:
        if k != v:
            raise BadPi("map moves a point of the deeper filter set")


def branch_surgery(path: PathDescriptor, n0: int,
                   pi: Optional[PiecewiseMap] = None) -> Condition:
    """The new condition of limit-plus-one height; every stated consequence
    is re-verified before returning."""
    x = path.base.x
    x.validate("s4")
    if n0 not in x.x0 or n0 in x.entry(1):
        raise ProfileViolation(f"omitted index {n0} must come from the head set "
                               "outside the deeper filter set")
    if path.rule is None:
        raise NotLinked("surgery needs a path cofinal below a limit")
    if pi is None:
        pi = canonical_pi(x, n0)
    validate_pi(pi, x, n0)

    fam = derive_branches(path, "all", 0)
    lam = fam.height
    if not x.x0.is_subset(fam.coherent):
        raise NotLinked("head-set branches are not coherent along the path")

    cells, exc = level_reindex(fam.level, pi)
    top = AscentLevel.make(lam, cells, exc)
    kept_cells, kept_exc = restrict_level_domain(fam.level, x.x0.difference(_single(n0)))
    catalog = BranchCatalog(
        (CatalogFamily(tuple(kept_cells), admitted=True),),
        tuple(CatalogSingle(f"b:{k}", v, admitted=True) for k, v in kept_exc)
        + (CatalogSingle(f"b:{n0}", fam.branch(n0), admitted=False),))

    base = path.base
    tree = SymTree.make(lam.succ(), base.tree.explicit,
                        dict(base.tree.catalogs) | {lam: catalog})
    from .conditions import AscentPath
    levels = dict(base.path.levels)
    levels[lam] = top
    tails = dict(base.path.tails) | {base.eta.w: path.rule}
    out = Condition(tree, AscentPath.make(levels, tails), S_X, x)

    # consequences, re-verified
    merep = me_family(AscentLevel(lam, tuple(kept_cells), tuple(kept_exc)))
    if not merep.ok:
        raise AssertionError(f"kept branches are not mutually exclusive: {merep.detail}")
    if tree_contains(out.tree, fam.branch(n0)):
        raise AssertionError("the omitted branch is in the tree")
    van = vanishing_levels(out.tree, "full")
    expected = vanishing_levels(base.tree, "full").levels | {lam}
    if van.levels != expected:
        raise AssertionError(f"vanishing levels {set(van.levels)} != {set(expected)}")
    if not leq_s(out, base):
        raise AssertionError("surgery does not extend the path")
    rep = check_condition(out, S_X)
    if not rep.ok:
        raise AssertionError("surgery output invalid: " + "; ".join(rep.violations))
    return out
