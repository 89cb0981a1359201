"""Conditions of the three posets: a successor-height tree paired with an
ascent path, validation per variant, the end-extension order, and the
one-step constructors.

Paths below a limit height carry infinitely many levels; those are stored
as an explicit prefix plus a uniform tail rule (each step appends one fixed
entry per cell). Validation is exact at every explicitly represented height
and at the rule generators; between tail levels comparability propagates as
a ⊆-chain because appending never edits existing coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .foundations import (
    DEFAULT_X, FULL_SET, OMEGA_NAT, Ordinal, UPSet, XSequence, ZERO,
    filter_classify, is_cobounded,
)
from .ascent import (
    AppendScheme, AscentLevel, AscentPath, TailRule, graft_levels, me_cross,
    me_family, me_set_concrete, paths_agree_below, root_level,
    standard_append, supp,
)
from .nodes import SymNode, delta, entry_affine, mk_entry
from .trees import ROOT_TREE, SymTree, check_tree, vanishing_levels

S_X, S_F, S_THETA = "sx", "sf", "stheta"
VARIANTS = (S_X, S_F, S_THETA)


class InvalidBeta(ValueError):
    """one-step parameter beta above the condition's top height."""


class WrongVariant(ValueError):
    """Operation applied to a condition of an unsupported variant."""


@dataclass(frozen=True, slots=True)
class Condition:
    """A pair (tree, ascent path) in one of the posets, tagged by variant."""

    tree: SymTree
    path: AscentPath
    variant: str = S_X
    x: XSequence = DEFAULT_X

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise WrongVariant(f"unknown variant {self.variant!r}")

    @property
    def eta(self) -> Ordinal:
        return self.tree.height.pred()

    def level(self, alpha: Ordinal) -> AscentLevel:
        return self.path.level_at(alpha)

    @property
    def top(self) -> AscentLevel:
        return self.path.level_at(self.eta)

    def with_variant(self, variant: str) -> "Condition":
        return Condition(self.tree, self.path, variant, self.x)

    def probe_heights(self) -> list[Ordinal]:
        return self.path.probe_heights(self.eta)


def root_condition(variant: str = S_X, x: XSequence = DEFAULT_X) -> Condition:
    return Condition(ROOT_TREE, AscentPath.make({ZERO: root_level()}), variant, x)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ConditionReport:
    """Clause-by-clause verdicts; ids C1..C4 name the artifact's condition
    clauses (structure, ascent-path, vanishing, exclusivity-filter)."""

    variant: str
    clauses: tuple[tuple[str, bool], ...]
    violations: tuple[str, ...]
    checked_heights: tuple[Ordinal, ...]

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.clauses)

    def clause(self, cid: str) -> bool:
        return dict(self.clauses)[cid]


def _supp_ok(variant: str, s: UPSet, x: XSequence) -> bool:
    if variant == S_THETA:
        return is_cobounded(s)
    return filter_classify(s, x).in_filter


def _append_fibers_ok(level: AscentLevel, x: XSequence) -> tuple[bool, str]:
    """Clause-4 piece at the appended coordinate of a successor-height level:
    a cell whose appended labels are constant is exclusivity-bad against one
    label on the whole cell, so its complement must be a filter set."""
    eps = level.height.pred()
    for c in level.cells:
        a, _ = entry_affine(c.template.entry_at(eps))
        if a == 0 and not filter_classify(c.ap.upset().complement(), x).in_filter:
            return False, f"constant append labels on {c.ap}"
    return True, ""


def check_condition(cond: Condition, variant: Optional[str] = None) -> ConditionReport:
    """Variant-dispatched validation; the report carries all violations."""
    variant = variant or cond.variant
    x = cond.x
    bad: list[str] = []
    clauses: dict[str, bool] = {}

    # C1: successor-height normal uniformly homogeneous tree, path totality
    tree_rep = check_tree(cond.tree)
    c1 = tree_rep.ok
    if not tree_rep.successor_height:
        bad.append("clause C1 (structure): tree height is not a successor")
    if not (tree_rep.downward_closed and tree_rep.normal and tree_rep.uniformly_homogeneous):
        bad.append("clause C1 (structure): " + "; ".join(tree_rep.notes[:3]))
    if not cond.path.covers(cond.eta):
        c1 = False
        bad.append("clause C1 (structure): ascent path does not cover all heights")
    probes = cond.probe_heights()
    for alpha in probes:
        if cond.level(alpha).height != alpha:
            c1 = False
            bad.append(f"clause C1 (structure): level at {alpha} has wrong height")
    base = cond.level(ZERO) if cond.path.has(ZERO) else None
    if base is None or any(c.template.dom != ZERO for c in base.cells):
        c1 = False
        bad.append("clause C1 (structure): level 0 must be the constant empty family")
    clauses["C1"] = c1

    # C2: ascent path of the variant's kind
    c2 = True
    for i, a in enumerate(probes):
        for b in probes[i + 1:]:
            s = supp(cond.level(a), cond.level(b))
            if not _supp_ok(variant, s, x):
                c2 = False
                bad.append(f"clause C2 (ascent-path): supp({a},{b}) = {s} unacceptable")
    if variant in (S_X, S_F):
        for alpha in probes:
            if alpha.is_zero:
                continue
            rep = me_family(cond.level(alpha))
            if not rep.ok:
                c2 = False
                bad.append(f"clause C2 (ascent-path): level {alpha} not mutually exclusive: {rep.detail}")
    # tail levels are pure appends of each other by construction, so the
    # pairwise checks at the sampled cycle extend to the whole tail; what
    # needs checking is that the tail base joins the explicit prefix
    for w, rule in cond.path.tails:
        prev = Ordinal(w, rule.start - 1) if rule.start else None
        if prev is not None and cond.path.has(prev) and prev <= cond.eta:
            below = cond.path.level_at(prev)
            s = supp(below, rule.base)
            if not _supp_ok(variant, s, x):
                c2 = False
                bad.append(f"clause C2 (ascent-path): tail base for block {w} breaks the chain")
    clauses["C2"] = c2

    if variant == S_THETA:
        return ConditionReport(variant, tuple(clauses.items()), tuple(bad), tuple(probes))

    if variant == S_F:
        return ConditionReport(variant, tuple(clauses.items()), tuple(bad), tuple(probes))

    # C3: vanishing levels closed, top limit level vanishing
    van = vanishing_levels(cond.tree, "full")
    c3 = van.closed
    if cond.eta.is_limit and van.top_limit_in is not True:
        c3 = False
        bad.append("clause C3 (vanishing): top limit level is not vanishing")
    if not van.closed:
        bad.append("clause C3 (vanishing): vanishing set is not closed")
    clauses["C3"] = c3

    # C4: for every t in a nonzero level, {tau : t ME f(level)(tau)} in F
    c4 = True
    for alpha in probes:
        if alpha.is_zero:
            continue
        lvl = cond.level(alpha)
        kind = cond.tree.level_kind(alpha) if alpha < cond.tree.height else "appends"
        if kind == "appends":
            ok, why = _append_fibers_ok(lvl, x)
            if not ok:
                c4 = False
                bad.append(f"clause C4 (exclusivity-filter): level {alpha}: {why}")
            # lower-coordinate exclusivity transports from the levels below
            # through the supp chain (C2) and the lower clause instances
        elif kind == "explicit":
            for i, t in enumerate(cond.tree.explicit_at(alpha)):
                ms = me_set_concrete(t, lvl)
                if not filter_classify(ms, x).in_filter:
                    c4 = False
                    bad.append(f"clause C4 (exclusivity-filter): fails at level {alpha}, node {i}")
        elif kind == "limit":
            cat = cond.tree.catalog_at(alpha)
            for i, single in enumerate(cat.singles):
                if not single.admitted:
                    continue
                ms = me_set_concrete(single.node, lvl)
                if not filter_classify(ms, x).in_filter:
                    c4 = False
                    bad.append(f"clause C4 (exclusivity-filter): fails at level {alpha}, branch {single.tag}")
            for i, fam in enumerate(cat.families):
                if not fam.admitted:
                    continue
                probe = AscentLevel(alpha, fam.cells, ())
                rep = me_cross(probe, lvl)
                if not rep.ok(x):
                    c4 = False
                    bad.append(f"clause C4 (exclusivity-filter): fails at level {alpha}, family {i}")
    clauses["C4"] = c4

    return ConditionReport(variant, tuple(clauses.items()), tuple(bad), tuple(probes))


def leq_s(lower: Condition, upper: Condition) -> bool:
    """lower extends upper: end-extension on both coordinates."""
    if lower.variant != upper.variant:
        raise WrongVariant("conditions come from different posets")
    if lower.tree is upper.tree and lower.path is upper.path:
        return True
    if lower.tree.height < upper.tree.height:
        return False
    eta = upper.eta
    # tree coordinate: levels at heights <= eta must coincide
    low_exp = {h: ns for h, ns in lower.tree.explicit if h <= eta}
    up_exp = {h: ns for h, ns in upper.tree.explicit if h <= eta}
    if low_exp != up_exp:
        return False
    low_cat = {h: c for h, c in lower.tree.catalogs if h <= eta}
    up_cat = {h: c for h, c in upper.tree.catalogs if h <= eta}
    if low_cat != up_cat:
        return False
    return paths_agree_below(lower.path, upper.path, eta)


def eta_nu(cond: Condition) -> tuple[Ordinal, object]:
    """Top height and the size of the top level modulo eventual equality."""
    eta = cond.eta
    if eta.is_zero:
        return eta, 1
    kind = cond.tree.level_kind(eta)
    if kind == "appends":
        return eta, OMEGA_NAT
    if kind == "explicit":
        last = eta.pred()
        return eta, len({t.eval_at(last) for t in cond.tree.explicit_at(eta)})
    cat = cond.tree.catalog_at(eta)
    if any(f.admitted for f in cat.families):
        return eta, OMEGA_NAT
    reps: list[SymNode] = []
    from .nodes import eq_star
    for s in cat.singles:
        if s.admitted and not any(eq_star(s.node, r) for r in reps):
            reps.append(s.node)
    return eta, len(reps)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def raw_append(level: AscentLevel) -> AppendScheme:
    """Appended label equal to the index itself (the naive theta-poset demo)."""
    entries = [mk_entry(c.ap.step, c.ap.start) for c in level.cells]
    labels = {k: k for k, _ in level.exceptions}
    return AppendScheme(tuple(entries), labels)


def one_step_with(cond: Condition, below: AscentLevel, scheme: AppendScheme,
                  verify: bool = True) -> Condition:
    """Shared one-step core: new top = below-level plus appended labels; the
    new tree level is the full append level."""
    if below.height != cond.eta:
        raise ValueError("below-parts must live on the current top level")
    new_top = below.append_entries(scheme)
    tree = SymTree.make(cond.tree.height.succ(), cond.tree.explicit, cond.tree.catalogs)
    path = cond.path.with_level(cond.eta.succ(), new_top)
    out = Condition(tree, path, cond.variant, cond.x)
    if verify:
        if cond.variant in (S_X, S_F):
            rep = me_family(new_top)
            if not rep.ok:
                raise ValueError(f"one-step produced a non-exclusive family: {rep.detail}")
            ok, why = _append_fibers_ok(new_top, cond.x)
            if not ok:
                raise ValueError(f"one-step violates the exclusivity filter: {why}")
        s = supp(cond.top, new_top)
        if not _supp_ok(cond.variant, s, cond.x):
            raise ValueError("one-step lost comparability with the previous top")
    return out


def one_step_extension(cond: Condition, beta: Ordinal, nu: object = 0,
                       label_base: int = 0, verify: bool = True) -> Condition:
    """One more level: graft level beta over the top, append fresh even labels.

    Verifies the two support postconditions exactly: the old beta-top support
    is carried into the new top, and the beta support becomes everything.
    """
    if beta > cond.eta:
        raise InvalidBeta(f"beta {beta} above top {cond.eta}")
    if nu not in (0, OMEGA_NAT) and not (isinstance(nu, int) and nu >= 0):
        raise ValueError("nu must be a natural or omega")
    below = graft_levels(cond.level(beta), cond.top)
    out = one_step_with(cond, below, standard_append(below, shift=label_base), verify=verify)
    if verify:
        s_old = supp(cond.level(beta), cond.top)
        s_new = supp(cond.top, out.top)
        if not s_old.is_subset(s_new):
            raise ValueError("one-step lost the old support")
        if supp(cond.level(beta), out.top) != FULL_SET:
            raise ValueError("one-step beta support is not everything")
    return out


def make_bad_extension(cond: Condition) -> Condition:
    """The naive poset's defect: a top level whose first two members split
    exactly at the previous top, with raw index labels appended."""
    if cond.variant != S_THETA:
        raise WrongVariant("bad extensions live in the plain theta poset")
    alpha = cond.eta
    f_a = cond.level(alpha)
    below = AscentLevel.make(alpha, f_a.cells,
                             dict(f_a.exceptions) | {0: f_a.at(0), 1: f_a.at(0)})
    out = one_step_with(cond, below, raw_append(below), verify=False)
    beta = out.eta
    s = supp(f_a, out.top)
    if not is_cobounded(s):
        raise ValueError("bad extension must keep co-bounded support")
    if delta(out.top.at(0), out.top.at(1)) != alpha:
        raise ValueError("bad extension lost its splitting witness")
    return out
