"""Streamlined trees with finitely-described levels.

Levels are intensional. Height 0 is the root {empty}; a successor level is
by default the full append level {t + <label> : t below, label natural} that
every constructor produces, or an explicit finite list of nodes (fixtures);
a limit level is characterized by its branch catalog: the level's members
are exactly the grafts x*b of lower nodes onto admitted catalog branches.
Vanishing levels are read off the catalogs: a branch no admitted branch
matches eventually is a vanishing witness, and grafting it through any
lower node keeps it outside the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .foundations import OMEGA_NAT, Ordinal, ZERO
from .nodes import SymNode, entry_affine, eq_star_threshold, graft
from .ascent import Cell


class NoCatalog(ValueError):
    """A limit level below the tree height has no branch catalog."""


@dataclass(frozen=True, slots=True)
class CatalogFamily:
    """Indexed family of branch templates at a limit level."""

    cells: tuple[Cell, ...]
    admitted: bool = True


@dataclass(frozen=True, slots=True)
class CatalogSingle:
    """One explicitly named branch; `tag` records its provenance."""

    tag: str
    node: SymNode
    admitted: bool = True


@dataclass(frozen=True, slots=True)
class BranchCatalog:
    families: tuple[CatalogFamily, ...] = ()
    singles: tuple[CatalogSingle, ...] = ()

    def has_admitted(self) -> bool:
        return any(f.admitted for f in self.families) or any(s.admitted for s in self.singles)

    def non_admitted(self) -> list[CatalogSingle]:
        return [s for s in self.singles if not s.admitted]


@dataclass(frozen=True, slots=True)
class SymTree:
    """Tree of some height <= omega*W + n, with sparse level overrides."""

    height: Ordinal
    explicit: tuple[tuple[Ordinal, tuple[SymNode, ...]], ...] = ()
    catalogs: tuple[tuple[Ordinal, BranchCatalog], ...] = ()

    @staticmethod
    def make(height: Ordinal, explicit=(), catalogs=()) -> "SymTree":
        explicit = tuple(sorted(
            (explicit.items() if isinstance(explicit, dict) else explicit)))
        catalogs = tuple(sorted(
            (catalogs.items() if isinstance(catalogs, dict) else catalogs)))
        for h, _ in explicit:
            if h.is_limit or h.is_zero:
                raise ValueError("explicit levels only at successor heights")
        for h, _ in catalogs:
            if not h.is_limit:
                raise ValueError("catalogs only at limit heights")
        return SymTree(height, explicit, catalogs)

    def explicit_at(self, beta: Ordinal) -> Optional[tuple[SymNode, ...]]:
        for h, nodes in self.explicit:
            if h == beta:
                return nodes
        return None

    def catalog_at(self, lam: Ordinal) -> BranchCatalog:
        for h, cat in self.catalogs:
            if h == lam:
                return cat
        raise NoCatalog(f"limit level {lam} has no branch catalog")

    def level_kind(self, beta: Ordinal) -> str:
        if beta >= self.height:
            raise ValueError(f"level {beta} at or above height {self.height}")
        if beta.is_zero:
            return "root"
        if beta.is_limit:
            return "limit"
        return "explicit" if self.explicit_at(beta) is not None else "appends"

    def limit_levels(self) -> list[Ordinal]:
        return [Ordinal(w, 0) for w in range(1, self.height.w + 1)
                if Ordinal(w, 0) < self.height]

    def probe_heights(self) -> list[Ordinal]:
        """Heights whose membership determines all others: the non-append
        levels plus one height above the deepest one in each block."""
        special = [ZERO] + [h for h, _ in self.explicit] + [h for h, _ in self.catalogs]
        out = set(special)
        for w in range(self.height.w + 1):
            tops = [h.n for h in special if h.w == w]
            nxt = Ordinal(w, (max(tops) if tops else 0) + 1)
            if nxt < self.height:
                out.add(nxt)
        return sorted(out)

    def level_size(self, beta: Ordinal):
        kind = self.level_kind(beta)
        if kind == "root":
            return 1
        if kind == "explicit":
            return len(self.explicit_at(beta))
        if kind == "appends":
            below = self.level_size(beta.pred())
            return OMEGA_NAT if below else 0
        return OMEGA_NAT if self.catalog_at(beta).has_admitted() else 0


ROOT_TREE = SymTree.make(Ordinal(0, 1))


def _family_match_positions(s: SymNode, tmpl: SymNode):
    """Positions m with s =* tmpl(m), for a limit-domain concrete s.

    Eventual equality at a limit domain depends only on the top block, so
    the answer is 'all', a single position, or none (empty set).
    """
    w = s.dom.w - 1
    ws, wt = s.blocks[w], tmpl.blocks[w]
    base = max(len(ws.prefix), len(wt.prefix))
    span = math.lcm(len(ws.tail), len(wt.tail))
    state: object = "all"
    for j in range(base, base + span):
        es = ws.eval(j)
        a, b = entry_affine(wt.eval(j))
        if a == 0:
            if es != b:
                return set()
        else:
            if (es - b) % a != 0 or (es - b) // a < 0:
                return set()
            m0 = (es - b) // a
            if state == "all":
                state = {m0}
            elif m0 not in state:
                return set()
    return state


def _match_admitted(s: SymNode, cat: BranchCatalog) -> Optional[tuple[SymNode, Ordinal]]:
    """An admitted catalog branch eventually equal to s, with the agreement
    threshold, or None."""
    for single in cat.singles:
        if not single.admitted:
            continue
        thr = eq_star_threshold(s, single.node)
        if thr is not None:
            return single.node, thr
    for fam in cat.families:
        if not fam.admitted:
            continue
        for cell in fam.cells:
            positions = _family_match_positions(s, cell.template)
            if positions == "all":
                # instances share the top block; instance 0 realizes the match
                positions = {0}
            for m in positions:
                inst = cell.template.instantiate(m)
                thr = eq_star_threshold(s, inst)
                if thr is not None:
                    return inst, thr
    return None


def tree_contains(tree: SymTree, s: SymNode) -> bool:
    """Exact membership test against the level representations."""
    if not s.is_concrete():
        raise ValueError("membership is for concrete nodes")
    if s.dom >= tree.height:
        return False
    return _level_contains(tree, s)


def family_in_tree(tree: SymTree, cells, exceptions) -> bool:
    """Membership of every member of a templated family.

    Levels between the probe anchors are full append levels, so a member
    sits in the tree iff its restriction to the deepest anchor below it
    does; when that restriction is template-uniform (no ramps below the
    anchor) one check covers the whole cell, and otherwise the anchored
    entries are affine in the position, so agreement of finitely many
    instances decides the rest."""
    for _, v in exceptions:
        if not tree_contains(tree, v):
            return False
    for c in cells:
        probes = [h for h in tree.probe_heights() if h < c.template.dom]
        anchor = max(probes) if probes else ZERO
        base = c.template.restrict(anchor)
        if base.is_concrete():
            if not tree_contains(tree, base):
                return False
            continue
        for m in (0, 1, 2, 7):
            if not tree_contains(tree, c.at(c.ap.member(m))):
                return False
    return True


def _level_contains(tree: SymTree, s: SymNode) -> bool:
    d = s.dom
    if d.is_zero:
        return True
    if d.is_limit:
        match = _match_admitted(s, tree.catalog_at(d))
        if match is None:
            return False
        _, thr = match
        return _level_contains(tree, s.restrict(thr))
    nodes = tree.explicit_at(d)
    if nodes is not None:
        return s in nodes
    return _level_contains(tree, s.restrict(d.pred()))


@dataclass(frozen=True, slots=True)
class StructReport:
    downward_closed: bool
    normal: bool
    uniformly_homogeneous: bool
    successor_height: bool
    level_sizes: tuple[tuple[Ordinal, object], ...]
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return (self.downward_closed and self.normal
                and self.uniformly_homogeneous and self.successor_height)


def _explicit_below_finite(tree: SymTree, beta: Ordinal) -> Optional[list[SymNode]]:
    """All nodes strictly below beta when that set is finite, else None."""
    from .nodes import EMPTY_NODE
    if beta.w > 0:
        return None
    out = [EMPTY_NODE]
    for n in range(1, beta.n):
        h = Ordinal(0, n)
        nodes = tree.explicit_at(h)
        if nodes is None:
            return None
        out.extend(nodes)
    return out


def check_tree(tree: SymTree) -> StructReport:
    """Structural report: downward closure, normality, uniform homogeneity,
    successor height, per-level sizes at the probe heights."""
    notes: list[str] = []
    down = True
    normal = True
    homog = True

    probes = tree.probe_heights()

    # downward closure and per-kind checks
    for beta in probes:
        kind = tree.level_kind(beta)
        if kind == "explicit":
            nodes = tree.explicit_at(beta)
            for s in nodes:
                if s.dom != beta:
                    down = False
                    notes.append(f"node of height {s.dom} listed at level {beta}")
                    continue
                for alpha in [h for h in probes if h < beta]:
                    if not _level_contains(tree, s.restrict(alpha)):
                        down = False
                        notes.append(f"restriction of a level-{beta} node missing at {alpha}")
        elif kind == "limit":
            cat = tree.catalog_at(beta)
            if not cat.has_admitted():
                normal = False
                notes.append(f"limit level {beta} has no admitted branch")
            for single in cat.singles:
                if single.node.dom != beta:
                    down = False
                    notes.append(f"catalog branch {single.tag} has wrong domain")
            for alpha in [h for h in probes if h < beta]:
                restricted_cells = [Cell(c.ap, c.template.restrict(alpha))
                                    for f in cat.families if f.admitted for c in f.cells]
                restricted_singles = [(0, s.node.restrict(alpha))
                                      for s in cat.singles if s.admitted]
                if not family_in_tree(tree, restricted_cells, restricted_singles):
                    down = False
                    notes.append(f"branch restriction missing at {alpha}")

    # normality: upward extension into every explicit level; other kinds are
    # extension-complete by construction
    for beta, nodes in tree.explicit:
        below = _explicit_below_finite(tree, beta)
        if below is None:
            normal = False
            notes.append(f"explicit level {beta} above an infinite level")
            continue
        for x in below:
            if not any(x == t.restrict(x.dom) for t in nodes):
                normal = False
                notes.append(f"node {x} has no extension to level {beta}")

    # uniform homogeneity: appends and catalog levels are closed under
    # grafting structurally; explicit levels are checked by enumeration
    for beta, nodes in tree.explicit:
        below = _explicit_below_finite(tree, beta)
        if below is None:
            homog = False
            notes.append(f"explicit level {beta} cannot absorb grafts from an infinite level")
            continue
        for s in below + list(nodes):
            for t in nodes:
                if graft(s, t) not in nodes:
                    homog = False
                    notes.append(f"graft of {s} over {t} escapes level {beta}")

    sizes = tuple((h, tree.level_size(h)) for h in probes)
    return StructReport(down, normal, homog, tree.height.is_successor, sizes, tuple(notes))


@dataclass(frozen=True, slots=True)
class VanishReport:
    levels: frozenset[Ordinal]
    closed: bool
    top_limit_in: Optional[bool]

    def __contains__(self, lam: Ordinal) -> bool:
        return lam in self.levels


def vanishing_levels(tree: SymTree, mode: str = "full") -> VanishReport:
    """Limit levels at which a vanishing branch exists (homogeneous mode) or
    every lower node rides one (full mode, via grafted catalog branches).

    The homogeneous reading presupposes a uniformly homogeneous tree (the
    caller's obligation, checked by check_tree); the full mode quantifies
    over the grafted catalog branches directly and needs no such hypothesis.
    """
    if mode not in ("full", "homogeneous"):
        raise ValueError(f"unknown mode {mode!r}")
    levels: set[Ordinal] = set()
    eta = tree.height.pred() if tree.height.is_successor else tree.height
    for lam in tree.limit_levels():
        cat = tree.catalog_at(lam)
        if mode == "homogeneous":
            if cat.non_admitted():
                levels.add(lam)
            continue
        # full mode: a non-admitted branch no admitted branch matches
        # eventually stays outside the level under every graft x*b, and
        # every lower x rides the branch of x*b
        for single in cat.non_admitted():
            if _match_admitted(single.node, cat) is None:
                levels.add(lam)
                break
    # V(T) holds only limit ordinals and there are at most W of those below
    # the height bound, so every nonempty subset has a maximum and each sup
    # of members is itself a member: closedness cannot fail at this scale.
    closed = all(max(x for x in levels if x <= lam) in levels
                 for lam in levels)
    top_in = (tree.height.pred() in levels) if tree.height.is_successor and \
        tree.height.pred().is_limit else None
    return VanishReport(frozenset(levels), closed, top_in)
