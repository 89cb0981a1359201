"""Limit-stage amalgamation of described decreasing chains.

A chain is an explicit prefix of (stage, condition, z-map) members plus an
optional uniform tail: every further member extends the previous one by a
fixed cycle of top appends, and its z-values gain one fixed token per append
("their own last entry again" or a constant). The amalgam's top ascent level
and z-unions then exist in closed form: each cell's template closes its
finite stretch into an omega-block whose repeating tail is the resolved
append cycle.

The auxiliary z-branches make the new limit level vanish: the union of the
z-values at the chain's own limit stage is eventually different from every
admitted branch, so no graft of it lands in the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .foundations import FULL_SET, Ordinal, UPSet
from .ascent import AP, AppendScheme, AscentLevel, Cell, supp
from .nodes import Entry, SymNode, eq_star, mutually_exclusive
from .conditions import (
    Condition, S_X, TailRule, check_condition, leq_s, one_step_with,
)
from .trees import (
    BranchCatalog, CatalogFamily, CatalogSingle, SymTree, tree_contains,
    vanishing_levels,
)


class HypothesisViolated(ValueError):
    def __init__(self, bullet: str, detail: str = "") -> None:
        self.bullet = bullet
        super().__init__(f"chain hypothesis failed ({bullet})" + (f": {detail}" if detail else ""))


class NotUniformTail(ValueError):
    """The chain has no closed-form continuation."""


# z-append tokens: ("const", v) appends the label v, ("last",) repeats the
# node's final entry.
ZToken = tuple


def resolve_tokens(tokens: tuple[ZToken, ...], tmpl: SymNode) -> tuple[Entry, ...]:
    out: list[Entry] = []
    for tok in tokens:
        if tok[0] == "const":
            out.append(tok[1])
        elif tok[0] == "last":
            if not tmpl.final:
                raise ValueError("'last' token needs a nonempty final stretch")
            out.append(tmpl.final[-1])
        else:
            raise ValueError(f"unknown z token {tok!r}")
    return tuple(out)


@dataclass(frozen=True, slots=True)
class ZMap:
    """Auxiliary branch enumerator on an ordinal interval (lo, hi) or
    (lo, hi]: cells over the finite-part keys of a block plus explicit
    entries for the sparse high keys."""

    lo: Ordinal
    hi: Ordinal
    closed_hi: bool = False
    cells: tuple[tuple[int, Cell], ...] = ()    # (block w, indices over n)
    entries: tuple[tuple[Ordinal, SymNode], ...] = ()

    @staticmethod
    def make(lo, hi, closed_hi=False, cells=(), entries=()) -> "ZMap":
        return ZMap(lo, hi, closed_hi,
                    tuple(cells), tuple(sorted(entries.items() if isinstance(entries, dict) else entries)))

    def in_domain(self, i: Ordinal) -> bool:
        if i <= self.lo:
            return False
        return i <= self.hi if self.closed_hi else i < self.hi

    def at(self, i: Ordinal) -> SymNode:
        if not self.in_domain(i):
            raise KeyError(f"{i} outside z domain ({self.lo}, {self.hi}{']' if self.closed_hi else ')'}")
        for k, v in self.entries:
            if k == i:
                return v
        for w, cell in self.cells:
            if w == i.w and i.n in cell.ap:
                return cell.at(i.n)
        raise KeyError(f"z map has no value at {i}")

    def probe_keys(self) -> list[Ordinal]:
        out = [k for k, _ in self.entries if self.in_domain(k)]
        for w, cell in self.cells:
            for m in range(2):
                key = Ordinal(w, cell.ap.member(m))
                if self.in_domain(key):
                    out.append(key)
        return sorted(out)

    def stepped(self, new_lo: Ordinal, tokens: tuple[ZToken, ...]) -> "ZMap":
        """The next member's z-map: keys <= new_lo drop out, every value
        gains the resolved token entries."""
        cells = []
        for w, cell in self.cells:
            ap, tmpl = cell.ap, cell.template
            if w == new_lo.w and ap.start <= new_lo.n:
                skip = (new_lo.n - ap.start) // ap.step + 1
                ap = AP(ap.member(skip), ap.step)
                tmpl = tmpl.reindex(1, skip)
            ext = tmpl
            for e in resolve_tokens(tokens, tmpl):
                ext = ext.append(e)
            cells.append((w, Cell(ap, ext)))
        entries = []
        for k, v in self.entries:
            if k <= new_lo:
                continue
            ext = v
            for e in resolve_tokens(tokens, v):
                ext = ext.append(e)
            entries.append((k, ext))
        return ZMap.make(new_lo, self.hi, self.closed_hi, cells, entries)

    def limit_value(self, i: Ordinal, tokens: tuple[ZToken, ...]) -> SymNode:
        """Union of this key's values along the uniform tail."""
        base = self.at(i)
        return base.extend_to_limit(resolve_tokens(tokens, base))

    def limit_map(self, new_lo: Ordinal, tokens: tuple[ZToken, ...]) -> "ZMap":
        """The whole map's unions along the tail, on the keys above the new
        limit stage; full-block key ranges stay cells."""
        cells = []
        for w, cell in self.cells:
            ap, tmpl = cell.ap, cell.template
            if w < new_lo.w:
                continue
            if w == new_lo.w and ap.start <= new_lo.n:
                skip = (new_lo.n - ap.start) // ap.step + 1
                ap = AP(ap.member(skip), ap.step)
                tmpl = tmpl.reindex(1, skip)
            cells.append((w, Cell(ap, tmpl.extend_to_limit(resolve_tokens(tokens, tmpl)))))
        entries = [(k, v.extend_to_limit(resolve_tokens(tokens, v)))
                   for k, v in self.entries if k > new_lo]
        return ZMap.make(new_lo, self.hi, self.closed_hi, cells, entries)


@dataclass(frozen=True, slots=True)
class ChainMember:
    beta: Ordinal
    cond: Condition
    z: ZMap


@dataclass(frozen=True, slots=True)
class ChainTail:
    """Uniform continuation: each further member is the previous one plus the
    append cycle at the top, stage label advanced by beta_step, z-values
    extended by the tokens (one per append)."""

    beta_step: int
    schemes: tuple[AppendScheme, ...]
    z_tokens: tuple[ZToken, ...]

    def next_member(self, m: ChainMember) -> ChainMember:
        cond = m.cond
        for scheme in self.schemes:
            cond = one_step_with(cond, cond.top, scheme, verify=False)
        beta = Ordinal(m.beta.w, m.beta.n + self.beta_step)
        return ChainMember(beta, cond, m.z.stepped(beta, self.z_tokens))


@dataclass(frozen=True, slots=True)
class ChainDescriptor:
    """Explicit prefix, optional uniform tail, the limit stage gamma the
    member stages approach, and the z-domain endpoint delta."""

    members: tuple[ChainMember, ...]
    tail: Optional[ChainTail]
    gamma: Ordinal
    delta: Ordinal
    closed_delta: bool = False

    def sample_members(self, extra: int = 2) -> list[ChainMember]:
        out = list(self.members)
        if self.tail is not None:
            cur = out[-1]
            for _ in range(extra):
                cur = self.tail.next_member(cur)
                out.append(cur)
        return out


def check_z_bullets(beta: Ordinal, cond: Condition, z: ZMap,
                    delta: Ordinal, closed: bool) -> None:
    """The four per-stage z requirements, on the represented keys plus the
    cell structure (last-entry injectivity decides eventual difference at
    successor heights). Raises HypothesisViolated with the failing bullet."""
    if (z.lo, z.hi, z.closed_hi) != (beta, delta, closed):
        raise HypothesisViolated("z-domain", f"z of stage {beta} has domain "
                                 f"({z.lo},{z.hi}{']' if z.closed_hi else ')'}")
    eta = cond.eta
    top = cond.top
    keys = z.probe_keys()
    nodes = [(k, z.at(k)) for k in keys]
    for k, v in nodes:
        if v.dom != eta:
            raise HypothesisViolated("z-top-level", f"z({k}) has height {v.dom}")
        if not tree_contains(cond.tree, v):
            raise HypothesisViolated("z-top-level", f"z({k}) outside the tree")
    # pairwise eventual difference: at successor heights this is distinct
    # last entries; cells carry injective ramps, so checking the sampled
    # keys plus cross-piece collisions is exact
    if eta.is_successor:
        last = eta.pred()
        seen: dict[int, Ordinal] = {}
        for k, v in nodes:
            val = v.eval_at(last)
            if val in seen:
                raise HypothesisViolated("z-pairwise", f"z({seen[val]}) =* z({k})")
            seen[val] = k
        for w, cell in z.cells:
            e = cell.template.entry_at(last)
            if isinstance(e, int):
                raise HypothesisViolated("z-pairwise", f"constant labels on block {w} cell")
    else:
        for i, (k1, v1) in enumerate(nodes):
            for k2, v2 in nodes[i + 1:]:
                if eq_star(v1, v2):
                    raise HypothesisViolated("z-pairwise", f"z({k1}) =* z({k2})")
        for w, cell in z.cells:
            word = cell.template.blocks[-1]
            if all(isinstance(e, int) for e in word.prefix + word.tail):
                raise HypothesisViolated("z-pairwise",
                                         f"block {w} cell instances eventually coincide")
    f0 = top.at(0)
    for k, v in nodes:
        if eq_star(v, f0):
            raise HypothesisViolated("z-vs-zero", f"z({k}) =* top family at 0")
        for tau in (1, 2, 3, 5, 8):
            if not mutually_exclusive(v, top.at(tau)):
                raise HypothesisViolated("z-exclusive", f"z({k}) meets top family at {tau}")
    # symbolic exclusivity against the whole nonzero family: any collision
    # between a z value and a top template away from index 0 is fatal
    for k, v in nodes:
        from .ascent import me_set_concrete
        ok_set = me_set_concrete(v, top)
        bad = ok_set.complement().difference(_singleton_zero())
        if not bad.is_empty:
            raise HypothesisViolated("z-exclusive", f"z({k}) meets top family at {bad.min_member()}")
    if z.cells:
        from .ascent import AscentLevel, me_cross
        probe = AscentLevel(eta, tuple(c for _, c in z.cells), ())
        rep = me_cross(probe, top)
        if rep.has_moving:
            raise HypothesisViolated("z-exclusive", "a branch cell meets the family cofinally")
        if not rep.static_bad.difference(_singleton_zero()).is_empty:
            raise HypothesisViolated("z-exclusive", "a branch cell meets the family off 0")
        for i0, row in rep.special_rows:
            if not row.difference(_singleton_zero()).is_empty:
                raise HypothesisViolated("z-exclusive", f"branch {i0} meets the family off 0")


def _singleton_zero() -> UPSet:
    from .foundations import singleton
    return singleton(0)


def validate_chain(ch: ChainDescriptor) -> list[ChainMember]:
    """Check every amalgamation hypothesis; returns the members extended by
    two generated tail members for the rule-level checks."""
    if not ch.members:
        raise HypothesisViolated("nonempty", "chain has no members")
    if not ch.gamma.is_limit:
        raise HypothesisViolated("gamma-limit", f"{ch.gamma} is not a limit")
    if not (ch.delta > ch.gamma):
        raise HypothesisViolated("delta-range", f"delta {ch.delta} not above gamma {ch.gamma}")
    if ch.tail is None:
        raise NotUniformTail("a cofinal chain below a limit needs a uniform tail")
    if len(ch.tail.z_tokens) != len(ch.tail.schemes):
        raise HypothesisViolated("tail-shape", "z tokens must match the append cycle")
    sample = ch.sample_members()
    for m in sample:
        if m.cond.variant != S_X:
            raise HypothesisViolated("variant", "chain members must be S_X conditions")
        if not (m.beta < ch.gamma):
            raise HypothesisViolated("gamma-cofinal", f"stage {m.beta} at or above gamma")
        check_z_bullets(m.beta, m.cond, m.z, ch.delta, ch.closed_delta)
    for i, m1 in enumerate(sample):
        for m2 in sample[i + 1:]:
            if not leq_s(m2.cond, m1.cond):
                raise HypothesisViolated("decreasing", f"stage {m2.beta} does not extend {m1.beta}")
            if supp(m1.cond.top, m2.cond.top) != FULL_SET:
                raise HypothesisViolated("full-supp", f"stages {m1.beta},{m2.beta}")
            for k in m1.z.probe_keys():
                if m2.z.in_domain(k):
                    v1, v2 = m1.z.at(k), m2.z.at(k)
                    if v2.restrict(v1.dom) != v1:
                        raise HypothesisViolated("z-coherent", f"z({k}) not increasing")
    return sample


def amalgamate(ch: ChainDescriptor) -> tuple[Condition, ZMap]:
    """The limit lower bound: closed-form unions for the ascent top and the
    z-branches, a branch catalog making the new level's members exactly the
    grafts of lower nodes onto admitted branches, and the skipped z-branch
    recorded vanishing. Every conclusion is re-verified before returning."""
    sample = validate_chain(ch)
    last = ch.members[-1]
    tail = ch.tail

    eta = last.cond.eta.next_limit()
    # path: explicit levels from the last member, tail rule for the block,
    # and the union level on top; the rule starts one height up, so its
    # base absorbs the first scheme and the cycle rotates
    start_n = last.cond.eta.n + 1
    rule = TailRule(start_n, last.cond.top.append_entries(tail.schemes[0]),
                    tail.schemes[1:] + tail.schemes[:1])
    top = rule.limit_level()

    # z-unions and the vanishing branch
    z_gamma = last.z.limit_map(ch.gamma, tail.z_tokens)
    vanish = last.z.limit_value(ch.gamma, tail.z_tokens)

    fams = [CatalogFamily(top.cells, admitted=True)]
    fams.extend(CatalogFamily((c,), admitted=True) for _, c in z_gamma.cells)
    singles = [CatalogSingle(f"z:{i}", v, admitted=True) for i, v in z_gamma.entries]
    singles.append(CatalogSingle("y", vanish, admitted=False))
    catalog = BranchCatalog(tuple(fams), tuple(singles))

    tree = SymTree.make(eta.succ(), last.cond.tree.explicit,
                        dict(last.cond.tree.catalogs) | {eta: catalog})
    levels = {h: lvl for h, lvl in last.cond.path.levels if h.n < start_n or h.w != eta.w - 1}
    levels[eta] = top
    path_tails = dict(last.cond.path.tails) | {eta.w - 1: rule}
    from .conditions import AscentPath
    out = Condition(tree, AscentPath.make(levels, path_tails), S_X, last.cond.x)

    _verify_conclusions(ch, sample, out, z_gamma, vanish)
    return out, z_gamma


def _verify_conclusions(ch: ChainDescriptor, sample: list[ChainMember],
                        out: Condition, z_gamma: ZMap, vanish: SymNode) -> None:
    eta = out.eta
    if any(m.cond.eta >= eta for m in sample):
        raise HypothesisViolated("height-sup", "a member reaches the limit height")
    for m in ch.members:
        if not leq_s(out, m.cond):
            raise AssertionError(f"amalgam does not extend stage {m.beta}")
        if supp(m.cond.top, out.top) != FULL_SET:
            raise AssertionError(f"amalgam lost full support to stage {m.beta}")
        for k in m.z.probe_keys():
            if z_gamma.in_domain(k):
                v = m.z.at(k)
                if z_gamma.at(k).restrict(v.dom) != v:
                    raise AssertionError(f"z union at {k} does not extend stage {m.beta}")
    # membership characterization: admitted branches and their grafts are in,
    # the vanishing union is out
    for i in z_gamma.probe_keys():
        if not tree_contains(out.tree, z_gamma.at(i)):
            raise AssertionError(f"z union at {i} missing from the top level")
    for tau in (0, 1, 4):
        if not tree_contains(out.tree, out.top.at(tau)):
            raise AssertionError("ascent union missing from the top level")
    if tree_contains(out.tree, vanish):
        raise AssertionError("the skipped z-branch is in the tree")
    van = vanishing_levels(out.tree, "full")
    if eta not in van.levels or not van.closed:
        raise AssertionError("new limit level is not recorded vanishing")
    rep = check_condition(out, S_X)
    if not rep.ok:
        raise AssertionError("amalgam fails validation: " + "; ".join(rep.violations))
