"""Derived orderings on level heights over a described generic path: the
full-support order and its filter-set relatives, badness of successor
heights, bounded antichain experiments with structural incompatibility
certificates, and cofinal-branch derivation.

A path stands in for a generic descending sequence: one deepest condition
holds every represented level, and an optional uniform rule continues the
heights cofinally below the supremum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .foundations import FULL_SET, Ordinal, UPSet, XSequence, DEFAULT_X
from .ascent import AscentLevel, MEReport, me_family, supp
from .nodes import SymNode, delta
from .conditions import Condition, TailRule

THETA = "theta"
Variant = Union[str, int]  # THETA or the filter index xi


class Unrepresented(ValueError):
    """Height outside the described part of the path."""


class NotLinked(ValueError):
    """The height set is not pairwise linked at the requested index."""


class IncoherentIndex(ValueError):
    """No well-defined branch at this family index."""


@dataclass(frozen=True, slots=True)
class APoint:
    """An element of the lottery sum: a height tagged by the comparison
    variant (None stands for the full-support order)."""

    xi: Optional[int]
    alpha: Ordinal


@dataclass(frozen=True, slots=True)
class PathDescriptor:
    """Deepest explicit condition plus an optional uniform continuation."""

    base: Condition
    rule: Optional[TailRule] = None

    @property
    def sup(self) -> Ordinal:
        if self.rule is None:
            return self.base.eta.succ()
        return self.base.eta.next_limit()

    def represented(self, alpha: Ordinal) -> bool:
        if alpha <= self.base.eta and self.base.path.has(alpha):
            return True
        return (self.rule is not None and alpha.w == self.base.eta.w
                and alpha.n >= self.rule.start)

    def level_at(self, alpha: Ordinal) -> AscentLevel:
        if alpha <= self.base.eta:
            return self.base.path.level_at(alpha)
        if self.rule is not None and alpha.w == self.base.eta.w and alpha.n >= self.rule.start:
            return self.rule.level_at(alpha.n)
        raise Unrepresented(f"height {alpha} not on the path")

    def heights(self, bound: Optional[Ordinal] = None) -> list[Ordinal]:
        out = list(self.base.path.probe_heights(self.base.eta))
        if bound is not None:
            out = [h for h in out if h <= bound]
            cur = self.base.eta
            while self.rule is not None and cur < bound:
                cur = cur.succ()
                if self.represented(cur):
                    out.append(cur)
        return sorted(set(out))


def leq_a(path: PathDescriptor, variant: Variant, alpha: Ordinal, beta: Ordinal,
          x: XSequence = DEFAULT_X) -> bool:
    """beta lies below alpha in the derived order: the heights are ordered
    and the supports of their ascent levels are comparable everywhere (the
    full-support order) or on the chosen filter set."""
    for h in (alpha, beta):
        if not path.represented(h):
            raise Unrepresented(f"height {h} not on the path")
    if not alpha <= beta:
        return False
    s = supp(path.level_at(alpha), path.level_at(beta))
    if variant == THETA:
        return s == FULL_SET
    return x.entry(int(variant)).is_subset(s)


def is_bad(path: PathDescriptor, beta: Ordinal, pair: tuple[int, int] = (0, 1)) -> bool:
    """beta = alpha+1 whose level splits the witness pair exactly at alpha."""
    if not path.represented(beta):
        raise Unrepresented(f"height {beta} not on the path")
    if not beta.is_successor:
        return False
    alpha = beta.pred()
    lvl = path.level_at(beta)
    return delta(lvl.at(pair[0]), lvl.at(pair[1])) == alpha


@dataclass(frozen=True, slots=True)
class PairVerdict:
    a: Ordinal
    b: Ordinal
    compatible: bool
    witness: Optional[Ordinal]        # common lower bound when compatible
    certificate: str                  # structural reason when incompatible


@dataclass(frozen=True, slots=True)
class AntichainReport:
    variant: Variant
    pairs: tuple[PairVerdict, ...]

    @property
    def all_incompatible(self) -> bool:
        return all(not p.compatible for p in self.pairs)


def _transport_certificate(path: PathDescriptor, a: Ordinal, b: Ordinal,
                           pair: tuple[int, int]) -> Optional[str]:
    """For bad heights with a shared witness pair, a common lower bound with
    full support would copy the earlier split into the later level, where
    the pair still agrees; check both facts concretely."""
    if not (a.is_successor and b.is_successor):
        return None
    if not (is_bad(path, a, pair) and is_bad(path, b, pair)):
        return None
    alpha = a.pred()
    lb = path.level_at(b)
    va, vb = lb.at(pair[0]), lb.at(pair[1])
    if va.eval_at(alpha) != vb.eval_at(alpha):
        return None
    la = path.level_at(a)
    if la.at(pair[0]).eval_at(alpha) == la.at(pair[1]).eval_at(alpha):
        return None
    return (f"any common bound needs full support to both, forcing values at "
            f"{alpha} to differ (from {a}) and agree (from {b})")


def check_antichain(path: PathDescriptor, variant: Variant,
                    points, search_bound: Ordinal,
                    pair: tuple[int, int] = (0, 1),
                    x: XSequence = DEFAULT_X) -> AntichainReport:
    """Pairwise compatibility verdicts: an exhaustive bounded search for a
    common lower bound, upgraded to a structural certificate whenever the
    split-transport argument applies."""
    pts = sorted(points)
    if not path.represented(search_bound):
        raise Unrepresented(f"search bound {search_bound} not on the path")
    candidates = path.heights(search_bound)
    verdicts = []
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            cert = "" if variant != THETA else (_transport_certificate(path, a, b, pair) or "")
            witness = None
            if not cert:
                for gamma in candidates:
                    if gamma >= b and leq_a(path, variant, a, gamma, x) \
                            and leq_a(path, variant, b, gamma, x):
                        witness = gamma
                        break
            compatible = witness is not None
            if not compatible and not cert:
                cert = f"no common lower bound at heights <= {search_bound}"
            verdicts.append(PairVerdict(a, b, compatible, witness, cert))
    return AntichainReport(variant, tuple(verdicts))


@dataclass(frozen=True, slots=True)
class BranchFamily:
    """Cofinal branches b_n derived from a linked height set, defined at the
    coherent indices."""

    height: Ordinal
    coherent: UPSet
    level: AscentLevel

    def branch(self, n: int) -> SymNode:
        if n not in self.coherent:
            raise IncoherentIndex(f"index {n} has no coherent branch")
        return self.level.at(n)

    def me_report(self) -> MEReport:
        return me_family(self.level)


def derive_branches(path: PathDescriptor, heights, xi: int,
                    x: XSequence = DEFAULT_X) -> BranchFamily:
    """Unions b_n of the ascent values along the given heights (or the whole
    path when heights == "all"); requires the heights pairwise linked at xi
    and cofinal, and returns the family over the coherent index set."""
    if heights == "all":
        hs = path.heights()
        cofinal = True  # probe heights reach the top; a tail is cofinal itself
    else:
        hs = sorted(heights)
        for h in hs:
            if not path.represented(h):
                raise Unrepresented(f"height {h} not on the path")
        # an explicit finite set is cofinal only in a finite path
        cofinal = path.rule is None and bool(hs) and hs[-1] == path.base.eta
    if not cofinal:
        raise NotLinked("height set is not cofinal in the path")
    xset = x.entry(xi)
    coherent = FULL_SET
    for a, b in zip(hs, hs[1:]):
        s = supp(path.level_at(a), path.level_at(b))
        if not xset.is_subset(s):
            raise NotLinked(f"heights {a},{b} not linked at index {xi}")
        coherent = coherent.intersect(s)
    if path.rule is not None:
        level = path.rule.limit_level()
    else:
        level = path.level_at(hs[-1])
    return BranchFamily(level.height, coherent, level)
