"""The sealing step and density absorption.

A seal triple prescribes a near-copy of the current top family: off an
ideal set Y nothing moves, on Y the members are eventually equal to the
family along an injection pi. The sealing step first grafts the prescribed
nodes into a one-step extension, consults an oracle hit standing in for the
antichain argument, and then routes a further one-step through three index
cells (the untouched filter part, the pi-image pulled back, the rest pushed
by a canonical injection away from the filter set) so that both prescribed
support guarantees hold afterwards; both are re-verified before returning.

Density absorption swallows one finite node into a prescribed filter-set
coordinate of the next level, repairing the finitely many per-coordinate
label collisions by swapping values with the chosen coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .foundations import (
    EMPTY_SET, FULL_SET, Ordinal, UPSet, ZERO, filter_classify, finite_set,
)
from .ascent import (
    AP, AscentLevel, Cell, PiecewiseMap, fill_level, identity_map,
    level_reindex, map_affine_on, me_family, order_iso,
    restrict_level_domain, restrict_map, standard_append, supp,
)
from .nodes import SymNode, eq_star, graft, mk_entry, node_patch
from .conditions import Condition, S_X, WrongVariant, leq_s, one_step_with
from .trees import SymTree, family_in_tree, tree_contains


class SealTripleInvalid(ValueError):
    pass


class OracleMismatch(ValueError):
    pass


class UnsupportedTriple(ValueError):
    """The canonical routing injection cannot avoid the conflict zone."""


class LimitDomainUnsupported(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SealTriple:
    """Prescribed family x, ideal set Y, injection pi: Y -> Y."""

    x_family: AscentLevel
    y: UPSet
    pi: PiecewiseMap


@dataclass(frozen=True, slots=True)
class OracleHit:
    """Stand-in for the antichain argument: an extension of the intermediate
    one-step together with a height whose support guarantee covers the
    filter set. The guarantee is re-validated on use."""

    cond: Condition
    alpha: Ordinal


def identity_triple(cond: Condition) -> SealTriple:
    return SealTriple(cond.top, EMPTY_SET, PiecewiseMap((), ()))


def transposition_triple(cond: Condition, a: int, b: int,
                         fresh: Optional[int] = None) -> SealTriple:
    """Swap two coordinates modulo bounded difference: x_a is the b-node with
    a fresh label at coordinate 0, and vice versa."""
    if cond.eta < Ordinal(0, 2):
        raise SealTripleInvalid("transposition triples need height at least 2")
    top = cond.top
    if fresh is None:
        fresh = 2 * max(a, b) + 101
    x_a = node_patch(top.at(b), {ZERO: fresh})
    x_b = node_patch(top.at(a), {ZERO: fresh + 2})
    fam = AscentLevel.make(cond.eta, top.cells, dict(top.exceptions) | {a: x_a, b: x_b})
    return SealTriple(fam, finite_set({a, b}),
                      PiecewiseMap.from_dict({a: b, b: a}))


def check_triple(triple: SealTriple, cond: Condition) -> bool:
    """The two triple requirements: a mutually exclusive family of top-level
    nodes; an ideal set with an injection matching the family off/on it."""
    top = cond.top
    xf = triple.x_family
    if xf.height != cond.eta:
        return False
    if not me_family(xf).ok:
        return False
    if not family_in_tree(cond.tree, xf.cells, xf.exceptions):
        return False
    if not filter_classify(triple.y, cond.x).in_ideal:
        return False
    pi = triple.pi
    if not pi.is_injective():
        return False
    if pi.domain() != triple.y or not pi.image().is_subset(triple.y):
        return False
    # x == top off Y: same-height comparability is equality
    if not FULL_SET.difference(supp(xf, top)).is_subset(triple.y):
        return False
    # x_tau eventually equals top at pi(tau) on Y; within one map piece the
    # compared entries are affine in the position, so three instances pin
    # every slot identity and the sampled checks are exact
    for k in _sample_members(triple.y):
        if not eq_star(xf.at(k), top.at(pi.apply(k))):
            return False
    for p in pi.pieces:
        a, b = map_affine_on(pi, p.ap)
        for m in (0, 1, 2):
            k = p.ap.member(m)
            if not eq_star(xf.at(k), top.at(a * m + b)):
                return False
    return True


def _sample_members(u: UPSet, extra: int = 3) -> list[int]:
    out = sorted(u.low)
    aps, _ = u.to_aps()
    for ap in aps:
        out.extend(ap.member(m) for m in range(extra))
    return sorted(set(out))


def _route_pieces(sigma: PiecewiseMap, alpha_lvl: AscentLevel, top_lvl: AscentLevel):
    """Pieces of tau -> graft(alpha_lvl(sigma(tau)), top_lvl(tau)) + <2*sigma(tau)>
    over sigma's domain."""
    cells_out: list[Cell] = []
    exc_out: list[tuple[int, SymNode]] = []
    lcells, lexc = level_reindex(alpha_lvl, sigma)
    for k, lnode in lexc:
        merged = graft(lnode, top_lvl.at(k)).append(2 * sigma.apply(k))
        exc_out.append((k, merged))
    for lc in lcells:
        a_sig, b_sig = map_affine_on(sigma, lc.ap)
        for tc in top_lvl.cells:
            inter = lc.ap.intersect(tc.ap)
            if inter is None:
                continue
            left = lc.template.reindex(inter.step // lc.ap.step, lc.ap.position(inter.start))
            right = tc.template.reindex(inter.step // tc.ap.step, tc.ap.position(inter.start))
            a = a_sig * (inter.step // lc.ap.step)
            b = a_sig * lc.ap.position(inter.start) + b_sig
            label = mk_entry(2 * a, 2 * b)
            cells_out.append(Cell(inter, graft(left, right).append(label)))
        for k, tnode in top_lvl.exceptions:
            if k in lc.ap:
                merged = graft(lc.at(k), tnode).append(2 * sigma.apply(k))
                exc_out.append((k, merged))
    return cells_out, exc_out


def _extend_with_top(cond: Condition, new_top: AscentLevel,
                     verify: bool = True) -> Condition:
    from .conditions import _append_fibers_ok
    tree = SymTree.make(cond.tree.height.succ(), cond.tree.explicit, cond.tree.catalogs)
    out = Condition(tree, cond.path.with_level(cond.eta.succ(), new_top),
                    cond.variant, cond.x)
    if verify:
        rep = me_family(new_top)
        if not rep.ok:
            raise ValueError(f"routing produced a non-exclusive family: {rep.detail}")
        ok, why = _append_fibers_ok(new_top, cond.x)
        if not ok:
            raise ValueError(f"routing violates the exclusivity filter: {why}")
    return out


def build_intermediate(cond: Condition, triple: SealTriple) -> Condition:
    """The first sealing move: a one-step that keeps the family off Y and
    grafts the prescribed nodes over their pi-targets on Y."""
    if not check_triple(triple, cond):
        raise SealTripleInvalid("triple fails its requirements against the condition")
    top = cond.top
    y = triple.y
    y_cells, y_exc = restrict_level_domain(triple.x_family, y)
    pi_cells, pi_exc = level_reindex(top, restrict_map(triple.pi, y))
    pid = dict(pi_exc)
    graft_exc = [(k, graft(v, pid[k])) for k, v in y_exc if k in pid]
    graft_cells = []
    for xc in y_cells:
        for pc in pi_cells:
            inter = xc.ap.intersect(pc.ap)
            if inter is None:
                continue
            lx = xc.template.reindex(inter.step // xc.ap.step, xc.ap.position(inter.start))
            lp = pc.template.reindex(inter.step // pc.ap.step, pc.ap.position(inter.start))
            graft_cells.append(Cell(inter, graft(lx, lp)))
    below = fill_level(cond.eta, graft_cells, graft_exc, top)
    mid = one_step_with(cond, below, standard_append(below), verify=True)
    if not y.complement().is_subset(supp(top, mid.top)):
        raise AssertionError("intermediate step lost the off-Y support")
    return mid


def seal_step(cond: Condition, triple: SealTriple, xi: int,
              hit: OracleHit) -> tuple[Condition, Ordinal]:
    """One sealing round for the given triple. Returns the routed extension
    and the height whose guarantees were re-verified."""
    if cond.variant != S_X:
        raise WrongVariant("sealing lives in the filter-sequence poset")
    x = cond.x
    xset = x.entry(xi)
    top = cond.top
    y = triple.y
    mid = build_intermediate(cond, triple)

    # oracle hit: an extension of the intermediate step with the guarantee
    if not leq_s(hit.cond, mid):
        raise OracleMismatch("hit does not extend the intermediate one-step")
    if hit.alpha > hit.cond.eta or not hit.cond.path.has(hit.alpha):
        raise OracleMismatch("hit height is not represented")
    if not xset.is_subset(supp(mid.top, hit.cond.level(hit.alpha))):
        raise OracleMismatch("hit support guarantee fails re-validation")

    sp = hit.cond
    alpha = hit.alpha
    alpha_prime = max(mid.eta, alpha)
    g_alpha = sp.level(alpha_prime)

    # routing cells
    a_set = xset.difference(y)
    b_set = xset.intersect(triple.pi.image())
    c_set = a_set.union(b_set).complement()
    conflict = _pi_preimage(triple.pi, b_set)
    target = x.x0.complement().difference(conflict)
    if target.is_finite:
        target = xset.complement().difference(conflict)
    if target.is_finite:
        raise UnsupportedTriple("no room for the routing injection off the filter set")
    psi = order_iso(c_set, target)

    pieces = []
    for sigma in (identity_map(a_set), restrict_map(triple.pi.inverse(), b_set), psi):
        pieces.append(_route_pieces(sigma, g_alpha, sp.top))
    cells = [c for cs, _ in pieces for c in cs]
    exc = [e for _, es in pieces for e in es]
    new_top = AscentLevel.make(sp.eta.succ(), cells, exc)
    out = _extend_with_top(sp, new_top, verify=True)

    # the two routing guarantees, re-verified exactly
    g_alpha_level = sp.level(alpha)
    if not a_set.is_subset(supp(g_alpha_level, new_top)):
        raise AssertionError("guarantee lost: the off-Y filter part is unsupported")
    for tau in _sample_members(xset.intersect(y)):
        lhs = g_alpha_level.at(tau)
        rhs = graft(triple.x_family.at(tau), new_top.at(triple.pi.apply(tau)))
        if lhs != rhs.restrict(lhs.dom):
            raise AssertionError(f"guarantee lost: absorption fails at {tau}")
    return out, alpha


def _pi_preimage(pi: PiecewiseMap, values: UPSet) -> UPSet:
    out = finite_set([k for k, v in pi.points if v in values])
    for p in pi.pieces:
        img = AP(p.b, p.a).upset().intersect(values)
        aps, singles = img.to_aps()
        inv = pi.inverse()
        for ap in aps:
            a, b = map_affine_on(inv, ap)
            out = out.union(AP(b, a).upset() if a else finite_set([b]))
        out = out.union(finite_set([inv.apply(v) for v in singles]))
    return out


# ---------------------------------------------------------------------------
# density absorption
# ---------------------------------------------------------------------------


def absorb_node(cond: Condition, t: SymNode, xi: int) -> tuple[Condition, Ordinal, int]:
    """A one-step extension whose top family swallows t at a filter-set
    coordinate; per-coordinate label collisions are swapped onto the chosen
    coordinate so the family stays exclusive and the support co-finite."""
    if cond.variant != S_X:
        raise WrongVariant("absorption lives in the filter-sequence poset")
    if not t.dom.is_finite:
        raise LimitDomainUnsupported(f"node of height {t.dom} cannot be absorbed")
    if not tree_contains(cond.tree, t):
        raise ValueError("node to absorb is not in the tree")
    xset = cond.x.entry(xi)
    if t.dom.is_zero:
        return cond, ZERO, xset.min_member()
    top = cond.top
    eta = cond.eta

    conflicts: dict[int, dict[Ordinal, int]] = {}
    for j in range(t.dom.n):
        eps = Ordinal(0, j)
        val = t.eval_at(eps)
        sigma = _value_owner(top, eps, val)
        if sigma is not None:
            conflicts.setdefault(sigma, {})[eps] = val
    tau0 = xset.min_member()
    while tau0 in conflicts:
        tau0 = next(k for k in xset.iter_members() if k > tau0)

    absorbed = graft(t, top.at(tau0))
    patches: dict[int, SymNode] = {tau0: absorbed}
    for sigma, coords in conflicts.items():
        repl = {eps: top.at(tau0).eval_at(eps) for eps in coords}
        patches[sigma] = node_patch(top.at(sigma), repl)
    for sigma, v in patches.items():
        if not tree_contains(cond.tree, v):
            raise ValueError(f"patched node at {sigma} escapes the tree")
    below = AscentLevel.make(eta, top.cells, dict(top.exceptions) | patches)
    out = one_step_with(cond, below, standard_append(below), verify=True)
    s = supp(top, out.top)
    if not filter_classify(s, cond.x).in_filter:
        raise AssertionError("absorption lost the filter support")
    alpha = out.eta
    if out.top.at(tau0).restrict(t.dom) != t:
        raise AssertionError("absorption failed to swallow the node")
    return out, alpha, tau0


def _value_owner(level: AscentLevel, eps: Ordinal, val: int) -> Optional[int]:
    """The unique family index whose node takes the value at the coordinate,
    if any (the family is exclusive, so fibers have at most one index)."""
    from .nodes import entry_affine
    for k, v in level.exceptions:
        if v.eval_at(eps) == val:
            return k
    for c in level.cells:
        a, b = entry_affine(c.template.entry_at(eps))
        if a == 0:
            if b == val:
                return c.ap.member(0)
        elif (val - b) % a == 0 and (val - b) // a >= 0:
            return c.ap.member((val - b) // a)
    return None
