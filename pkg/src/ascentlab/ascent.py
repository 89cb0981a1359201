"""Theta-indexed node families, the supp computation, and ascent-path checks.

A level f: omega -> T_h is stored intensionally: finitely many cells, each
an infinite arithmetic progression of indices sharing one template whose
Ramp entries are affine in the cell position, plus finitely many explicit
exceptions. This grammar is closed under everything the constructors need:
grafting, appending labels, restriction, and reindexing along piecewise
affine injections (the routing and surgery maps).

supp(f, g) = {tau : f(tau) and g(tau) are comparable} is computed exactly,
cell pair by cell pair: on a refined progression each coordinate slot pins
agreement to all positions, one position, or none, so the result is again
ultimately periodic. Family mutual exclusivity is per-coordinate injectivity
of tau -> f(tau)(eps), decided by solving the affine collision equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .foundations import (
    AP, EMPTY_SET, FULL_SET, BadHeight, Ordinal, UPSet, XSequence,
    filter_classify, finite_set, solve_congruence,
)
from .nodes import Entry, Ramp, SymNode, entry_affine, graft, mk_entry, mutually_exclusive


@dataclass(frozen=True, slots=True)
class Cell:
    """One progression of family indices with a shared template."""

    ap: AP
    template: SymNode

    def at(self, tau: int) -> SymNode:
        return self.template.instantiate(self.ap.position(tau))


@dataclass(frozen=True, slots=True)
class AscentLevel:
    """A family omega -> T_height given by cells plus explicit exceptions."""

    height: Ordinal
    cells: tuple[Cell, ...]
    exceptions: tuple[tuple[int, SymNode], ...] = ()

    @staticmethod
    def make(height: Ordinal, cells, exceptions=()) -> "AscentLevel":
        exc = dict(exceptions.items() if isinstance(exceptions, dict) else exceptions)
        carved = []
        for c in cells:
            ap, tmpl = c.ap, c.template
            hole = min((k for k in exc if k in ap), default=None)
            while hole is not None:
                hm = ap.position(hole)
                for m in range(hm):
                    exc[ap.member(m)] = tmpl.instantiate(m)
                ap = AP(ap.member(hm + 1), ap.step)
                tmpl = tmpl.reindex(1, hm + 1)
                hole = min((k for k in exc if k in ap), default=None)
            carved.append(Cell(ap, tmpl))
        lvl = AscentLevel(height,
                          tuple(sorted(carved, key=lambda c: (c.ap.start, c.ap.step))),
                          tuple(sorted((int(k), v) for k, v in exc.items())))
        lvl._check_partition()
        return lvl

    def _check_partition(self) -> None:
        cover = finite_set([k for k, _ in self.exceptions])
        for c in self.cells:
            cu = c.ap.upset()
            if not cover.intersect(cu).is_empty:
                raise ValueError("level pieces overlap")
            cover = cover.union(cu)
            if c.template.dom != self.height:
                raise ValueError(f"template domain {c.template.dom} != height {self.height}")
        for _, v in self.exceptions:
            if v.dom != self.height:
                raise ValueError(f"exception domain {v.dom} != height {self.height}")
            if not v.is_concrete():
                raise ValueError("exception nodes must be concrete")
        if cover != FULL_SET:
            raise ValueError("level pieces do not cover omega")

    def exc_dict(self) -> dict[int, SymNode]:
        return dict(self.exceptions)

    def at(self, tau: int) -> SymNode:
        for k, v in self.exceptions:
            if k == tau:
                return v
        for c in self.cells:
            if tau in c.ap:
                return c.at(tau)
        raise ValueError(f"index {tau} not covered")

    def restrict(self, alpha: Ordinal) -> "AscentLevel":
        return AscentLevel.make(
            alpha,
            [Cell(c.ap, c.template.restrict(alpha)) for c in self.cells],
            [(k, v.restrict(alpha)) for k, v in self.exceptions])

    def append_entries(self, per_cell: "AppendScheme") -> "AscentLevel":
        """One more coordinate: cell templates gain their scheme entry, each
        exception its own label."""
        cells = [Cell(c.ap, c.template.append(e))
                 for c, e in zip(self.cells, per_cell.cell_entries)]
        exc = [(k, v.append(per_cell.exception_labels[k])) for k, v in self.exceptions]
        return AscentLevel.make(self.height.succ(), cells, exc)


@dataclass(frozen=True, slots=True)
class AppendScheme:
    """Entries appended per cell (affine in the cell position) and per exception."""

    cell_entries: tuple[Entry, ...]
    exception_labels: dict[int, int] = field(default_factory=dict, hash=False, compare=False)


def standard_append(level: AscentLevel, shift: int = 0) -> AppendScheme:
    """The parity-coded ascent label 2*(tau+shift) at every index."""
    entries = []
    for c in level.cells:
        entries.append(mk_entry(2 * c.ap.step, 2 * (c.ap.start + shift)))
    labels = {k: 2 * (k + shift) for k, _ in level.exceptions}
    return AppendScheme(tuple(entries), labels)


def constant_level(height: Ordinal, node_: SymNode) -> AscentLevel:
    return AscentLevel.make(height, [Cell(AP(0, 1), node_)])


def root_level() -> AscentLevel:
    from .nodes import EMPTY_NODE
    return constant_level(Ordinal(0, 0), EMPTY_NODE)


# ---------------------------------------------------------------------------
# refinement of two levels into comparable pieces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Piece:
    """A refined index stretch on which both levels are affine.

    For an infinite piece, `ap` lists the indices and the two templates'
    Ramp entries are affine in the piece position; `point` pieces carry the
    two concrete nodes directly.
    """

    ap: Optional[AP]
    point: Optional[int]
    left: SymNode
    right: SymNode


def refine(f: AscentLevel, g: AscentLevel) -> list[Piece]:
    """Common refinement of the two index partitions; exact and finite.

    Exception indices of either level are excluded from that level's cells
    by the partition invariant, so cell-cell intersections never contain
    them; every index is covered by exactly one piece of the other kind."""
    pieces: list[Piece] = []
    points = set(f.exc_dict()) | set(g.exc_dict())
    for tau in sorted(points):
        pieces.append(Piece(None, tau, f.at(tau), g.at(tau)))
    for cf in f.cells:
        for cg in g.cells:
            inter = cf.ap.intersect(cg.ap)
            if inter is None:
                continue
            hole = next((k for k in points if k in inter), None)
            while hole is not None:
                # an exception of one level sitting inside the other's cell:
                # emit the skipped stretch pointwise and continue past it
                hm = inter.position(hole)
                for m in range(hm + 1):
                    tau = inter.member(m)
                    if tau not in points:
                        pieces.append(Piece(None, tau, f.at(tau), g.at(tau)))
                inter = AP(inter.member(hm + 1), inter.step)
                hole = next((k for k in points if k in inter), None)
            a_f, b_f = inter.step // cf.ap.step, cf.ap.position(inter.start)
            a_g, b_g = inter.step // cg.ap.step, cg.ap.position(inter.start)
            pieces.append(Piece(inter, None,
                                cf.template.reindex(a_f, b_f),
                                cg.template.reindex(a_g, b_g)))
    return pieces


def _slot_pairs(u: SymNode, v: SymNode) -> Iterator[tuple[Entry, Entry]]:
    """Entry pairs covering every coordinate class of the shared domain
    (domains must be equal)."""
    for wu, wv in zip(u.blocks, v.blocks):
        for j in range(wu.window(wv)):
            yield wu.eval(j), wv.eval(j)
    for eu, ev in zip(u.final, v.final):
        yield eu, ev


def _agree_positions(u: SymNode, v: SymNode) -> tuple[str, int]:
    """Where two same-domain templates agree as functions of the piece
    position m: ('all', 0), ('one', m0) or ('none', 0)."""
    state: tuple[str, int] = ("all", 0)
    for eu, ev in _slot_pairs(u, v):
        au, bu = entry_affine(eu)
        av, bv = entry_affine(ev)
        if au == av and bu == bv:
            continue
        if au == av:  # parallel, never equal
            return ("none", 0)
        num, den = bv - bu, au - av
        if num % den != 0 or num // den < 0:
            return ("none", 0)
        m0 = num // den
        if state[0] == "all":
            state = ("one", m0)
        elif state[1] != m0:
            return ("none", 0)
    return state


def supp(f: AscentLevel, g: AscentLevel) -> UPSet:
    """Exact set of indices where f(tau) and g(tau) are comparable under
    end-extension."""
    if f.height > g.height:
        f, g = g, f
    out = EMPTY_SET
    singles: set[int] = set()
    for piece in refine(f, g.restrict(f.height)):
        if piece.point is not None:
            if piece.left == piece.right:
                singles.add(piece.point)
            continue
        verdict, m0 = _agree_positions(piece.left, piece.right)
        if verdict == "all":
            out = out.union(piece.ap.upset())
        elif verdict == "one":
            singles.add(piece.ap.member(m0))
    if singles:
        out = out.union(finite_set(singles))
    return out


def level_extensional_eq(f: AscentLevel, g: AscentLevel) -> bool:
    """Same family regardless of cell decomposition."""
    if f.height != g.height:
        return False
    return supp(f, g) == FULL_SET and all(
        f.at(t) == g.at(t) for t in list(f.exc_dict()) + list(g.exc_dict()))


def graft_levels(low: AscentLevel, high: AscentLevel) -> AscentLevel:
    """Index-wise graft: tau -> low(tau) * high(tau); height of `high`."""
    cells, exc = [], []
    for piece in refine(low, high):
        if piece.point is not None:
            exc.append((piece.point, graft(piece.left, piece.right)))
        else:
            cells.append(Cell(piece.ap, graft(piece.left, piece.right)))
    return AscentLevel.make(high.height, cells, exc)


@dataclass(frozen=True, slots=True)
class TailRule:
    """level_at(n) = base plus (n - start) uniform appends, n >= start; the
    appended schemes cycle (one entry per chain step, several steps per
    member for the game tails)."""

    start: int
    base: AscentLevel
    schemes: tuple[AppendScheme, ...]

    def level_at(self, n: int) -> AscentLevel:
        if n < self.start:
            raise ValueError(f"{n} below tail start {self.start}")
        lvl = self.base
        for k in range(n - self.start):
            lvl = lvl.append_entries(self.schemes[k % len(self.schemes)])
        return lvl

    def limit_level(self) -> AscentLevel:
        """Pointwise union of the tail levels: one more omega block."""
        cells = [Cell(c.ap, c.template.extend_to_limit(
            tuple(s.cell_entries[i] for s in self.schemes)))
            for i, c in enumerate(self.base.cells)]
        exc = [(k, v.extend_to_limit(tuple(s.exception_labels[k] for s in self.schemes)))
               for k, v in self.base.exceptions]
        return AscentLevel.make(self.base.height.next_limit(), cells, exc)


@dataclass(frozen=True, slots=True)
class AscentPath:
    """Explicit levels plus per-block uniform tails; total on every height
    up to the owning condition's top."""

    levels: tuple[tuple[Ordinal, AscentLevel], ...]
    tails: tuple[tuple[int, TailRule], ...] = ()

    @staticmethod
    def make(levels, tails=()) -> "AscentPath":
        levels = tuple(sorted(levels.items() if isinstance(levels, dict) else levels))
        tails = tuple(sorted(tails.items() if isinstance(tails, dict) else tails))
        for h, lvl in levels:
            if lvl.height != h:
                raise ValueError(f"level at {h} has height {lvl.height}")
        return AscentPath(levels, tails)

    def level_dict(self) -> dict[Ordinal, AscentLevel]:
        return dict(self.levels)

    def tail_for(self, w: int) -> Optional[TailRule]:
        for bw, rule in self.tails:
            if bw == w:
                return rule
        return None

    def has(self, alpha: Ordinal) -> bool:
        if any(h == alpha for h, _ in self.levels):
            return True
        rule = self.tail_for(alpha.w)
        return rule is not None and alpha.n >= rule.start

    def level_at(self, alpha: Ordinal) -> AscentLevel:
        for h, lvl in self.levels:
            if h == alpha:
                return lvl
        rule = self.tail_for(alpha.w)
        if rule is not None and alpha.n >= rule.start:
            return rule.level_at(alpha.n)
        raise KeyError(f"height {alpha} not represented")

    def with_level(self, alpha: Ordinal, lvl: AscentLevel) -> "AscentPath":
        return AscentPath.make(dict(self.levels) | {alpha: lvl}, self.tails)

    def probe_heights(self, eta: Ordinal) -> list[Ordinal]:
        """Heights checked exactly: explicit ones plus one scheme cycle and
        change per tail (the appended slots repeat beyond that)."""
        out = {h for h, _ in self.levels if h <= eta}
        for w, rule in self.tails:
            for n in range(rule.start, rule.start + len(rule.schemes) + 2):
                if Ordinal(w, n) <= eta and not any(h == Ordinal(w, n) for h, _ in self.levels):
                    out.add(Ordinal(w, n))
        return sorted(out)

    def covers(self, eta: Ordinal) -> bool:
        """Every height <= eta is represented."""
        for w in range(eta.w + 1):
            ns = {h.n for h, _ in self.levels if h.w == w}
            rule = self.tail_for(w)
            limit = eta.n if w == eta.w else None
            n = 0
            while True:
                if limit is not None and n > limit:
                    break
                covered = n in ns or (rule is not None and n >= rule.start)
                if not covered:
                    return False
                if limit is None and rule is not None and n >= rule.start:
                    break
                if limit is None and n > 4096:
                    return False
                n += 1
        return True


def paths_agree_below(p1: AscentPath, p2: AscentPath, eta: Ordinal) -> bool:
    """f2 restricted to eta+1 equals f1, decided exactly: all explicitly
    represented heights are compared extensionally and tail rules beyond the
    comparison window are pure appends of compared levels."""
    probes = sorted(set(p1.probe_heights(eta)) | set(p2.probe_heights(eta)))
    for alpha in probes:
        if not (p1.has(alpha) and p2.has(alpha)):
            return False
        if not level_extensional_eq(p1.level_at(alpha), p2.level_at(alpha)):
            return False
    for w in range(eta.w + 1):
        r1, r2 = p1.tail_for(w), p2.tail_for(w)
        if (r1 is None) != (r2 is None):
            # one side lists the block explicitly: fine only for the finite
            # stretch below eta within this block
            if w < eta.w:
                return False
            continue
        if r1 is not None and r1 != r2:
            # two pure-append rules agree everywhere iff they agree on one
            # shared cycle
            span = math.lcm(len(r1.schemes), len(r2.schemes))
            base = max(r1.start, r2.start)
            for k in range(span + 1):
                if not level_extensional_eq(r1.level_at(base + k), r2.level_at(base + k)):
                    return False
    return True



@dataclass(frozen=True, slots=True)
class AscentReport:
    """check_ascent outcome; `violation` describes the first failure."""

    ok: bool
    mode: str
    violation: str = ""


def check_ascent(path: AscentPath, mode: str, x: XSequence | None = None,
                 eta: Optional[Ordinal] = None) -> AscentReport:
    """Validate the path as an ascent path of the requested kind: plain mode
    needs co-bounded supports everywhere, the filter mode needs supports in
    the generated filter and pairwise exclusive nonzero levels. Exact at
    every explicitly represented height; tail levels are pure appends of
    checked ones, so the sampled cycle decides the rest."""
    from .foundations import DEFAULT_X, is_cobounded, filter_classify
    if mode not in ("theta", "me_filter"):
        raise ValueError(f"unknown mode {mode!r}")
    x = x or DEFAULT_X
    if eta is None:
        eta = max(h for h, _ in path.levels) if path.levels else Ordinal(0, 0)
        for w, rule in path.tails:
            eta = max(eta, Ordinal(w, rule.start + len(rule.schemes) + 1))
    probes = path.probe_heights(eta)
    for alpha in probes:
        if alpha.is_zero:
            for c in path.level_at(alpha).cells:
                if c.template.dom != Ordinal(0, 0):
                    return AscentReport(False, mode, "level 0 must be the empty family")
            continue
        if mode == "me_filter":
            rep = me_family(path.level_at(alpha))
            if not rep.ok:
                return AscentReport(False, mode, f"level {alpha}: {rep.detail}")
    for i, a in enumerate(probes):
        for b in probes[i + 1:]:
            s = supp(path.level_at(a), path.level_at(b))
            good = is_cobounded(s) if mode == "theta" else filter_classify(s, x).in_filter
            if not good:
                return AscentReport(False, mode, f"supp({a},{b}) = {s} unacceptable")
    return AscentReport(True, mode)


# ---------------------------------------------------------------------------
# mutual exclusivity: per-coordinate injectivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MEReport:
    ok: bool
    detail: str = ""


def _value_pieces(level: AscentLevel, w: int, j: int):
    """Per-piece affine description of tau -> f(tau)(coordinate (w,j))."""
    eps = Ordinal(w, j)
    out = []
    for c in level.cells:
        a, b = entry_affine(c.template.entry_at(eps))
        out.append(("cell", c.ap, a, b))
    for k, v in level.exceptions:
        out.append(("point", k, 0, v.eval_at(eps)))
    return out


def _coordinate_classes(level: AscentLevel) -> Iterator[tuple[int, int]]:
    """Representative coordinates covering every slot class of the level."""
    h = level.height
    words = [[c.template.blocks[w] for c in level.cells] +
             [v.blocks[w] for _, v in level.exceptions] for w in range(h.w)]
    for w in range(h.w):
        span = max(len(b.prefix) for b in words[w]) + math.lcm(*[len(b.tail) for b in words[w]])
        for j in range(span):
            yield (w, j)
    for j in range(h.n):
        yield (h.w, j)


def _pieces_collide(p1, p2, same_piece: bool) -> Optional[tuple[int, int]]:
    """Two value pieces taking a common value at distinct indices, if any."""
    kind1, loc1, a1, b1 = p1
    kind2, loc2, a2, b2 = p2
    if same_piece:
        if kind1 == "cell" and a1 == 0:
            return (loc1.member(0), loc1.member(1))
        return None
    if a1 == 0 and a2 == 0:
        if b1 == b2:
            i1 = loc1.member(0) if kind1 == "cell" else loc1
            i2 = loc2.member(0) if kind2 == "cell" else loc2
            return (i1, i2)
        return None
    if a1 == 0:
        (kind1, loc1, a1, b1), (kind2, loc2, a2, b2) = p2, p1
    if a2 == 0:
        if (b2 - b1) % a1 == 0 and (b2 - b1) // a1 >= 0:
            i1 = loc1.member((b2 - b1) // a1)
            i2 = loc2.member(0) if kind2 == "cell" else loc2
            return (i1, i2)
        return None
    # both slopes positive: a1*m1 - a2*m2 = b2 - b1 solvable over m1, m2 >= 0
    g = math.gcd(a1, a2)
    if (b2 - b1) % g != 0:
        return None
    sol = solve_congruence(a1, (b2 - b1) % a2, a2)
    m1, _ = sol
    while a1 * m1 + b1 - b2 < 0:
        m1 += a2 // g
    m2 = (a1 * m1 + b1 - b2) // a2
    return (loc1.member(m1), loc2.member(m2))


def me_family(level: AscentLevel) -> MEReport:
    """Pairwise mutual exclusivity of the whole family, decided exactly."""
    for (w, j) in _coordinate_classes(level):
        pieces = _value_pieces(level, w, j)
        for i, p1 in enumerate(pieces):
            hit = _pieces_collide(p1, p1, same_piece=True)
            if hit:
                return MEReport(False, f"indices {hit[0]},{hit[1]} share a value at ({w},{j})")
            for p2 in pieces[i + 1:]:
                hit = _pieces_collide(p1, p2, same_piece=False)
                if hit and hit[0] != hit[1]:
                    return MEReport(False, f"indices {hit[0]},{hit[1]} share a value at ({w},{j})")
    return MEReport(True)


def me_set_concrete(t: SymNode, level: AscentLevel) -> UPSet:
    """{tau : t and f(tau) are mutually exclusive}, exactly, for a concrete
    node of the level's height."""
    if t.dom != level.height:
        raise BadHeight("probe must live at the level height")
    bad = EMPTY_SET
    bad_pts: set[int] = set()
    for c in level.cells:
        verdict = _collision_set(t, c.template)
        if verdict == "all":
            bad = bad.union(c.ap.upset())
        elif verdict != "none":
            for m in verdict:
                bad_pts.add(c.ap.member(m))
    for k, v in level.exceptions:
        if not mutually_exclusive(t, v):
            bad_pts.add(k)
    if bad_pts:
        bad = bad.union(finite_set(bad_pts))
    return bad.complement()


def _collision_set(t: SymNode, template: SymNode):
    """Positions m where the template's node shares a coordinate value with
    concrete t: 'all', 'none', or a finite set of positions."""
    hits: set[int] = set()
    for et, ev in _slot_pairs(t, template):
        av, bv = entry_affine(ev)
        if av == 0:
            if ev == et:
                return "all"
            continue
        if (et - bv) % av == 0 and (et - bv) // av >= 0:
            hits.add((et - bv) // av)
    return hits if hits else "none"


@dataclass(frozen=True, slots=True)
class CrossMEReport:
    """Exclusivity of a probe family against an ascent level for clause-4
    style checks: the index-independent bad part, special probe rows with
    their own bad parts, and whether finitely many moving collisions occur
    per probe index (absorbed by any valid filter)."""

    static_bad: UPSet
    special_rows: tuple[tuple[int, UPSet], ...]
    has_moving: bool

    def ok(self, x: XSequence) -> bool:
        if not filter_classify(self.static_bad.complement(), x).in_filter:
            return False
        for _, row in self.special_rows:
            if not filter_classify(self.static_bad.union(row).complement(), x).in_filter:
                return False
        return True


def me_cross(probe: AscentLevel, level: AscentLevel) -> CrossMEReport:
    """Analyze ME(probe(i), level(tau)) for all i, tau at a shared height."""
    if probe.height != level.height:
        raise BadHeight("families must share a height")
    static = EMPTY_SET
    static_pts: set[int] = set()
    rows: dict[int, UPSet] = {}
    moving = False
    for pc in list(probe.cells):
        for lc in level.cells:
            for ep, el in _slot_pairs(pc.template, lc.template):
                ap_, bp = entry_affine(ep)
                al, bl = entry_affine(el)
                if ap_ == 0 and al == 0:
                    if bp == bl:
                        static = static.union(lc.ap.upset())
                elif ap_ == 0:
                    if (bp - bl) % al == 0 and (bp - bl) // al >= 0:
                        static_pts.add(lc.ap.member((bp - bl) // al))
                elif al == 0:
                    if (bl - bp) % ap_ == 0 and (bl - bp) // ap_ >= 0:
                        i0 = pc.ap.member((bl - bp) // ap_)
                        rows[i0] = rows.get(i0, EMPTY_SET).union(lc.ap.upset())
                else:
                    # both slopes positive: collisions exist iff the affine
                    # ranges meet, i.e. the gcd divides the offset
                    if (bl - bp) % math.gcd(ap_, al) == 0:
                        moving = True
        for k, v in level.exceptions:
            verdict = _collision_set(v, pc.template)
            if verdict == "all":
                static_pts.add(k)
            elif verdict != "none":
                moving = True
    for i0, v in probe.exceptions:
        bad_i = me_set_concrete(v, level).complement()
        if not bad_i.is_finite:
            rows[i0] = rows.get(i0, EMPTY_SET).union(bad_i)
        elif not bad_i.is_empty:
            moving = True
    if static_pts:
        static = static.union(finite_set(static_pts))
    return CrossMEReport(static, tuple(sorted(rows.items())), moving)


# ---------------------------------------------------------------------------
# piecewise affine index maps (order isomorphisms, pi, psi)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MapPiece:
    ap: AP       # domain indices
    a: int       # value = a*position + b
    b: int


@dataclass(frozen=True, slots=True)
class PiecewiseMap:
    """Injective map between sets of naturals, affine on finitely many
    progressions plus finitely many explicit points."""

    pieces: tuple[MapPiece, ...]
    points: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def from_dict(d: dict[int, int]) -> "PiecewiseMap":
        return PiecewiseMap((), tuple(sorted(d.items())))

    def domain(self) -> UPSet:
        out = finite_set([k for k, _ in self.points])
        for p in self.pieces:
            out = out.union(p.ap.upset())
        return out

    def image(self) -> UPSet:
        out = finite_set([v for _, v in self.points])
        for p in self.pieces:
            out = out.union(AP(p.b, p.a).upset() if p.a >= 1 else finite_set([p.b]))
        return out

    def apply(self, tau: int) -> int:
        for k, v in self.points:
            if k == tau:
                return v
        for p in self.pieces:
            if tau in p.ap:
                return p.a * p.ap.position(tau) + p.b
        raise ValueError(f"{tau} outside map domain")

    def inverse(self) -> "PiecewiseMap":
        pieces = []
        for p in self.pieces:
            if p.a < 1:
                raise ValueError("constant piece is not invertible")
            # value progression {b + a*m}; positions map back into p.ap
            pieces.append(MapPiece(AP(p.b, p.a), p.ap.step, p.ap.start))
        return PiecewiseMap(tuple(pieces), tuple((v, k) for k, v in self.points))

    def is_injective(self) -> bool:
        vals = [v for _, v in self.points]
        if len(vals) != len(set(vals)):
            return False
        imgs = [finite_set(vals)]
        for p in self.pieces:
            if p.a < 1:
                return False
            imgs.append(AP(p.b, p.a).upset())
        for i, u in enumerate(imgs):
            for v in imgs[i + 1:]:
                if not u.disjoint(v):
                    return False
        return True


def identity_map(dom: UPSet) -> PiecewiseMap:
    aps, singles = dom.to_aps()
    return PiecewiseMap(tuple(MapPiece(ap, ap.step, ap.start) for ap in aps),
                        tuple((k, k) for k in singles))


def restrict_map(m: PiecewiseMap, dom: UPSet) -> PiecewiseMap:
    """The map on the part of its domain inside dom."""
    points = [(k, v) for k, v in m.points if k in dom]
    pieces: list[MapPiece] = []
    for p in m.pieces:
        sub = dom.intersect(p.ap.upset())
        aps, singles = sub.to_aps()
        for ap in aps:
            a = p.a * (ap.step // p.ap.step)
            b = p.a * p.ap.position(ap.start) + p.b
            pieces.append(MapPiece(ap, a, b))
        points.extend((k, p.a * p.ap.position(k) + p.b) for k in singles)
    return PiecewiseMap(tuple(pieces), tuple(sorted(points)))


def map_affine_on(m: PiecewiseMap, ap: AP) -> tuple[int, int]:
    """(a, b) with m(ap.member(k)) = a*k + b, when ap sits inside one piece."""
    for p in m.pieces:
        if ap.start in p.ap and ap.step % p.ap.step == 0:
            a = p.a * (ap.step // p.ap.step)
            b = p.a * p.ap.position(ap.start) + p.b
            return a, b
    raise ValueError(f"{ap} not inside one piece of the map")


def restrict_level_domain(level: AscentLevel, dom: UPSet):
    """(cells, exceptions) fragments of the family on the given index set."""
    cells: list[Cell] = []
    exc: list[tuple[int, SymNode]] = []
    for k, v in level.exceptions:
        if k in dom:
            exc.append((k, v))
    for c in level.cells:
        sub = dom.intersect(c.ap.upset())
        aps, singles = sub.to_aps()
        for ap in aps:
            cells.append(Cell(ap, c.template.reindex(ap.step // c.ap.step,
                                                     c.ap.position(ap.start))))
        exc.extend((k, c.at(k)) for k in singles)
    return cells, exc


def fill_level(height: Ordinal, cells, exceptions, filler: AscentLevel) -> AscentLevel:
    """Total family: the given fragments where defined, the filler elsewhere."""
    covered = finite_set([k for k, _ in exceptions])
    for c in cells:
        covered = covered.union(c.ap.upset())
    f_cells, f_exc = restrict_level_domain(filler, covered.complement())
    return AscentLevel.make(height, tuple(cells) + tuple(f_cells),
                            tuple(exceptions) + tuple(f_exc))


def _member_stable(u: UPSet) -> tuple[int, int]:
    """(first stable rank, members per period)."""
    return u.rank(u.threshold), len(u.residues)


def order_iso(source: UPSet, target: UPSet, skip: int = 0) -> PiecewiseMap:
    """The order isomorphism of source onto target's members from rank
    `skip` on; both sets must be infinite."""
    if source.is_finite or target.is_finite:
        raise ValueError("order_iso needs infinite sets")
    rs, ks = _member_stable(source)
    rt, kt = _member_stable(target)
    n0 = max(rs, rt - skip if rt > skip else 0)
    span = math.lcm(ks, kt)
    points = tuple((source.nth(n), target.nth(n + skip)) for n in range(n0))
    pieces = []
    for c in range(span):
        b_dom = source.nth(n0 + c)
        a_dom = source.period * (span // ks)
        b_val = target.nth(n0 + c + skip)
        a_val = target.period * (span // kt)
        # domain piece: members n0+c, n0+c+span, ... of source
        pieces.append(MapPiece(AP(b_dom, a_dom), a_val, b_val))
    return PiecewiseMap(tuple(pieces), points)


def level_reindex(level: AscentLevel, sigma: PiecewiseMap) -> list:
    """Pieces of the family i -> level(sigma(i)), for i in sigma's domain.

    Returns (cells, exceptions) fragments to be assembled into a level by
    the caller (who may combine several routed fragments)."""
    cells: list[Cell] = []
    exc: list[tuple[int, SymNode]] = []
    level_exc = level.exc_dict()
    for i0, v in sigma.points:
        exc.append((i0, level.at(v)))
    for mp in sigma.pieces:
        # values {mp.b + mp.a * m}: route into the level's pieces
        for lc in level.cells:
            sol = solve_congruence(mp.a, lc.ap.start - mp.b, lc.ap.step)
            if sol is None:
                continue
            m0, mstep = sol
            while mp.a * m0 + mp.b < lc.ap.start:
                m0 += mstep
            # domain sub-progression: positions m = m0 + mstep*k of mp.ap
            dom_ap = AP(mp.ap.member(m0), mp.ap.step * mstep)
            a_pos = (mp.a * mstep) // lc.ap.step
            b_pos = (mp.a * m0 + mp.b - lc.ap.start) // lc.ap.step
            cells.append(Cell(dom_ap, lc.template.reindex(a_pos, b_pos)))
        for k in level_exc:
            if k >= mp.b and (k - mp.b) % mp.a == 0:
                m = (k - mp.b) // mp.a
                exc.append((mp.ap.member(m), level_exc[k]))
    # routed cells cover {i : sigma(i) in some level cell} and the exception
    # entries the rest of sigma's domain; the two are disjoint because level
    # cells exclude exception keys
    seen: dict[int, SymNode] = {}
    for k, v in exc:
        if k in seen and seen[k] != v:
            raise ValueError(f"conflicting reindex at {k}")
        seen[k] = v
    return cells, tuple(sorted(seen.items()))
