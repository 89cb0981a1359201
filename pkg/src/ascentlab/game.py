"""The descending game on the dense triple set and the second player's
winning strategy.

Convention: II moves at even stages including 0 and limits, I at odd
stages; II wins when the run reaches the requested length. II's recipe:
stage 0 the maximal triple, stage 2 a top one-step with a fresh injective
family of auxiliary branches, stage alpha+2 a one-step over the previous
even stage's height (its below parts then repeat that stage's values, which
is what keeps the auxiliary branches exclusive), limit stages the chain
amalgamation over the even sub-run.

Runs whose length passes a limit play an explicit prefix and then require
the opponent to be eventually uniform; the remaining stages are generated
by the declared rule, and the limit move consumes the resulting described
chain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .foundations import DEFAULT_X, FULL_SET, Ordinal, XSequence, ZERO, W_LIMIT
from .ascent import AP, Cell, standard_append, supp
from .nodes import Ramp, graft
from .conditions import (
    Condition, S_X, leq_s, one_step_extension, root_condition,
)
from .amalgam import (
    ChainDescriptor, ChainMember, ChainTail, HypothesisViolated, ZMap,
    amalgamate, check_z_bullets,
)
from .fixtures import odd_label


class NotIIsTurn(ValueError):
    pass


class StateCorrupt(ValueError):
    pass


EXPLICIT_STAGES = 7  # stages 0..6 are played concretely before a limit jump


@dataclass(frozen=True, slots=True)
class Move:
    stage: Ordinal
    mover: str                      # "I" or "II"
    cond: Condition
    z: Optional[ZMap] = None


@dataclass(frozen=True, slots=True)
class Transcript:
    mu: Ordinal
    xi: int
    moves: tuple[Move, ...]
    verdict: str                    # II_completed | I_stuck | illegal_opponent
    illegal_stage: Optional[Ordinal] = None
    notes: tuple[str, ...] = ()


@dataclass(slots=True)
class GameState:
    """A run in progress; mutated only by its own run."""

    mu: Ordinal
    xi: int
    x: XSequence = DEFAULT_X
    moves: list[Move] = field(default_factory=list)
    opp_base: int = 0               # the uniform opponent label scheme
    z_offset: int = 9

    @property
    def next_stage(self) -> Ordinal:
        if not self.moves:
            return ZERO
        last = self.moves[-1].stage
        return last.succ()

    def at_stage(self, stage: Ordinal) -> Move:
        for mv in self.moves:
            if mv.stage == stage:
                return mv
        raise StateCorrupt(f"stage {stage} missing from the run")

    def even_members(self, below: Ordinal) -> list[ChainMember]:
        out = []
        for mv in self.moves:
            if mv.z is not None and ZERO < mv.stage < below:
                out.append(ChainMember(mv.stage, mv.cond, mv.z))
        return out


def _fresh_z(cond: Condition, lo: Ordinal, mu: Ordinal, offset: int) -> ZMap:
    """Stage-2 style auxiliary family: below the top everything repeats the
    0-column, the appended labels are fresh odds, injectively keyed. Blocks
    strictly between the stage and the run length contribute whole cells."""
    eta = cond.eta
    base = cond.top.at(0).restrict(eta.pred())
    cells = [(lo.w, Cell(AP(lo.n + 1, 1),
                         base.append(Ramp(16, 16 * (lo.n + 1) + 1 + 32 * offset))))]
    entries = {}
    for w in range(lo.w + 1, mu.w + 1):
        if w < mu.w:
            cells.append((w, Cell(AP(0, 1),
                                  base.append(Ramp(16, 2 * w + 1 + 32 * offset)))))
        else:
            for n in range(mu.n):
                key = Ordinal(w, n)
                entries[key] = base.append(odd_label(key, offset))
    return ZMap.make(lo, mu, False, tuple(cells), entries)


def _z_graft_step(prev: ZMap, new_lo: Ordinal, cond: Condition, offset: int) -> ZMap:
    """Successor-stage auxiliary family: every branch grows by the 0-column's
    values and one fresh odd label."""
    eta = cond.eta
    col0 = cond.top.at(0).restrict(eta.pred())
    cells = []
    for w, cell in prev.cells:
        ap, tmpl = cell.ap, cell.template
        if w == new_lo.w and ap.start <= new_lo.n:
            skip = (new_lo.n - ap.start) // ap.step + 1
            ap = AP(ap.member(skip), ap.step)
            tmpl = tmpl.reindex(1, skip)
        merged = graft(tmpl, col0).append(
            Ramp(16 * ap.step, 16 * ap.start + 2 * w + 1 + 32 * offset))
        cells.append((w, Cell(ap, merged)))
    entries = []
    for k, v in prev.entries:
        if k <= new_lo:
            continue
        entries.append((k, graft(v, col0).append(odd_label(k, offset))))
    return ZMap.make(new_lo, prev.hi, prev.closed_hi, cells, entries)


def strategy_ii_move(state: GameState, stage: Optional[Ordinal] = None) -> Move:
    """II's move at the current stage (or an explicit one after a limit
    jump); raises NotIIsTurn off turn."""
    stage = stage if stage is not None else state.next_stage
    if stage.n % 2 == 1:
        raise NotIIsTurn(f"stage {stage} belongs to I")
    if stage.is_zero:
        return Move(stage, "II", root_condition(S_X, state.x))
    if stage.is_limit:
        return _limit_move(state, stage)
    prev = state.at_stage(stage.pred())
    if stage == Ordinal(0, 2):
        cond = one_step_extension(prev.cond, prev.cond.eta)
        z = _fresh_z(cond, stage, state.mu, state.z_offset)
    else:
        alpha = state.at_stage(Ordinal(stage.w, stage.n - 2))
        cond = one_step_extension(prev.cond, alpha.cond.eta)
        if alpha.z is None:
            raise StateCorrupt(f"stage {alpha.stage} lacks its auxiliary family")
        z = _z_graft_step(alpha.z, stage, cond, state.z_offset)
    check_z_bullets(stage, cond, z, state.mu, False)
    return Move(stage, "II", cond, z)


def _game_tail(state: GameState) -> ChainTail:
    """The uniform continuation: I appends with its declared labels, II with
    the standard ones; each branch repeats the 0-column value then its own
    label."""
    top = state.moves[-1].cond.top
    opp_scheme = standard_append(top, shift=state.opp_base)
    ii_scheme = standard_append(top)
    zero_entry = 2 * state.opp_base
    return ChainTail(2, (opp_scheme, ii_scheme), ((("const", zero_entry)), ("last",)))


def _limit_move(state: GameState, stage: Ordinal) -> Move:
    members = state.even_members(stage)
    if not members:
        raise StateCorrupt("limit stage reached with no even history")
    ch = ChainDescriptor(tuple(members), _game_tail(state), stage, state.mu)
    cond, z = amalgamate(ch)
    return Move(stage, "II", cond, z)


@dataclass(frozen=True, slots=True)
class OpponentPolicy:
    """I's behaviour: a free explicit phase plus, for runs over a limit, a
    mandatory uniform rule (top one-steps with the given label scheme)."""

    name: str
    explicit: Callable[[Condition, Ordinal, random.Random], Condition]
    uniform_base: Optional[int] = 0
    seed: int = 0

    @property
    def uniform(self) -> bool:
        return self.uniform_base is not None


def onestep_opponent(label_base: int = 0) -> OpponentPolicy:
    def go(cond: Condition, stage: Ordinal, rng: random.Random) -> Condition:
        return one_step_extension(cond, cond.eta, label_base=label_base)
    return OpponentPolicy(f"onestep[{label_base}]", go, uniform_base=label_base)


def random_opponent(seed: int, uniform_base: Optional[int] = 0) -> OpponentPolicy:
    """Random legal one-steps during the explicit phase."""
    def go(cond: Condition, stage: Ordinal, rng: random.Random) -> Condition:
        beta = Ordinal(cond.eta.w, rng.randrange(0, cond.eta.n + 1)) \
            if cond.eta.w == 0 else cond.eta
        return one_step_extension(cond, beta, label_base=rng.randrange(0, 3))
    return OpponentPolicy(f"random[{seed}]", go, uniform_base=uniform_base, seed=seed)


def misbehaving_opponent(bad_stage: Ordinal) -> OpponentPolicy:
    """Returns a non-extending triple at the given stage (for tests)."""
    def go(cond: Condition, stage: Ordinal, rng: random.Random) -> Condition:
        if stage == bad_stage:
            return root_condition(S_X, cond.x)
        return one_step_extension(cond, cond.eta)
    return OpponentPolicy(f"illegal@{bad_stage}", go)


def _legal(prev: Condition, new: Condition, xi: int, x: XSequence) -> bool:
    """Move legality: a strict extension in the triple order. Stalling moves
    are rejected as a game convention, since runs of limit length need the
    heights to climb."""
    if new.variant != S_X or not leq_s(new, prev) or not (new.eta > prev.eta):
        return False
    return x.entry(xi).is_subset(supp(prev.top, new.top))


def play_game(mu: Ordinal, opponent: OpponentPolicy, xi: int,
              x: XSequence = DEFAULT_X) -> Transcript:
    """Alternating run from the maximal triple; II plays the strategy, I the
    policy. A limit run requires a uniform opponent; illegal moves forfeit."""
    if mu.w > W_LIMIT:
        raise ValueError("game length beyond the ordinal bound")
    if mu.w > 0 and not opponent.uniform:
        raise ValueError("limit-length runs need an eventually uniform opponent")
    rng = random.Random(opponent.seed)
    state = GameState(mu, xi, x, opp_base=opponent.uniform_base or 0)
    notes: list[str] = []
    stage = ZERO
    while stage < mu:
        if stage.n % 2 == 0:
            state.moves.append(strategy_ii_move(state, stage))
        else:
            prev = state.moves[-1].cond
            if stage.n >= EXPLICIT_STAGES and mu.w > stage.w:
                # enter the uniform phase: everything up to the next limit is
                # generated by the rule and certified by the chain validation
                notes.append(f"stages {stage}.. follow the uniform rule")
                stage = Ordinal(stage.w + 1, 0)
                continue
            cand = opponent.explicit(prev, stage, rng)
            if not _legal(prev, cand, xi, x):
                return Transcript(mu, xi, tuple(state.moves), "illegal_opponent",
                                  stage, tuple(notes))
            state.moves.append(Move(stage, "I", cand))
        stage = state.next_stage
    return Transcript(mu, xi, tuple(state.moves), "II_completed", None, tuple(notes))


@dataclass(frozen=True, slots=True)
class InvariantReport:
    ok: bool
    failures: tuple[str, ...] = ()


def check_run_invariants(t: Transcript, x: XSequence = DEFAULT_X) -> InvariantReport:
    """Re-verify the three strategy requirements over the whole transcript:
    filter support between all stages, the auxiliary-branch requirements at
    even stages, full support and branch coherence between even stages."""
    fails: list[str] = []
    moves = t.moves
    xxi = x.entry(t.xi)
    for i, a in enumerate(moves):
        for b in moves[i + 1:]:
            if not leq_s(b.cond, a.cond):
                fails.append(f"(order) stage {b.stage} does not extend {a.stage}")
                continue
            s = supp(a.cond.top, b.cond.top)
            if not xxi.is_subset(s):
                fails.append(f"(i) stages {a.stage},{b.stage}: support misses the filter set")
            if a.z is not None and b.z is not None and s != FULL_SET:
                fails.append(f"(iii) even stages {a.stage},{b.stage}: support not full")
    for mv in moves:
        if mv.z is None:
            continue
        try:
            check_z_bullets(mv.stage, mv.cond, mv.z, t.mu, False)
        except HypothesisViolated as e:
            fails.append(f"(ii) stage {mv.stage}: {e.bullet}")
    evens = [mv for mv in moves if mv.z is not None]
    for a, b in zip(evens, evens[1:]):
        for k in a.z.probe_keys():
            if b.z.in_domain(k):
                va, vb = a.z.at(k), b.z.at(k)
                if vb.restrict(va.dom) != va:
                    fails.append(f"(iii) branch {k} not increasing at stage {b.stage}")
    return InvariantReport(not fails, tuple(fails))
