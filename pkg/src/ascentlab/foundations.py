"""Ordinal scale, exact algebra of ultimately periodic subsets of omega,
and decreasing set sequences with their generated filter and dual ideal.

Everything here is immutable and every operation is a pure function, so
values can be shared freely. Heights live below omega*W for a small
configurable block bound W; sets of naturals are restricted to the
ultimately periodic class, where boolean algebra and filter membership
are exactly decidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

# Comparison verdicts for ord_compare.
LT, EQ, GT = -1, 0, 1

# Block bound W: ordinals are omega*w + n with w <= W_LIMIT.
W_LIMIT = 3


class OrdinalBoundError(ValueError):
    """Height exceeds the configured omega*W bound."""


class BadHeight(ValueError):
    """An evaluation or restriction point lies outside a node's domain."""


@dataclass(frozen=True, slots=True, order=True)
class Ordinal:
    """Ordinal below omega*W in normal form omega*w + n.

    Comparison is lexicographic on (w, n), which the derived dataclass
    order provides directly.
    """

    w: int = 0
    n: int = 0

    def __post_init__(self) -> None:
        if self.w < 0 or self.n < 0:
            raise ValueError(f"negative ordinal parts ({self.w}, {self.n})")
        if self.w > W_LIMIT:
            raise OrdinalBoundError(f"omega*{self.w}+{self.n} exceeds omega*{W_LIMIT}")

    @property
    def is_zero(self) -> bool:
        return self.w == 0 and self.n == 0

    @property
    def is_limit(self) -> bool:
        return self.n == 0 and self.w >= 1

    @property
    def is_successor(self) -> bool:
        return self.n > 0

    @property
    def is_finite(self) -> bool:
        return self.w == 0

    def succ(self) -> "Ordinal":
        return Ordinal(self.w, self.n + 1)

    def pred(self) -> "Ordinal":
        if self.n == 0:
            raise ValueError(f"{self} is not a successor")
        return Ordinal(self.w, self.n - 1)

    def plus(self, k: int) -> "Ordinal":
        return Ordinal(self.w, self.n + k)

    def next_limit(self) -> "Ordinal":
        """The least limit ordinal strictly above self."""
        return Ordinal(self.w + 1, 0)

    def __repr__(self) -> str:
        if self.w == 0:
            return str(self.n)
        head = "w" if self.w == 1 else f"w{self.w}"
        return head if self.n == 0 else f"{head}+{self.n}"


ZERO = Ordinal(0, 0)
OMEGA = Ordinal(1, 0)

# Extended natural for level sizes / quotient cardinalities: int or OMEGA_NAT.
OMEGA_NAT = math.inf


def ord_compare(a: Ordinal, b: Ordinal) -> int:
    """Lexicographic comparison on (w, n); returns LT, EQ or GT."""
    if (a.w, a.n) < (b.w, b.n):
        return LT
    if (a.w, a.n) > (b.w, b.n):
        return GT
    return EQ


def solve_congruence(a: int, b: int, m: int) -> Optional[tuple[int, int]]:
    """Solve a*x = b (mod m) for x; returns (x0, step) with the full solution
    set {x0 + k*step} over the integers, or None if unsolvable. m >= 1."""
    if m == 1:
        return 0, 1
    g = math.gcd(a, m)
    if b % g != 0:
        return None
    m2 = m // g
    a2, b2 = (a // g) % m2, (b // g) % m2
    x0 = (b2 * pow(a2, -1, m2)) % m2
    return x0, m2


@dataclass(frozen=True, slots=True)
class AP:
    """Infinite arithmetic progression {start + m*step : m >= 0}."""

    start: int
    step: int

    def __post_init__(self) -> None:
        if self.step < 1 or self.start < 0:
            raise ValueError(f"bad progression ({self.start}, {self.step})")

    def __contains__(self, k: int) -> bool:
        return k >= self.start and (k - self.start) % self.step == 0

    def position(self, k: int) -> int:
        if k not in self:
            raise ValueError(f"{k} not in {self}")
        return (k - self.start) // self.step

    def member(self, m: int) -> int:
        return self.start + m * self.step

    def intersect(self, other: "AP") -> Optional["AP"]:
        sol = solve_congruence(self.step, other.start - self.start, other.step)
        if sol is None:
            return None
        m0, mstep = sol
        # smallest member of self with position = m0 (mod mstep) that is >= other.start
        k = self.member(m0)
        stride = self.step * mstep
        if k < other.start:
            k += ((other.start - k + stride - 1) // stride) * stride
        return AP(k, stride)

    def upset(self) -> "UPSet":
        return UPSet.make(self.start, self.step, frozenset({self.start % self.step}), frozenset())

    def __repr__(self) -> str:
        return f"AP({self.start}+{self.step}m)"


@dataclass(frozen=True, slots=True)
class UPSet:
    """Ultimately periodic subset of omega in canonical normal form.

    Membership of k >= threshold depends only on k mod period; members below
    the threshold are listed explicitly in `low`. The constructor `make`
    minimizes the period and then the threshold, so structural equality
    coincides with extensional equality.
    """

    threshold: int
    period: int
    residues: frozenset[int]
    low: frozenset[int]

    @staticmethod
    def make(threshold: int, period: int, residues: frozenset[int] | set[int],
             low: frozenset[int] | set[int] = frozenset()) -> "UPSet":
        if period < 1 or threshold < 0:
            raise ValueError("period must be >= 1 and threshold >= 0")
        residues = frozenset(r % period for r in residues)
        low = frozenset(k for k in low if 0 <= k < threshold)
        # minimal period: smallest divisor d of period whose classes refine residues
        for d in _divisors(period):
            proj = frozenset(r % d for r in residues)
            if frozenset(r for r in range(period) if r % d in proj) == residues:
                period, residues = d, proj
                break
        # minimal threshold: absorb low points that already match the rule
        t = threshold
        low_set = set(low)
        while t > 0:
            k = t - 1
            if (k in low_set) == (k % period in residues):
                low_set.discard(k)
                t = k
            else:
                break
        return UPSet(t, period, residues, frozenset(low_set))

    @staticmethod
    def from_window(members, period: int, threshold: int) -> "UPSet":
        """Build from explicit members on [0, threshold+period); the rest repeats."""
        members = set(members)
        residues = frozenset(k % period for k in members if threshold <= k < threshold + period)
        return UPSet.make(threshold, period, residues, frozenset(k for k in members if k < threshold))

    def __contains__(self, k: int) -> bool:
        if k < 0:
            return False
        if k < self.threshold:
            return k in self.low
        return k % self.period in self.residues

    # -- algebra ---------------------------------------------------------

    def _combine(self, other: "UPSet", op) -> "UPSet":
        p = math.lcm(self.period, other.period)
        t = max(self.threshold, other.threshold)
        # beyond t, membership on both sides depends only on k mod p
        residues = frozenset(r for r in range(p)
                             if op((t + ((r - t) % p)) in self, (t + ((r - t) % p)) in other))
        low = frozenset(k for k in range(t) if op(k in self, k in other))
        return UPSet.make(t, p, residues, low)

    def union(self, other: "UPSet") -> "UPSet":
        return self._combine(other, lambda a, b: a or b)

    def intersect(self, other: "UPSet") -> "UPSet":
        return self._combine(other, lambda a, b: a and b)

    def difference(self, other: "UPSet") -> "UPSet":
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> "UPSet":
        return UPSet.make(self.threshold, self.period,
                          frozenset(range(self.period)) - self.residues,
                          frozenset(range(self.threshold)) - self.low)

    # -- queries ---------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.residues and not self.low

    @property
    def is_finite(self) -> bool:
        return not self.residues

    def is_cobounded(self) -> bool:
        return len(self.residues) == self.period

    def is_subset(self, other: "UPSet") -> bool:
        return self.difference(other).is_empty

    def disjoint(self, other: "UPSet") -> bool:
        return self.intersect(other).is_empty

    def members(self, bound: int) -> list[int]:
        return [k for k in range(bound) if k in self]

    def iter_members(self) -> Iterator[int]:
        k = 0
        while True:
            if k in self:
                yield k
            k += 1

    def min_member(self) -> int:
        if self.is_empty:
            raise ValueError("empty set has no minimum")
        return next(iter(self.iter_members()))

    def max_member(self) -> int:
        if not self.is_finite:
            raise ValueError("infinite set has no maximum")
        if not self.low:
            raise ValueError("empty set has no maximum")
        return max(self.low)

    def rank(self, k: int) -> int:
        """Number of members strictly below k."""
        if k <= self.threshold:
            return sum(1 for j in self.low if j < k)
        full, rem = divmod(k - self.threshold, self.period)
        head = sum(1 for r in range(rem) if (self.threshold + r) % self.period in self.residues)
        return len(self.low) + full * len(self.residues) + head

    def nth(self, n: int) -> int:
        """The n-th member (0-based)."""
        lows = sorted(self.low)
        if n < len(lows):
            return lows[n]
        if not self.residues:
            raise ValueError(f"set has only {len(lows)} members")
        n -= len(lows)
        offs = [r for r in range(self.period)
                if (self.threshold + r) % self.period in self.residues]
        q, r = divmod(n, len(offs))
        return self.threshold + q * self.period + offs[r]

    def to_aps(self) -> tuple[list[AP], list[int]]:
        """Decompose into infinite arithmetic progressions plus a finite patch."""
        aps = []
        for r in range(self.period):
            if (self.threshold + r) % self.period in self.residues:
                aps.append(AP(self.threshold + r, self.period))
        return aps, sorted(self.low)

    def __repr__(self) -> str:
        if self.is_empty:
            return "UPSet{}"
        shown = self.members(min(self.threshold + 2 * self.period, 24))
        tail = "" if self.is_finite else ",..."
        return "UPSet{" + ",".join(map(str, shown)) + tail + "}"


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


EMPTY_SET = UPSet.make(0, 1, frozenset())
FULL_SET = UPSet.make(0, 1, frozenset({0}))
EVENS = UPSet.make(0, 2, frozenset({0}))
ODDS = UPSet.make(0, 2, frozenset({1}))


def multiples(k: int, start: int = 0) -> UPSet:
    """Multiples of k that are >= start."""
    return UPSet.make(start, k, frozenset({0}))


def singleton(k: int) -> UPSet:
    return UPSet.make(k + 1, 1, frozenset(), frozenset({k}))


def finite_set(ks) -> UPSet:
    ks = frozenset(ks)
    return UPSet.make(max(ks) + 1 if ks else 0, 1, frozenset(), ks)


def upset_algebra(kind: str, a: UPSet, b: Optional[UPSet] = None) -> UPSet:
    """Exact boolean algebra dispatcher; `b` is required unless kind=complement."""
    if kind == "complement":
        return a.complement()
    if b is None:
        raise ValueError(f"operation {kind} needs a second operand")
    if kind == "union":
        return a.union(b)
    if kind == "intersect":
        return a.intersect(b)
    if kind == "difference":
        return a.difference(b)
    raise ValueError(f"unknown operation {kind!r}")


def is_cobounded(y: UPSet) -> bool:
    """True iff omega minus y is finite."""
    return y.is_cobounded()


# ---------------------------------------------------------------------------
# X-sequences, the generated filter F and its dual ideal I
# ---------------------------------------------------------------------------


class UndecidableRepresentation(ValueError):
    """A set outside the ultimately periodic class reached the filter
    decision procedure. Library-produced sets are always in the class, so
    this can only be raised for foreign implementations of the interface."""


class ProfileViolation(ValueError):
    """The X-sequence fails a required structural profile."""


@dataclass(frozen=True, slots=True)
class XSequence:
    """Decreasing sequence X_0 ⊇ X_1 ⊇ ... of nonempty subsets of omega
    with empty intersection, given by a head set and a scaled tail:
    X_n = {base*k : k >= n} for n >= 1.

    The generated filter is F = {Y : some X_n ⊆ Y}; the dual ideal is
    I = {Y : some X_n ∩ Y = empty}. Both are decided exactly.
    """

    x0: UPSet
    base: int = 4

    def entry(self, n: int) -> UPSet:
        if n < 0:
            raise ValueError("index must be a natural")
        if n == 0:
            return self.x0
        return multiples(self.base, self.base * n)

    def validate(self, profile: str = "s3") -> None:
        """Raise ProfileViolation unless the sequence satisfies the profile.

        profile s3: decreasing, nonempty entries, co-infinite X_0, empty
        intersection. profile s4 additionally: X_0 minus X_1 infinite.
        """
        if self.base < 2:
            raise ProfileViolation("tail base must be >= 2")
        if self.x0.is_empty:
            raise ProfileViolation("X_0 is empty")
        if not self.entry(1).is_subset(self.x0):
            raise ProfileViolation("X_1 is not a subset of X_0")
        if self.x0.is_cobounded():
            raise ProfileViolation("omega minus X_0 must be infinite")
        # empty intersection: every k eventually leaves (k not in X_n once base*n > k)
        if profile == "s4":
            if not _is_infinite(self.x0.difference(self.entry(1))):
                raise ProfileViolation("X_0 minus X_1 must be infinite")
        elif profile != "s3":
            raise ValueError(f"unknown profile {profile!r}")

    def escape_index(self, k: int) -> int:
        """A witness n with k not in X_n; exists for every k (empty intersection)."""
        n = k // self.base + 1
        if k in self.entry(n):
            n += 1
        assert k not in self.entry(n)
        return n

    def escape_finite(self, points) -> int:
        """A single n with X_n disjoint from the given finite set of points."""
        n = 1
        for k in points:
            n = max(n, self.escape_index(k))
        return n


def _is_infinite(y: UPSet) -> bool:
    return not y.is_finite


DEFAULT_X = XSequence(EVENS, 4)


@dataclass(frozen=True, slots=True)
class FilterVerdict:
    """Outcome of filter_classify: exactly one of the three kinds holds."""

    kind: str  # "in_filter" | "in_ideal" | "neither"
    witness: Optional[int] = None

    @property
    def in_filter(self) -> bool:
        return self.kind == "in_filter"

    @property
    def in_ideal(self) -> bool:
        return self.kind == "in_ideal"


def _scaled_preimage(y: UPSet, base: int) -> UPSet:
    """{k : base*k in y}, again ultimately periodic."""
    g = math.gcd(base, y.period)
    period = y.period // g
    threshold = (y.threshold + base - 1) // base
    members = [k for k in range(threshold + period) if (base * k) in y]
    return UPSet.from_window(members, period, threshold)


def filter_classify(y: UPSet, x: XSequence = DEFAULT_X) -> FilterVerdict:
    """Decide membership of y in the filter F generated by x, the dual
    ideal I, or neither. Returned witnesses re-validate: in_filter(n)
    means X_n ⊆ y, in_ideal(n) means X_n ∩ y = empty.
    """
    if not isinstance(y, UPSet):
        raise UndecidableRepresentation(f"cannot classify {type(y).__name__}")
    z = _scaled_preimage(y, x.base)
    # X_n ⊆ y for n >= 1 iff [n, inf) ⊆ z
    if z.is_cobounded():
        n = max(1, z.threshold)
        while n > 1 and (n - 1) in z:
            n -= 1
        assert x.entry(n).is_subset(y)
        return FilterVerdict("in_filter", n)
    if z.is_finite:
        n = max(1, (z.max_member() + 1) if not z.is_empty else 1)
        assert x.entry(n).disjoint(y)
        return FilterVerdict("in_ideal", n)
    return FilterVerdict("neither")


def in_filter(y: UPSet, x: XSequence = DEFAULT_X) -> bool:
    return filter_classify(y, x).in_filter
