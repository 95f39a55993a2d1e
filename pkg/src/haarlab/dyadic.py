"""Dyadic intervals of [0, 1) and finite collections of them.

An interval is the pair ``(level, pos)`` standing for
``[pos * 2**-level, (pos + 1) * 2**-level)``.  Tuple order on the pair is the
canonical order used for every tie-break in the package (shallower first,
then left to right).
"""
from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

from haarlab.rational import ZERO, DyadicRational


class _Pair(NamedTuple):
    level: int
    pos: int


class Interval(_Pair):
    __slots__ = ()

    def __new__(cls, level: int, pos: int):
        if level < 0 or not 0 <= pos < (1 << level):
            raise ValueError(f"no dyadic interval at level {level}, position {pos}")
        return super().__new__(cls, level, pos)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        try:
            n, k = text.strip().split(":")
            return cls(int(n), int(k))
        except ValueError as exc:
            raise ValueError(f"bad interval {text!r}; expected 'level:pos'") from exc

    def __str__(self) -> str:
        return f"{self.level}:{self.pos}"

    @property
    def measure(self) -> DyadicRational:
        return DyadicRational(1, self.level)

    @property
    def left(self) -> DyadicRational:
        return DyadicRational(self.pos, self.level)

    @property
    def right(self) -> DyadicRational:
        return DyadicRational(self.pos + 1, self.level)

    def contains(self, other: "Interval") -> bool:
        d = other.level - self.level
        return d >= 0 and (other.pos >> d) == self.pos

    def children(self) -> tuple["Interval", "Interval"]:
        return (Interval(self.level + 1, 2 * self.pos), Interval(self.level + 1, 2 * self.pos + 1))

    def parent(self) -> "Interval":
        if self.level == 0:
            raise ValueError("[0,1) has no parent")
        return Interval(self.level - 1, self.pos >> 1)

    def ancestor(self, level: int) -> "Interval":
        return Interval(level, self.pos >> (self.level - level))

    def ancestors(self) -> Iterator["Interval"]:
        """Strict ancestors, nearest first."""
        for lv in range(self.level - 1, -1, -1):
            yield Interval(lv, self.pos >> (self.level - lv))

    def cells(self, grid_level: int) -> range:
        """Indices of the level-``grid_level`` cells making up this interval."""
        if grid_level < self.level:
            raise ValueError(f"grid level {grid_level} is coarser than {self}")
        shift = grid_level - self.level
        return range(self.pos << shift, (self.pos + 1) << shift)


def contains(I: Interval, J: Interval) -> bool:
    """True iff ``J`` is a subset of ``I``."""
    return I.contains(J)


def disjoint(I: Interval, J: Interval) -> bool:
    return not (I.contains(J) or J.contains(I))


def level_intervals(n: int) -> tuple[Interval, ...]:
    return tuple(Interval(n, k) for k in range(1 << n))


def all_intervals(depth: int) -> tuple[Interval, ...]:
    """All intervals of level at most ``depth`` in canonical order."""
    return tuple(I for n in range(depth + 1) for I in level_intervals(n))


class IntervalCollection:
    """An immutable finite set of dyadic intervals iterated in canonical order."""

    __slots__ = ("_members", "_sorted")

    def __init__(self, members: Iterable[Interval] = (), *, allow_duplicates: bool = False):
        items = [m if isinstance(m, Interval) else Interval(*m) for m in members]
        s = frozenset(items)
        if not allow_duplicates and len(s) != len(items):
            seen, dup = set(), None
            for m in items:
                if m in seen:
                    dup = m
                    break
                seen.add(m)
            raise ValueError(f"duplicate interval {dup} in collection")
        self._members = s
        self._sorted = tuple(sorted(s))

    @classmethod
    def parse(cls, text: str) -> "IntervalCollection":
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        return cls(Interval.parse(p) for p in parts)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._sorted)

    def __len__(self) -> int:
        return len(self._sorted)

    def __contains__(self, item) -> bool:
        return item in self._members

    def __eq__(self, other) -> bool:
        if isinstance(other, IntervalCollection):
            return self._members == other._members
        if isinstance(other, (set, frozenset)):
            return self._members == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return "IntervalCollection({" + ", ".join(str(I) for I in self._sorted) + "})"

    def __str__(self) -> str:
        return ",".join(str(I) for I in self._sorted)

    def __or__(self, other) -> "IntervalCollection":
        return IntervalCollection(self._members | frozenset(other))

    @property
    def members(self) -> frozenset:
        return self._members

    @property
    def depth(self) -> int:
        return max((I.level for I in self._sorted), default=0)

    def maximal(self) -> "IntervalCollection":
        return IntervalCollection(_maximal(self._members))

    def below(self, I: Interval) -> "IntervalCollection":
        """Members contained in ``I`` (including ``I`` itself)."""
        return IntervalCollection(J for J in self._sorted if I.contains(J))


def _as_set(E) -> frozenset:
    if isinstance(E, IntervalCollection):
        return E.members
    return frozenset(E)


def _maximal(members: frozenset) -> list[Interval]:
    return [I for I in members if not any(A in members for A in I.ancestors())]


def cover_measure(E) -> DyadicRational:
    """Exact Lebesgue measure of the union of ``E``."""
    total = ZERO
    for I in _maximal(_as_set(E)):
        total = total + I.measure
    return total


def g1(I: Interval, E) -> IntervalCollection:
    """Maximal members of ``E`` strictly contained in ``I``."""
    members = _as_set(E)
    out = []
    for J in members:
        if J.level > I.level and I.contains(J):
            if not any(J.ancestor(lv) in members for lv in range(I.level + 1, J.level)):
                out.append(J)
    return IntervalCollection(out)


def g1_all(E) -> dict[Interval, list[Interval]]:
    """``G_1(K|E)`` for every ``K`` in ``E`` in one pass (children in the ``E``-tree)."""
    members = _as_set(E)
    out: dict[Interval, list[Interval]] = {K: [] for K in members}
    for J in members:
        parent = next((A for A in J.ancestors() if A in members), None)
        if parent is not None:
            out[parent].append(J)
    return out


def gn(K: Interval, E, n: int) -> IntervalCollection:
    """The ``n``-th generation of ``E`` underneath ``K``."""
    if n < 1:
        raise ValueError("generation index must be >= 1")
    members = _as_set(E)
    current = g1(K, members)
    for _ in range(n - 1):
        nxt: list[Interval] = []
        for J in current:
            nxt.extend(g1(J, members))
        current = IntervalCollection(nxt)
    return current


def carleson_sums(C) -> dict[Interval, DyadicRational]:
    """``(1/|I|) * sum_{J in C, J <= I} |J|`` for every ``I`` in ``C``."""
    members = _as_set(C)
    acc = {I: 0 for I in members}
    # integer accumulation at a common scale 2**-depth
    depth = max((I.level for I in members), default=0)
    for J in members:
        w = 1 << (depth - J.level)
        acc[J] += w
        for A in J.ancestors():
            if A in acc:
                acc[A] += w
    return {I: DyadicRational(s, depth - I.level) for I, s in acc.items()}


def carleson_constant(C) -> DyadicRational:
    members = _as_set(C)
    if not members:
        raise ValueError("Carleson constant of an empty collection is undefined")
    return max(carleson_sums(members).values())


def is_block(B, L) -> bool:
    """Block test: unique maximal interval and order-convexity inside ``L``."""
    bset, lset = _as_set(B), _as_set(L)
    if not bset <= lset:
        extra = sorted(bset - lset)[0]
        raise ValueError(f"block member {extra} is not in the ambient collection")
    tops = _maximal(bset)
    if len(tops) != 1:
        return False
    top = tops[0]
    for J in bset:
        for lv in range(top.level + 1, J.level):
            K = J.ancestor(lv)
            if K in lset and K not in bset:
                return False
    return True


def condensation_score(C, n: int) -> tuple[Interval, DyadicRational]:
    """The ``K`` in ``C`` maximising ``|G_n(K|C)*| / |K|`` together with that score."""
    members = _as_set(C)
    if not members:
        raise ValueError("condensation score of an empty collection is undefined")
    best_K, best = None, None
    for K in sorted(members):
        score = cover_measure(gn(K, members, n)) / K.measure
        if best is None or score > best:
            best_K, best = K, score
    return best_K, best
