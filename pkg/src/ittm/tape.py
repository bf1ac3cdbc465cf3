"""Finitely described 0/1 tapes over an ordinal length.

A tape is a read-only *base* predicate with two interval-set overlays on top:
cells in ``ones`` read 1, cells in ``zeros`` read 0, everything else reads
from the base.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Optional

from .ordinal import ONE, ZERO, add, as_ordinal, godel_pair, parse, to_literal


class TapeError(Exception):
    pass


class OutOfRange(TapeError):
    pass


class WriteForbidden(TapeError):
    pass


class IncompatibleSnapshots(TapeError):
    pass


def _start(iv):
    return iv[0]


class IntervalSet:
    """Sorted, disjoint, non-adjacent half-open ordinal intervals."""

    __slots__ = ("intervals", "_hash")

    def __init__(self, intervals=()):
        self.intervals = _normalize([(as_ordinal(lo), as_ordinal(hi)) for lo, hi in intervals])
        self._hash = None

    @classmethod
    def _trusted(cls, intervals):
        self = object.__new__(cls)
        self.intervals = tuple(intervals)
        self._hash = None
        return self

    def __bool__(self):
        return bool(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.intervals)
        return self._hash

    def __repr__(self):
        body = ", ".join(f"[{lo}, {hi})" for lo, hi in self.intervals)
        return f"IntervalSet({body})"

    def __contains__(self, x):
        x = as_ordinal(x)
        i = bisect_right(self.intervals, x, key=_start) - 1
        return i >= 0 and x < self.intervals[i][1]

    def union(self, other):
        return IntervalSet._trusted(_normalize(list(self.intervals) + list(other.intervals)))

    def intersection(self, other):
        out = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet._trusted(out)

    def difference(self, other):
        out = []
        b = other.intervals
        j = 0
        for lo, hi in self.intervals:
            while j < len(b) and b[j][1] <= lo:
                j += 1
            k = j
            cur = lo
            while k < len(b) and b[k][0] < hi:
                if cur < b[k][0]:
                    out.append((cur, b[k][0]))
                if b[k][1] > cur:
                    cur = b[k][1]
                k += 1
            if cur < hi:
                out.append((cur, hi))
        return IntervalSet._trusted(out)

    def _first_ending_after(self, lo):
        iv = self.intervals
        i = bisect_right(iv, lo, key=_start) - 1
        if i < 0:
            return 0
        return i if lo < iv[i][1] else i + 1

    def restrict(self, lo, hi):
        lo, hi = as_ordinal(lo), as_ordinal(hi)
        iv = self.intervals
        out = []
        i = self._first_ending_after(lo)
        while i < len(iv) and iv[i][0] < hi:
            a, b = iv[i]
            out.append((a if lo < a else lo, b if b < hi else hi))
            i += 1
        return IntervalSet._trusted(out)

    def covers(self, lo, hi):
        """True iff ``[lo, hi)`` is contained in a single interval of the set."""
        i = bisect_right(self.intervals, lo, key=_start) - 1
        return i >= 0 and hi <= self.intervals[i][1]

    def meets(self, lo, hi):
        lo, hi = as_ordinal(lo), as_ordinal(hi)
        i = self._first_ending_after(lo)
        return lo < hi and i < len(self.intervals) and self.intervals[i][0] < hi

    def shift(self, d):
        """Image under ``x -> d + x``."""
        d = as_ordinal(d)
        return IntervalSet._trusted(_normalize([(add(d, lo), add(d, hi)) for lo, hi in self.intervals]))

    def relative(self, base):
        """Image under ``x -> x - base`` for sets contained in ``[base, ...)``."""
        from .ordinal import sub
        return IntervalSet._trusted([(sub(lo, base), sub(hi, base)) for lo, hi in self.intervals])

    @property
    def sup(self):
        return self.intervals[-1][1] if self.intervals else ZERO

    @property
    def inf(self):
        return self.intervals[0][0] if self.intervals else None

    def validate(self, alpha=None):
        prev_hi = None
        for lo, hi in self.intervals:
            if not lo < hi:
                raise AssertionError(f"empty interval [{lo}, {hi})")
            if prev_hi is not None and not prev_hi < lo:
                raise AssertionError("intervals overlap or touch")
            if alpha is not None and hi > alpha:
                raise AssertionError(f"interval bound {hi} exceeds tape length {alpha}")
            prev_hi = hi


EMPTY = IntervalSet._trusted(())


def _normalize(intervals):
    ivs = sorted((iv for iv in intervals if iv[0] < iv[1]), key=_start)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


def point(x):
    x = as_ordinal(x)
    return IntervalSet._trusted([(x, add(x, ONE))])


@dataclass(frozen=True)
class Base:
    """Read-only background content of a tape.

    ``constant`` is 0 or 1 for constant bases and ``None`` for opaque
    predicates.  Equality is by ``id`` only.
    """

    id: str
    constant: Optional[int] = None
    predicate: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __call__(self, x):
        if self.constant is not None:
            return self.constant
        return 1 if self.predicate(x) else 0


ZERO_BASE = Base("zero", 0)
ONE_BASE = Base("one", 1)


class TapeContent:
    __slots__ = ("alpha", "base", "ones", "zeros", "read_only", "_hash")

    def __init__(self, alpha, base=ZERO_BASE, ones=EMPTY, zeros=EMPTY, read_only=False):
        self.alpha = as_ordinal(alpha)
        self.base = base
        self.ones = ones if isinstance(ones, IntervalSet) else IntervalSet(ones)
        self.zeros = zeros if isinstance(zeros, IntervalSet) else IntervalSet(zeros)
        if base.constant == 0:
            self.zeros = EMPTY
        elif base.constant == 1:
            self.ones = EMPTY
        self.zeros = self.zeros.difference(self.ones)
        self.read_only = read_only
        self._hash = None

    @classmethod
    def empty(cls, alpha, **kw):
        return cls(alpha, **kw)

    def _replace(self, ones, zeros, read_only=None):
        t = object.__new__(TapeContent)
        t.alpha = self.alpha
        t.base = self.base
        t.ones = ones
        t.zeros = zeros
        t.read_only = self.read_only if read_only is None else read_only
        t._hash = None
        return t

    def __eq__(self, other):
        if not isinstance(other, TapeContent):
            return NotImplemented
        return (self is other) or (
            self.alpha == other.alpha and self.base == other.base
            and self.ones == other.ones and self.zeros == other.zeros
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.alpha, self.base.id, self.ones, self.zeros))
        return self._hash

    def __repr__(self):
        return (f"TapeContent(alpha={self.alpha}, base={self.base.id}, "
                f"ones={list(self.ones)}, zeros={list(self.zeros)})")

    def _check(self, pos):
        pos = as_ordinal(pos)
        if not pos < self.alpha:
            raise OutOfRange(f"cell {pos} outside tape of length {self.alpha}")
        return pos

    def read(self, pos):
        pos = self._check(pos)
        if pos in self.ones:
            return 1
        if pos in self.zeros:
            return 0
        return self.base(pos)

    def write(self, pos, bit):
        if self.read_only:
            raise WriteForbidden("the input tape is never changed")
        pos = self._check(pos)
        if self.read(pos) == bit:
            return self
        cell = point(pos)
        ones, zeros = self.ones.difference(cell), self.zeros.difference(cell)
        if self.base(pos) != bit:
            if bit:
                ones = ones.union(cell)
            else:
                zeros = zeros.union(cell)
        return self._replace(ones, zeros)

    def write_region(self, lo, hi, bit):
        """Set every cell of ``[lo, hi)`` to ``bit``."""
        if self.read_only:
            raise WriteForbidden("the input tape is never changed")
        lo, hi = as_ordinal(lo), as_ordinal(hi)
        if hi > self.alpha:
            raise OutOfRange(f"region end {hi} beyond tape length {self.alpha}")
        if not lo < hi:
            return self
        region = IntervalSet._trusted([(lo, hi)])
        ones, zeros = self.ones.difference(region), self.zeros.difference(region)
        if bit and self.base.constant != 1:
            ones = ones.union(region)
        elif not bit and self.base.constant != 0:
            zeros = zeros.union(region)
        return self._replace(ones, zeros)

    def constant_on(self, lo, hi):
        """The common value of all cells in ``[lo, hi)``, or ``None`` if not uniform
        (or not decidable for an opaque base).  Empty regions return ``None``."""
        lo, hi = as_ordinal(lo), as_ordinal(hi)
        if not lo < hi:
            return None
        if self.ones.covers(lo, hi):
            return 1
        if self.zeros.covers(lo, hi):
            return 0
        if self.ones.meets(lo, hi) or self.zeros.meets(lo, hi):
            if self.base.constant is None:
                return None
            b = self.base.constant
            if b == 0 and not self.ones.meets(lo, hi):
                return 0
            if b == 1 and not self.zeros.meets(lo, hi):
                return 1
            return None
        return self.base.constant

    def segment(self, lo, hi):
        """Overlay structure of ``[lo, hi)`` relative to ``lo``."""
        lo, hi = as_ordinal(lo), as_ordinal(hi)
        return (self.ones.restrict(lo, hi).relative(lo), self.zeros.restrict(lo, hi).relative(lo))

    def with_read_only(self, flag=True):
        return self._replace(self.ones, self.zeros, read_only=flag)

    def validate(self):
        self.ones.validate(self.alpha)
        self.zeros.validate(self.alpha)
        if self.ones.intersection(self.zeros):
            raise AssertionError("overlays intersect")

    def to_json(self):
        return {
            "alpha": to_literal(self.alpha),
            "base": self.base.id,
            "ones": [[to_literal(lo), to_literal(hi)] for lo, hi in self.ones],
            "zeros": [[to_literal(lo), to_literal(hi)] for lo, hi in self.zeros],
        }

    @classmethod
    def from_json(cls, data, bases=None, read_only=False):
        registry = {"zero": ZERO_BASE, "one": ONE_BASE}
        registry.update(bases or {})
        try:
            base = registry[data["base"]]
        except KeyError:
            raise TapeError(f"unknown base {data['base']!r}") from None
        return cls(
            parse(data["alpha"]), base,
            IntervalSet([(parse(lo), parse(hi)) for lo, hi in data.get("ones", [])]),
            IntervalSet([(parse(lo), parse(hi)) for lo, hi in data.get("zeros", [])]),
            read_only=read_only,
        )


def empty(alpha, read_only=False):
    return TapeContent(alpha, read_only=read_only)


def read(t, pos):
    return t.read(pos)


def write(t, pos, bit):
    return t.write(pos, bit)


def liminf_period(snapshots):
    """Cellwise minimum over a repeating period of snapshots, by interval algebra."""
    snapshots = list(snapshots)
    if not snapshots:
        raise IncompatibleSnapshots("empty period")
    first = snapshots[0]
    for s in snapshots[1:]:
        if s.alpha != first.alpha or s.base != first.base:
            raise IncompatibleSnapshots("snapshots differ in length or base")
    if len(snapshots) == 1:
        return first
    ones, zeros = first.ones, first.zeros
    for s in snapshots[1:]:
        if s is first:
            continue
        ones = ones.intersection(s.ones)
        zeros = zeros.union(s.zeros)
    return first._replace(ones, zeros.difference(ones))


def translate(t, window, d):
    """Move the overlay inside ``window`` by ``x -> d + x``.

    The source window falls back to the base; the target window takes the moved
    content.  Both windows must lie in ``[0, alpha)`` and the base must be constant.
    """
    lo, hi = (as_ordinal(x) for x in window)
    d = as_ordinal(d)
    tlo, thi = add(d, lo), add(d, hi)
    if hi > t.alpha or thi > t.alpha:
        raise OutOfRange("translation window leaves the tape")
    if t.base.constant is None:
        raise TapeError("translation requires a constant base")
    if not lo < hi:
        return t
    src = IntervalSet._trusted([(lo, hi)])
    dst = IntervalSet._trusted([(tlo, thi)])
    moved_ones = t.ones.intersection(src).shift(d)
    moved_zeros = t.zeros.intersection(src).shift(d)
    ones = t.ones.difference(src).difference(dst).union(moved_ones)
    zeros = t.zeros.difference(src).difference(dst).union(moved_zeros)
    return t._replace(ones, zeros.difference(ones))


def partition_cell(i, j):
    """Host cell holding cell ``j`` of sub-tape ``i``."""
    return godel_pair(i, j)


class PartitionView:
    """Sub-tape ``index`` of a host tape, addressed through Goedel pairing."""

    def __init__(self, host, index, length):
        self.host = host
        self.index = as_ordinal(index)
        self.length = as_ordinal(length)

    def cell(self, j):
        j = as_ordinal(j)
        if not j < self.length:
            raise OutOfRange(f"sub-tape cell {j} outside length {self.length}")
        c = partition_cell(self.index, j)
        if not c < self.host.alpha:
            raise OutOfRange(f"host cell {c} outside tape of length {self.host.alpha}")
        return c

    def read(self, j):
        return self.host.read(self.cell(j))

    def write(self, j, bit):
        return PartitionView(self.host.write(self.cell(j), bit), self.index, self.length)


def standard_probes(alpha):
    """Deterministic probe cells: everything below 32 plus boundary cells below ``alpha``."""
    from .ordinal import OMEGA, mul, omega_pow
    cand = [as_ordinal(n) for n in range(32)]
    extra = [OMEGA, add(OMEGA, 1), add(OMEGA, 5), mul(OMEGA, 2), add(mul(OMEGA, 2), 1), mul(OMEGA, 3),
             omega_pow(2), add(omega_pow(2), 1), add(omega_pow(2), OMEGA), mul(omega_pow(2), 2),
             omega_pow(3), omega_pow(5)]
    alpha = as_ordinal(alpha)
    return [p for p in cand + extra if p < alpha]
