import random

import pytest
from hypothesis import given, settings, strategies as st

from ittm.ordinal import OMEGA, add, as_ordinal, godel_pair, mul, parse
from ittm.tape import (
    EMPTY, Base, IntervalSet, OutOfRange, PartitionView, TapeContent, WriteForbidden,
    liminf_period, point, standard_probes, translate,
)

W = OMEGA
W2 = parse("w^2")


def iv(*pairs):
    return IntervalSet([(as_ordinal(a), as_ordinal(b)) for a, b in pairs])


class TestIntervalSet:
    def test_normalizes_adjacent_and_overlapping(self):
        assert list(iv((0, 3), (3, 5), (4, 7))) == [(0, 7)]
        assert list(iv((5, 6), (0, 1))) == [(0, 1), (5, 6)]
        assert iv((2, 2)) == EMPTY

    def test_set_algebra(self):
        a = iv((0, 10), (W, add(W, 5)))
        b = iv((5, W))
        assert a.intersection(b) == iv((5, 10))
        assert a.union(b) == iv((0, add(W, 5)))
        assert a.difference(b) == iv((0, 5), (W, add(W, 5)))

    def test_membership_and_restrict(self):
        a = iv((3, 7), (W, mul(W, 2)))
        assert 3 in a and 6 in a and 7 not in a
        assert add(W, 100) in a and mul(W, 2) not in a
        assert a.restrict(5, add(W, 1)) == iv((5, 7), (W, add(W, 1)))
        assert a.meets(6, 8) and not a.meets(7, W)
        assert a.covers(W, add(W, 9)) and not a.covers(6, 8)

    def test_shift_and_relative(self):
        a = iv((0, 3))
        assert a.shift(W) == iv((W, add(W, 3)))
        assert a.shift(W).relative(W) == a

    def test_point(self):
        assert point(W) == iv((W, add(W, 1)))


def _random_set(rng):
    cuts = sorted(rng.sample(range(40), rng.randrange(0, 8)))
    return IntervalSet(list(zip(cuts[::2], cuts[1::2])))


def test_interval_algebra_matches_finite_sets():
    rng = random.Random(11)
    for _ in range(500):
        a, b = _random_set(rng), _random_set(rng)
        sa = {x for x in range(40) if x in a}
        sb = {x for x in range(40) if x in b}
        for got, want in ((a.union(b), sa | sb), (a.intersection(b), sa & sb),
                          (a.difference(b), sa - sb)):
            assert {x for x in range(40) if x in got} == want


class TestTapeContent:
    def test_read_write(self):
        t = TapeContent(W2)
        assert t.read(W) == 0
        t2 = t.write(W, 1)
        assert t2.read(W) == 1 and t.read(W) == 0
        assert t2.write(W, 0) == t

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            TapeContent(W).read(W)

    def test_read_only(self):
        t = TapeContent(W, read_only=True)
        with pytest.raises(WriteForbidden):
            t.write(0, 1)

    def test_write_region_and_constant_on(self):
        t = TapeContent(W2).write_region(0, W, 1)
        assert t.constant_on(0, W) == 1
        assert t.constant_on(5, add(W, 1)) is None
        assert t.constant_on(W, W2) == 0

    def test_opaque_base(self):
        even = Base("even", None, lambda x: x.is_finite and x.finite_value() % 2 == 0)
        t = TapeContent(W, base=even)
        assert [t.read(i) for i in range(4)] == [1, 0, 1, 0]
        assert t.constant_on(0, 4) is None
        assert t.write(1, 1).read(1) == 1

    def test_json_round_trip(self):
        t = TapeContent(W2).write_region(3, W, 1).write(add(W, 2), 1)
        assert TapeContent.from_json(t.to_json()) == t


class TestLiminf:
    def test_oscillating_cell_goes_to_zero(self):
        a = TapeContent(W).write(0, 1)
        b = TapeContent(W)
        assert liminf_period([a, b]).read(0) == 0

    def test_constant_cell_keeps_value(self):
        a = TapeContent(W).write(3, 1)
        b = a.write(4, 1)
        lim = liminf_period([a, b])
        assert lim.read(3) == 1 and lim.read(4) == 0

    def test_matches_pointwise_min(self):
        rng = random.Random(3)
        for _ in range(200):
            snaps = []
            for _ in range(rng.randint(1, 4)):
                t = TapeContent(W)
                for c in rng.sample(range(20), 6):
                    t = t.write(c, 1)
                snaps.append(t)
            lim = liminf_period(snaps)
            for c in range(20):
                assert lim.read(c) == min(s.read(c) for s in snaps)


def test_translate_moves_window():
    t = TapeContent(W2).write(1, 1).write(2, 1)
    moved = translate(t, (0, 3), W)
    assert [moved.read(i) for i in range(3)] == [0, 0, 0]
    assert [moved.read(add(W, i)) for i in range(3)] == [0, 1, 1]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 30), max_size=10), st.integers(1, 5))
def test_translate_preserves_bits(cells, d):
    t = TapeContent(W)
    for c in cells:
        t = t.write(c, 1)
    moved = translate(t, (0, 31), d)
    for c in range(31):
        assert moved.read(c + d) == t.read(c)


class TestPartitionView:
    def test_cells_addressed_by_pairing(self):
        host = TapeContent(parse("w^(w)"))
        view = PartitionView(host, W, W)
        view = view.write(3, 1)
        assert view.host.read(godel_pair(W, 3)) == 1
        assert view.read(3) == 1 and view.read(2) == 0

    def test_views_do_not_overlap(self):
        host = TapeContent(parse("w^(w)"))
        a = PartitionView(host, 0, W).write(5, 1)
        b = PartitionView(a.host, 1, W)
        assert b.read(5) == 0


def test_standard_probes():
    assert len(standard_probes(W)) == 32
    probes = standard_probes(W2)
    assert W in probes and all(p < W2 for p in probes)
