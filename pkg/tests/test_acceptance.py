"""Acceptance suite: one test per criterion, each under its time limit.

A PASS/FAIL line per criterion is printed in the terminal summary (see conftest.py).
"""
import random
import time
from contextlib import contextmanager

from ittm.asm import catalog_program, mult_marks
from ittm.cli import main as cli_main
from ittm.codes import canonical_code, code_tape, decode
from ittm.engine import Budget, Halted, NonHaltingCertified, run
from ittm.machine import (
    LEFT, Configuration, Drifting, Fixed, PartitionedRun, direct_record, initial_configuration,
    limit_snapshot, move_head, successor_step,
)
from ittm.ordinal import (
    OMEGA, add, classify, compare, godel_pair, godel_unpair, mul, parse, sub,
)
from ittm.tape import TapeContent

from differential import ALPHAS, catalog_cases, compare_at_omega
from oracles import PlainRun, enumerate_pairs, plain_limit, t_add, t_classify, t_mul, t_to_ord
from test_engine import halting_programs

W = OMEGA
W2 = parse("w^2")
WW = parse("w^(w)")

RESULTS = {}


@contextmanager
def criterion(n, seconds):
    RESULTS[n] = "FAIL"
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, limit {seconds}s"
    RESULTS[n] = f"PASS ({elapsed:.2f}s)"


def test_criterion_01_ordinal_arithmetic():
    with criterion(1, 10):
        rng = random.Random(1)
        for _ in range(10**5):
            a = tuple(rng.randrange(20) for _ in range(3))
            b = tuple(rng.randrange(20) for _ in range(3))
            oa, ob = t_to_ord(a), t_to_ord(b)
            assert compare(oa, ob) == (a > b) - (a < b)
            assert add(oa, ob) == t_to_ord(t_add(a, b))
            prod = t_mul(a, b)
            if prod is not None:
                assert mul(oa, ob) == t_to_ord(prod)
            kind, pred = t_classify(a)
            got = classify(oa)
            assert got[0] == kind and (pred is None or got[1] == t_to_ord(pred))


def test_criterion_02_pairing():
    with criterion(2, 10):
        for rank, (b, c) in enumerate(enumerate_pairs(101)[:10**4]):
            assert godel_pair(b, c) == rank and godel_unpair(rank) == (b, c)
        # ranks of pairs below w^2 increase along max-then-lex order
        comps = [t_to_ord((0, i, j)) for i in range(5) for j in range(20)]
        pairs = sorted(((b, c) for b in comps for c in comps),
                       key=lambda p: (max(p), p[0], p[1]))
        ranks = [godel_pair(b, c) for b, c in pairs]
        assert all(x < y for x, y in zip(ranks, ranks[1:]))
        assert all(godel_unpair(r) == p for r, p in zip(ranks, pairs))
        rng = random.Random(2)
        for _ in range(10**3):
            assert godel_pair(rng.randrange(10**9), rng.randrange(10**9)) < W
            b = t_to_ord(tuple(rng.randrange(20) for _ in range(3)))
            c = t_to_ord(tuple(rng.randrange(20) for _ in range(3)))
            assert godel_pair(b, c) < WW


def test_criterion_03_successor_semantics():
    with criterion(3, 1):
        assert move_head(W, LEFT) == 0
        assert move_head(add(W2, 1), LEFT) == W2
        assert move_head(0, LEFT) == 0


def _period(alpha, tapes_seq):
    return [Configuration(0, (0, 0, 0), t, i) for i, t in enumerate(tapes_seq)]


def test_criterion_04_limit_semantics():
    with criterion(4, 1):
        on, off = TapeContent(W).write(0, 1), TapeContent(W)
        lim = limit_snapshot(_period(W, [(off, off, on), (off, off, off)]), [Fixed(0)] * 3, W, W)
        assert lim.tapes[2].read(0) == 0
        lim = limit_snapshot(_period(W, [(off, off, on), (off, off, on)]), [Fixed(0)] * 3, W, W)
        assert lim.tapes[2].read(0) == 1
        drift = [Fixed(0), Fixed(0), Drifting(0, W)]
        assert limit_snapshot(_period(W, [(off,) * 3]), drift, W, W).heads[2] == 0
        t2 = TapeContent(W2)
        assert limit_snapshot(_period(W2, [(t2,) * 3]), drift, W2, W).heads[2] == W
        # and end to end: a right sweep on w^2 sits at w at time w
        out, _ = run(catalog_program("reach_limit"), W2)
        assert out.output_head == W


def test_criterion_05_acceleration_soundness():
    with criterion(5, 60):
        bad = {}
        for alpha in ALPHAS:
            for label, prog, inp in catalog_cases(alpha):
                diff = compare_at_omega(prog, alpha, inp)
                if diff:
                    bad[(str(alpha), label)] = diff
        assert not bad


def test_criterion_06_transfinite_reachability():
    with criterion(6, 30):
        out, _ = run(catalog_program("reach_limit"), W2)
        assert isinstance(out, Halted) and out.output_head == W
        for n in (1, 2, 3):
            out, _ = run(catalog_program("reach_limit_times", n), W2)
            assert isinstance(out, Halted) and out.output_head == mul(W, n)
        prog = catalog_program("mult_position")
        assert run(prog, W2, mult_marks(3, 2, W2))[0].output_head == 6
        assert run(prog, W2, mult_marks(W, 2, W2))[0].output_head == mul(W, 2)


def _replay_certificate(prog, out):
    """Independent check of a certificate: the configuration recurs at the end of
    the loop and nothing read during the loop dips below its starting value.

    Finite loops are replayed step by step; a loop of length w starting at
    state 0 with all heads at 0 is checked against the plain step oracle.
    """
    first = out.config
    span = sub(out.loop_to, out.loop_from)
    assert first.state == prog.limit_state
    if span.is_finite:
        seq = [first]
        for _ in range(span.finite_value()):
            seq.append(successor_step(seq[-1], prog))
        assert seq[-1].key() == first.key()
        touched = {(t, h) for c in seq for t, h in enumerate(c.heads)}
        for c in seq:
            assert all(h >= h0 for h, h0 in zip(c.heads, first.heads))
            assert all(c.tapes[t].read(x) >= first.tapes[t].read(x) for t, x in touched)
            assert c.state >= first.state
        return
    assert span == W and first.state == 0 and all(h == 0 for h in first.heads)
    initial = [lambda c, t=t: first.tapes[t].read(c) for t in range(prog.tape_count)]
    plain = PlainRun(prog, initial)
    for _ in range(2000):
        plain.step()
        assert plain.state >= first.state
        assert all(plain.read(t, h) >= first.tapes[t].read(h) for t, h in enumerate(plain.heads))
    cells = [(t, c) for t in range(prog.tape_count) for c in range(64)]
    lim = plain_limit(prog, initial, cells, alpha_is_omega=True)
    assert lim is not None and lim["heads"] == [0] * prog.tape_count
    assert all(v == first.tapes[t].read(c) for (t, c), v in lim["cells"].items())


def test_criterion_07_nonhalting_certification():
    with criterion(7, 60):
        busy = catalog_program("busy_loop")
        out, _ = run(busy, W)
        assert isinstance(out, NonHaltingCertified) and (out.loop_from, out.loop_to) == (0, 1)
        _replay_certificate(busy, out)
        sweep = catalog_program("sweep_fill")
        out, _ = run(sweep, W)
        assert isinstance(out, NonHaltingCertified) and out.loop_from == W
        assert out.config.tapes[2].constant_on(0, W) == 1
        _replay_certificate(sweep, out)
        for prog, t, head in halting_programs(200):
            got, _ = run(prog, W, budget=Budget(2 * 10**4, 100))
            assert not isinstance(got, NonHaltingCertified)
            assert isinstance(got, Halted) and got.time == t and got.output_head == head


def test_criterion_08_codes_round_trip():
    with criterion(8, 30):
        for alpha in (W, WW):
            for g in range(51):
                assert decode(canonical_code(g, alpha), 10**6, fast=False) == g
        prog = catalog_program("count_through_code")
        for g in range(26):
            out, _ = run(prog, W, code_tape(canonical_code(g, W)))
            assert isinstance(out, Halted) and out.output_head == g
            assert decode(canonical_code(g, W), 10**6, fast=False) == out.output_head


def test_criterion_09_determinism(tmp_path, capsys):
    with criterion(9, 30):
        files = []
        for name in ("a", "b"):
            f = tmp_path / f"{name}.json"
            assert cli_main(["reach", "--alpha", "w^2", "--output", str(f)]) == 0
            files.append(f.read_bytes())
        assert files[0] == files[1]


def test_criterion_10_subtape_simulation():
    with criterion(10, 30):
        cases = [
            ("move_right", (7,), None),
            ("sweep_fill", (), None),
            ("busy_loop", (), None),
            ("reach_limit", (), None),
            ("count_through_code", (), code_tape(canonical_code(6, W))),
        ]
        for name, args, inp in cases:
            prog = catalog_program(name, *args)
            indices = [W, W2, add(W, 1), 3][:prog.tape_count]
            sub = PartitionedRun(prog, WW, indices, inp)
            c = initial_configuration(prog, W, inp)
            for _ in range(10**3):
                assert sub.record() == direct_record(c), name
                assert sub.host_heads() == tuple(godel_pair(i, h)
                                                 for i, h in zip(indices, sub.heads))
                if c.state == prog.halt_state:
                    break
                sub.step()
                c = successor_step(c, prog)
