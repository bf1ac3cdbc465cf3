"""Programs, configurations and the one-step semantics of the machine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .ordinal import ONE, ZERO, add, as_ordinal, classify, to_literal
from .tape import TapeContent, liminf_period

LEFT, STAY, RIGHT = -1, 0, 1
MOVE_NAMES = {LEFT: "L", STAY: "S", RIGHT: "R"}

DISTINGUISHED = "distinguished"
LIMINF = "liminf"
CONVENTIONS = (DISTINGUISHED, LIMINF)


class SemanticsError(Exception):
    pass


class Action(NamedTuple):
    next: int
    writes: tuple
    moves: tuple


def bits_index(bits):
    return sum(b << i for i, b in enumerate(bits))


def index_bits(idx, k):
    return tuple((idx >> i) & 1 for i in range(k))


@dataclass(frozen=True)
class Program:
    """A finite multi-tape transition table.

    ``table[s][bits_index(bits)]`` is the :class:`Action` taken in state ``s``
    reading ``bits`` (tape 0 first).  Tape 0 is the input tape, the last tape
    is the output tape.
    """

    num_states: int
    halt_state: int
    tape_count: int
    table: tuple
    limit_state: int = 0
    convention: str = DISTINGUISHED
    names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        k = self.tape_count
        if k < 3:
            raise SemanticsError("a program needs at least input, work and output tapes")
        if self.convention not in CONVENTIONS:
            raise SemanticsError(f"unknown limit-state convention {self.convention!r}")
        if len(self.table) != self.num_states:
            raise SemanticsError("table size does not match num_states")
        if not 0 <= self.halt_state < self.num_states:
            raise SemanticsError("halt state out of range")
        if not 0 <= self.limit_state < self.num_states:
            raise SemanticsError("limit state out of range")
        for s, row in enumerate(self.table):
            if s == self.halt_state:
                if row:
                    raise SemanticsError("the halt state has no transitions")
                continue
            if len(row) != 2 ** k:
                raise SemanticsError(f"state {s} is missing transitions")
            for idx, act in enumerate(row):
                bits = index_bits(idx, k)
                if not 0 <= act.next < self.num_states:
                    raise SemanticsError(f"state {s} jumps to unknown state {act.next}")
                if len(act.writes) != k or len(act.moves) != k:
                    raise SemanticsError(f"state {s} has a malformed action")
                if act.writes[0] != bits[0]:
                    raise SemanticsError(f"state {s} writes to the input tape")

    def action(self, state, bits):
        return self.table[state][bits_index(bits)]

    def serialize(self):
        """Text form: a header line, then one line per (state, bits) entry."""
        lines = [f"ittm-program states={self.num_states} tapes={self.tape_count} "
                 f"halt={self.halt_state} limit={self.limit_state} convention={self.convention}"]
        for s, row in enumerate(self.table):
            for idx, act in enumerate(row):
                bits = "".join(map(str, index_bits(idx, self.tape_count)))
                writes = "".join(map(str, act.writes))
                moves = "".join(MOVE_NAMES[m] for m in act.moves)
                lines.append(f"{s} {bits} -> {act.next} {writes} {moves}")
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(kv.split("=") for kv in lines[0].split()[1:])
        n, k = int(header["states"]), int(header["tapes"])
        rows = [[None] * (2 ** k) for _ in range(n)]
        inv = {v: m for m, v in MOVE_NAMES.items()}
        for ln in lines[1:]:
            lhs, rhs = ln.split("->")
            s, bits = lhs.split()
            nxt, writes, moves = rhs.split()
            rows[int(s)][int(bits[::-1], 2)] = Action(
                int(nxt), tuple(int(c) for c in writes), tuple(inv[c] for c in moves))
        halt = int(header["halt"])
        rows[halt] = []
        return cls(n, halt, k, tuple(tuple(r) for r in rows),
                   int(header["limit"]), header["convention"])


@dataclass(frozen=True)
class Configuration:
    state: int
    heads: tuple
    tapes: tuple
    time: object = ZERO

    def key(self):
        """Everything but the time; equal keys mean equal snapshots."""
        return (self.state, self.heads, self.tapes)

    def same_snapshot(self, other):
        return self.key() == other.key()

    def read_bits(self):
        return tuple(t.read(h) for t, h in zip(self.tapes, self.heads))

    def to_json(self):
        return {
            "state": self.state,
            "time": to_literal(self.time),
            "heads": [to_literal(h) for h in self.heads],
            "tapes": [t.to_json() for t in self.tapes],
        }


def initial_configuration(prog, alpha, input_tape=None, params=None):
    """Start configuration; ``params`` marks cells of the first work tape."""
    alpha = as_ordinal(alpha)
    k = prog.tape_count
    inp = input_tape if input_tape is not None else TapeContent(alpha)
    if inp.alpha != alpha:
        raise SemanticsError("input tape length differs from alpha")
    inp = inp.with_read_only(True)
    tapes = [inp] + [TapeContent(alpha) for _ in range(k - 1)]
    for p in params or ():
        tapes[1] = tapes[1].write(p, 1)
    return Configuration(0, tuple(ZERO for _ in range(k)), tuple(tapes), ZERO)


def move_head(pos, move):
    if move == RIGHT:
        return add(pos, ONE)
    if move == LEFT:
        kind, pred = classify(pos)
        # from 0 or from a limit position the head goes to 0
        return pred if kind == "successor" else ZERO
    return pos


def successor_step(cfg, prog):
    if cfg.state == prog.halt_state:
        raise SemanticsError("the machine has halted")
    bits = cfg.read_bits()
    act = prog.table[cfg.state][bits_index(bits)]
    tapes = cfg.tapes
    if act.writes != bits:
        tapes = tuple(t if w == b else t.write(h, w)
                      for t, h, b, w in zip(tapes, cfg.heads, bits, act.writes))
    heads = tuple(move_head(h, m) for h, m in zip(cfg.heads, act.moves))
    return Configuration(act.next, heads, tapes, add(cfg.time, ONE))


# --- limit rule ---------------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    pos: object


@dataclass(frozen=True)
class Cyclic:
    min: object


@dataclass(frozen=True)
class Drifting:
    start: object
    sup: object

    def __post_init__(self):
        if not as_ordinal(self.start) < as_ordinal(self.sup):
            raise SemanticsError("a drifting head needs start < sup")


def summarize_heads(period):
    """Fixed/Cyclic summaries for a period of configurations with no net drift."""
    out = []
    for i in range(len(period[0].heads)):
        positions = [c.heads[i] for c in period]
        if all(p == positions[0] for p in positions):
            out.append(Fixed(positions[0]))
        else:
            out.append(Cyclic(min(positions)))
    return out


def limit_state(period, prog_limit_state, convention):
    if convention == DISTINGUISHED:
        return prog_limit_state
    return min(c.state for c in period)


def limit_snapshot(period, head_summary, alpha, limit_time, prog=None,
                   convention=None, drift_fills=None):
    """Configuration at ``limit_time`` when ``period`` repeats cofinally below it.

    ``drift_fills`` maps a tape index to ``(lo, hi, bit)``: the region a
    drifting head leaves behind, which settles to ``bit``.
    """
    if not period:
        raise SemanticsError("empty period")
    alpha = as_ordinal(alpha)
    convention = convention or (prog.convention if prog else DISTINGUISHED)
    drift_fills = drift_fills or {}
    heads = []
    for i, summ in enumerate(head_summary):
        positions = [c.heads[i] for c in period]
        if isinstance(summ, Fixed):
            if any(p != summ.pos for p in positions):
                raise SemanticsError(f"head {i} is not fixed over the period")
            h = as_ordinal(summ.pos)
        elif isinstance(summ, Cyclic):
            if min(positions) != summ.min:
                raise SemanticsError(f"head {i} minimum disagrees with the period")
            h = as_ordinal(summ.min)
        elif isinstance(summ, Drifting):
            if positions[0] != summ.start or any(p < summ.start for p in positions):
                raise SemanticsError(f"head {i} drift start disagrees with the period")
            h = as_ordinal(summ.sup)
        else:
            raise SemanticsError(f"unknown head summary {summ!r}")
        if h == alpha:
            h = ZERO
        elif h > alpha:
            raise SemanticsError(f"head {i} limit {h} beyond the tape")
        heads.append(h)
    tapes = []
    for i in range(len(period[0].tapes)):
        if i in drift_fills:
            lo, hi, bit = drift_fills[i]
            t = period[0].tapes[i]
            if not t.read_only:
                t = t.write_region(lo, hi, bit)
            tapes.append(t)
        else:
            tapes.append(liminf_period([c.tapes[i] for c in period]))
    state = limit_state(period, prog.limit_state if prog else 0, convention)
    return Configuration(state, tuple(heads), tuple(tapes), as_ordinal(limit_time))


# --- sub-tape simulation --------------------------------------------------------


class PartitionedRun:
    """Runs ``prog`` as a machine with tapes of length w whose tapes are
    portions of one host tape of length ``host_alpha``.

    Sub-tape ``t`` occupies host cells ``godel_pair(indices[t], j)``.
    """

    def __init__(self, prog, host_alpha, indices, input_tape=None):
        from .ordinal import OMEGA, is_mult_closed
        from .tape import PartitionView

        host_alpha = as_ordinal(host_alpha)
        if not is_mult_closed(host_alpha):
            raise SemanticsError("the host tape length must be multiplicatively closed")
        if len(indices) != prog.tape_count or len(set(indices)) != len(indices):
            raise SemanticsError("need one distinct partition index per tape")
        self.prog = prog
        host = TapeContent(host_alpha)
        self.indices = tuple(as_ordinal(i) for i in indices)
        if input_tape is not None:
            view = PartitionView(host, self.indices[0], OMEGA)
            for lo, hi in input_tape.ones:
                if not hi.is_finite:
                    raise SemanticsError("only finitely supported inputs can be copied")
                for j in range(lo.finite_value(), hi.finite_value()):
                    view = view.write(j, 1)
            host = view.host
        self.host = host
        self._view = PartitionView
        self.length = OMEGA
        self.state = 0
        self.heads = [0] * prog.tape_count
        self.time = 0

    def _views(self):
        return [self._view(self.host, i, self.length) for i in self.indices]

    def host_heads(self):
        return tuple(v.cell(h) for v, h in zip(self._views(), self.heads))

    def read_bits(self):
        return tuple(v.read(h) for v, h in zip(self._views(), self.heads))

    def step(self):
        if self.state == self.prog.halt_state:
            raise SemanticsError("the machine has halted")
        bits = self.read_bits()
        act = self.prog.table[self.state][bits_index(bits)]
        for t, (b, w) in enumerate(zip(bits, act.writes)):
            if b != w:
                self.host = self.host.write(self._view(self.host, self.indices[t], self.length)
                                            .cell(self.heads[t]), w)
        self.heads = [max(0, h + m) for h, m in zip(self.heads, act.moves)]
        self.state = act.next
        self.time += 1

    def record(self):
        return (self.time, self.state, tuple(self.heads), self.read_bits())


def direct_record(cfg):
    """The record of a configuration in the format of :meth:`PartitionedRun.record`."""
    return (cfg.time.finite_value(), cfg.state,
            tuple(h.finite_value() for h in cfg.heads), cfg.read_bits())
