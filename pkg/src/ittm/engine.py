"""Transfinite execution with limit-time acceleration.

The run is a sequence of *events*: single successor steps and *jumps*.  A jump
replaces the infinitely many repetitions of an observed period by the
configuration at their limit.  A period from configuration ``C_i`` to the
current configuration ``C_j`` may be repeated when, with ``d`` the per-tape
head offset:

* tapes whose head did not move are structurally identical at both ends;
* every other tape has a constant base, was only read inside ``[h, h+m)``
  during the period (``h`` its head at ``C_i``), shows the same content on
  ``[h+d, h+d+m)`` at ``C_j`` as on ``[h, h+m)`` at ``C_i``, is constant on
  ``[h+m, h+d*w)`` and has left a constant trail on ``[h, h+d)``;
* no head of a moving tape was reset to 0 inside the period.

Then every later period is the same computation shifted by ``d``, and the
limit configuration is computed directly.  Periods may themselves contain
jumps, which yields nested limits (``w*w`` and beyond).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from .machine import (
    DISTINGUISHED, Configuration, SemanticsError, initial_configuration, successor_step,
)
from .ordinal import (
    OMEGA, ONE, ZERO, NotationOverflow, add, as_ordinal, compare, is_power_of_omega, mul, sub,
    to_literal,
)
from .tape import liminf_period

log = logging.getLogger(__name__)


# --- outcomes and trace -------------------------------------------------------


@dataclass(frozen=True)
class Halted:
    time: object
    final: Configuration

    @property
    def output_head(self):
        return self.final.heads[-1]


@dataclass(frozen=True)
class NonHaltingCertified:
    loop_from: object
    loop_to: object
    config: Optional[Configuration] = None

    def __post_init__(self):
        if not self.loop_from < self.loop_to:
            raise SemanticsError("a loop certificate needs loop_from < loop_to")


@dataclass(frozen=True)
class BudgetExhausted:
    time: object
    last: Configuration
    diagnostic: str = ""


@dataclass(frozen=True)
class Budget:
    max_successor_steps: int = 10**6
    max_jumps: int = 10**3


@dataclass(frozen=True)
class DriftDescriptor:
    """A repeatable period from ``t_from`` to ``t_to``.

    ``offsets[i]`` is how far head ``i`` moved; ``windows`` maps each moving
    tape to ``(start, read_extent, limit, trail_bit)``.
    """

    t_from: object
    t_to: object
    offsets: tuple
    windows: dict
    period: object

    @property
    def kind(self):
        return "drift" if self.windows else "exact-cycle"

    def to_json(self):
        return {
            "from": to_literal(self.t_from),
            "to": to_literal(self.t_to),
            "period": to_literal(self.period),
            "offsets": [to_literal(d) for d in self.offsets],
            "windows": {str(t): {"start": to_literal(s), "extent": to_literal(m),
                                 "limit": to_literal(lim), "trail": b}
                        for t, (s, m, lim, b) in sorted(self.windows.items())},
        }


@dataclass
class Trace:
    """Event log of a run plus sampled configurations."""

    events: list = field(default_factory=list)
    samples: dict = field(default_factory=dict)
    convention: str = DISTINGUISHED

    def step(self, time):
        self.events.append({"event": "step", "time": to_literal(time)})

    def jump(self, frm, to, desc):
        self.events.append({"event": "limit-jump", "from": to_literal(frm), "to": to_literal(to),
                            "kind": desc.kind, "descriptor": desc.to_json()})

    def certificate(self, cert):
        self.events.append({"event": "certificate", "loop_from": to_literal(cert.loop_from),
                            "loop_to": to_literal(cert.loop_to)})

    def diagnostic(self, time, text):
        self.events.append({"event": "diagnostic", "time": to_literal(time), "text": text})

    def sample(self, cfg):
        self.samples[to_literal(cfg.time)] = cfg

    def successor_times(self):
        return [e["time"] for e in self.events if e["event"] == "step"]

    def to_jsonl(self):
        lines = [json.dumps({"event": "header", "convention": self.convention})]
        lines += [json.dumps(e) for e in self.events]
        for t, cfg in self.samples.items():
            lines.append(json.dumps({"event": "sample", "time": t, "config": cfg.to_json()}))
        return "\n".join(lines) + "\n"


# --- events -------------------------------------------------------------------


@dataclass(eq=False)
class _Event:
    start: Configuration
    end_time: object
    bounds: tuple      # per tape (lo, hi): every cell read lies in [lo, hi)
    low: tuple         # per tape: pointwise minimum over the span, None if unknown
    head_low: tuple    # per tape: least head position over the span
    state_low: int
    resets: frozenset  # tapes whose head was reset to 0 inside or at the end of the span
    kind: str = "step"


def _step_event(cfg, nxt):
    return _Event(
        start=cfg, end_time=nxt.time,
        bounds=tuple((h, add(h, ONE)) for h in cfg.heads),
        low=cfg.tapes, head_low=cfg.heads, state_low=cfg.state,
        resets=frozenset(), kind="step",
    )


def _min_low(lows):
    if any(x is None for x in lows):
        return None
    return liminf_period(lows)


def _finitely_bounded(m, d):
    """True iff m <= d*n for some natural n."""
    if m.is_zero:
        return True
    return compare(m.leading_exponent, d.leading_exponent) <= 0


def _cheap_period(ci, cfg):
    """Offsets and drifting tapes if the endpoints admit a period, else None."""
    if ci.state != cfg.state or compare(ci.time, cfg.time) >= 0:
        return None
    k = len(cfg.heads)
    offsets = [ZERO] * k
    drifting = []
    for t in range(k):
        hi_, hj = ci.heads[t], cfg.heads[t]
        c = compare(hj, hi_)
        if c < 0:
            return None
        if c == 0:
            a, b = cfg.tapes[t], ci.tapes[t]
            if a is not b and (hash(a) != hash(b) or a != b):
                return None
        else:
            if ci.tapes[t].base.constant is None:
                return None
            offsets[t] = sub(hj, hi_)
            drifting.append(t)
    return offsets, drifting


class _Aggregate:
    """Per-tape read bounds, resets and missing lows over a suffix of events."""

    def __init__(self, k):
        self.lo = [None] * k
        self.hi = [None] * k
        self.resets = set()
        self.no_low = set()

    def add(self, e):
        lo, hi = self.lo, self.hi
        for t, (b0, b1) in enumerate(e.bounds):
            if lo[t] is None or compare(b0, lo[t]) < 0:
                lo[t] = b0
            if hi[t] is None or compare(b1, hi[t]) > 0:
                hi[t] = b1
            if e.low[t] is None:
                self.no_low.add(t)
        if e.resets:
            self.resets |= e.resets


def _finish_period(ci, cfg, alpha, offsets, drifting, agg):
    for t in range(len(offsets)):
        if t not in drifting and t in agg.no_low:
            return None
    windows = {}
    for t in drifting:
        if t in agg.resets:
            return None
        hi_, hj, d = ci.heads[t], cfg.heads[t], offsets[t]
        ti, tj = ci.tapes[t], cfg.tapes[t]
        if agg.lo[t] < hi_:
            return None
        m = sub(agg.hi[t], hi_)
        if not _finitely_bounded(m, d):
            return None
        limit = add(hi_, mul(d, OMEGA))
        if limit > alpha or add(hj, m) > limit:
            return None
        trail = tj.constant_on(hi_, hj)
        if trail is None:
            return None
        far = add(hi_, m)
        if far < limit and ti.constant_on(far, limit) is None:
            return None
        if tj.segment(hj, add(hj, m)) != ti.segment(hi_, far):
            return None
        windows[t] = (hi_, m, limit, trail)
    return DriftDescriptor(ci.time, cfg.time, tuple(offsets), windows, sub(cfg.time, ci.time))


def check_period(events, cfg, alpha):
    """Return a :class:`DriftDescriptor` if ``events`` (starting at some earlier
    configuration) form a repeatable period ending at ``cfg``; else ``None``."""
    ci = events[0].start
    cheap = _cheap_period(ci, cfg)
    if cheap is None:
        return None
    agg = _Aggregate(len(cfg.heads))
    for e in events:
        agg.add(e)
    return _finish_period(ci, cfg, alpha, *cheap, agg)


def accelerate(events, cfg, desc, alpha, prog, convention):
    """Configuration at ``cfg.time + period*w`` and the jump event covering the gap."""
    k = len(cfg.heads)
    new_time = add(cfg.time, mul(desc.period, OMEGA))
    heads, tapes, lows, head_lows, bounds = [], [], [], [], []
    resets = set()
    for e in events:
        resets |= e.resets
    for t in range(k):
        if t in desc.windows:
            start, m, limit, trail = desc.windows[t]
            hj = cfg.heads[t]
            h = limit
            if h == alpha:
                h = ZERO
                resets.add(t)
            heads.append(h)
            tape = cfg.tapes[t]
            if not tape.read_only:
                tape = tape.write_region(start, limit, trail)
            tapes.append(tape)
            # minimum over the span [cfg.time, new_time)
            region = cfg.tapes[t].constant_on(hj, limit)
            low = None
            if region == 0:
                low = cfg.tapes[t] if cfg.tapes[t].read_only else cfg.tapes[t].write_region(hj, limit, 0)
            elif region == 1:
                period_low = _min_low([e.low[t] for e in events])
                if period_low is not None and period_low.constant_on(start, add(start, m)) == 1:
                    low = cfg.tapes[t]
            lows.append(low)
            head_lows.append(hj)
            bounds.append((hj, limit))
        else:
            low = _min_low([e.low[t] for e in events])
            h = min(e.head_low[t] for e in events)
            heads.append(h)
            tapes.append(low)
            lows.append(low)
            head_lows.append(h)
            bounds.append((min(e.bounds[t][0] for e in events), max(e.bounds[t][1] for e in events)))
    state_low = min(e.state_low for e in events)
    state = prog.limit_state if convention == DISTINGUISHED else state_low
    landing = Configuration(state, tuple(heads), tuple(tapes), new_time)
    jump = _Event(start=cfg, end_time=new_time, bounds=tuple(bounds), low=tuple(lows),
                  head_low=tuple(head_lows), state_low=state_low, resets=frozenset(resets),
                  kind="jump")
    return landing, jump


def certify_nonhalting(events, cfg, alpha, prog, convention=None):
    """Loop certificate ``(t, t')`` if the snapshot at ``cfg`` repeats the one that
    starts ``events`` and the limit of repeating the period is that snapshot again."""
    convention = convention or prog.convention
    ci = events[0].start
    if ci.key() != cfg.key():
        return None
    desc = check_period(events, cfg, alpha)
    if desc is None or desc.windows:
        return None
    landing, _ = accelerate(events, cfg, desc, alpha, prog, convention)
    if landing.key() != ci.key():
        return None
    return NonHaltingCertified(ci.time, cfg.time, ci)


def detect_exact_cycle(configs):
    """Times ``(t, t')`` of the latest pair of structurally equal configurations."""
    seen = {}
    for c in configs:
        key = c.key()
        if key in seen:
            return seen[key], c.time
        seen[key] = c.time
    return None


def detect_drift(configs, alpha):
    """Drift descriptor for a run segment given as consecutive successor-step configurations."""
    configs = list(configs)
    events = [_step_event(a, b) for a, b in zip(configs, configs[1:])]
    cur = configs[-1]
    for i in range(len(events) - 1, -1, -1):
        desc = check_period(events[i:], cur, alpha)
        if desc is not None and desc.windows:
            return desc
    return None


# --- the run loop -------------------------------------------------------------


class _Counter:
    def __init__(self, budget):
        self.budget = budget
        self.steps = 0
        self.jumps = 0


class Engine:
    def __init__(self, prog, alpha, convention=None, window=4096, accelerate=True,
                 candidates=16, validate=True, short_span=64):
        self.prog = prog
        self.alpha = as_ordinal(alpha)
        self.convention = convention or prog.convention
        self.window = window
        self.accelerate = accelerate
        self.candidates = candidates
        self.validate = validate
        self.short_span = short_span

    def run(self, cfg, budget=Budget(), trace=None, probe_times=(), certify=True):
        trace = trace if trace is not None else Trace(convention=self.convention)
        probes = {as_ordinal(p) for p in probe_times}
        counter = _Counter(budget)
        status, cfg, extra = self._loop(cfg, counter, trace=trace, probes=probes, certify=certify)
        if status == "halted":
            return Halted(cfg.time, cfg), trace
        if status == "certified":
            trace.certificate(extra)
            return extra, trace
        return BudgetExhausted(cfg.time, cfg, extra or ""), trace

    def run_until(self, cfg, time, budget=Budget()):
        """Configuration at exactly ``time``, or ``None`` if the run halts first,
        jumps past it or runs out of budget."""
        time = as_ordinal(time)
        status, end, _ = self._loop(cfg, _Counter(budget), until=time)
        if status == "reached" or (status == "halted" and end.time == time):
            return end
        return None

    def _loop(self, cfg, counter, until=None, trace=None, probes=(), certify=False):
        prog, alpha = self.prog, self.alpha
        events = []
        base = 0          # absolute index of events[0]
        by_key = {}
        by_state = {}
        diagnostic = ""
        while True:
            if probes and cfg.time in probes and trace is not None:
                trace.sample(cfg)
            if cfg.state == prog.halt_state:
                return "halted", cfg, None
            if until is not None:
                c = compare(cfg.time, until)
                if c >= 0:
                    return ("reached" if c == 0 else "overshoot"), cfg, None
            n = base + len(events)
            if self.accelerate and events:
                found = self._find_period(cfg, events, base, by_key, by_state, until)
                if found is not None:
                    i, desc = found
                    tmpl = events[i - base:]
                    landing, jump = accelerate(tmpl, cfg, desc, alpha, prog, self.convention)
                    if certify and not desc.windows and landing.key() == tmpl[0].start.key():
                        return "certified", cfg, NonHaltingCertified(tmpl[0].start.time, cfg.time,
                                                                     tmpl[0].start)
                    if counter.jumps >= counter.budget.max_jumps:
                        return "budget", cfg, "jump budget exhausted"
                    ok = (not self.validate) or self._replay_ok(tmpl, cfg, desc, counter)
                    if ok == "budget":
                        return "budget", cfg, "budget exhausted while validating a jump"
                    if ok:
                        counter.jumps += 1
                        if trace is not None:
                            trace.jump(cfg.time, landing.time, desc)
                        if until is not None and landing.time > until:
                            return "overshoot", landing, None
                        self._append(events, jump, n, by_key, by_state)
                        cfg = landing
                        base, events = self._trim(base, events)
                        continue
                    diagnostic = f"rejected jump at {to_literal(cfg.time)}: replay disagreed"
                    if trace is not None:
                        trace.diagnostic(cfg.time, diagnostic)
                    log.warning(diagnostic)
            if counter.steps >= counter.budget.max_successor_steps:
                return "budget", cfg, diagnostic or "step budget exhausted"
            nxt = successor_step(cfg, prog)
            counter.steps += 1
            if trace is not None:
                trace.step(cfg.time)
            self._append(events, _step_event(cfg, nxt), n, by_key, by_state)
            cfg = nxt
            base, events = self._trim(base, events)

    def _append(self, events, ev, n, by_key, by_state):
        events.append(ev)
        by_key[ev.start.key()] = n
        lst = by_state.setdefault(ev.start.state, [])
        lst.append(n)
        if len(lst) > 4 * self.candidates:
            del lst[: len(lst) - 2 * self.candidates]

    def _trim(self, base, events):
        if len(events) > 2 * self.window:
            drop = len(events) - self.window
            return base + drop, events[drop:]
        return base, events

    def _find_period(self, cfg, events, base, by_key, by_state, until=None):
        n = base + len(events)
        # long spans are rare; a periodic regime is still caught at a later step
        full = n % self.short_span == 0
        cands = []
        i = by_key.get(cfg.key())
        if i is not None and i >= base:
            cands.append(i)
        for j in reversed(by_state.get(cfg.state, ())[-self.candidates:]):
            if j < base or j == i:
                continue
            if n - j > self.short_span and not full:
                break
            cands.append(j)
        viable = []
        for j in cands:
            cheap = _cheap_period(events[j - base].start, cfg)
            if cheap is not None:
                viable.append((j, cheap))
        if not viable:
            return None
        # one backward pass serves every candidate, newest first
        viable.sort(key=lambda x: -x[0])
        agg = _Aggregate(len(cfg.heads))
        pos = n
        for j, cheap in viable:
            while pos > j:
                pos -= 1
                agg.add(events[pos - base])
            try:
                desc = _finish_period(events[j - base].start, cfg, self.alpha, *cheap, agg)
                if desc is not None and until is not None and \
                        add(cfg.time, mul(desc.period, OMEGA)) > until:
                    desc = None
            except NotationOverflow:
                desc = None
            if desc is not None:
                return j, desc
        return None

    def _replay_ok(self, tmpl, cfg, desc, counter):
        """Run one more period from ``cfg`` and check it repeats the same way."""
        target = add(cfg.time, desc.period)
        sub_engine = Engine(self.prog, self.alpha, self.convention, self.window,
                            self.accelerate, self.candidates, self.validate, self.short_span)
        status, end, _ = sub_engine._loop(cfg, counter, until=target)
        if status == "budget":
            return "budget"
        if status != "reached":
            return False
        if end.state != cfg.state:
            return False
        for t in range(len(cfg.heads)):
            if t in desc.windows:
                if end.heads[t] != add(cfg.heads[t], desc.offsets[t]):
                    return False
                start, m, limit, trail = desc.windows[t]
                hj, he = cfg.heads[t], end.heads[t]
                if end.tapes[t].segment(he, add(he, m)) != cfg.tapes[t].segment(hj, add(hj, m)):
                    return False
                if end.tapes[t].constant_on(start, he) != trail:
                    return False
            else:
                if end.heads[t] != cfg.heads[t] or end.tapes[t] != cfg.tapes[t]:
                    return False
        return True


def check_tape_length(alpha):
    """Accept powers of w; pairing-based features separately demand closure."""
    if not is_power_of_omega(alpha):
        raise SemanticsError(f"tape length {to_literal(alpha)} is not multiplicatively closed")


def run(prog, alpha, input_tape=None, params=None, budget=Budget(), convention=None,
        accelerate=True, probe_times=(), window=4096):
    """Run ``prog`` on a tape of length ``alpha``; returns ``(outcome, trace)``."""
    alpha = as_ordinal(alpha)
    check_tape_length(alpha)
    convention = convention or prog.convention
    cfg = initial_configuration(prog, alpha, input_tape, params)
    eng = Engine(prog, alpha, convention=convention, accelerate=accelerate, window=window)
    return eng.run(cfg, budget, probe_times=probe_times)
