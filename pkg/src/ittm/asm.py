"""A small macro assembler for machine programs.

Source is one instruction per line, ``#`` starts a comment::

    TAPES 3                  # optional, default 3: IN, W1, OUT
    ONLIMIT GOTO lim         # state entered at limit times
    MACRO step(t)
        MOVE t R
    END
    loop: WRITE OUT 1
          step(OUT)
          GOTO loop
    lim:  HALT

``WRITE``, ``MOVE``, ``IFBIT`` and ``CASE`` groups each take one step; ``GOTO``
and ``HALT`` are free.  ``REPEAT n ... END`` unrolls its body.  Labels defined
inside a macro are local to each expansion.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .machine import (
    DISTINGUISHED, LEFT, LIMINF, RIGHT, STAY, Action, Program, index_bits,
)


class AsmError(Exception):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


class UnresolvedLabel(AsmError):
    pass


class WriteToInput(AsmError):
    pass


class UndeclaredTape(AsmError):
    pass


class MacroArityError(AsmError):
    pass


class ConventionError(AsmError):
    pass


_MOVES = {"L": LEFT, "R": RIGHT, "S": STAY}
_LABEL = re.compile(r"^([A-Za-z_][\w.]*):\s*(.*)$")
_CALL = re.compile(r"^([A-Za-z_]\w*)\s*\((.*)\)$")


@dataclass
class _Instr:
    op: str
    args: tuple
    line: int
    labels: tuple = ()


def tape_aliases(k):
    names = {"IN": 0, "OUT": k - 1}
    for i in range(1, k - 1):
        names[f"W{i}"] = i
    return names


def _strip(text):
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((n, line))
    return out


class _Expander:
    def __init__(self):
        self.macros = {}
        self.counter = 0
        self.tapes = 3
        self.onlimit = None

    def run(self, lines):
        return self._expand(self._collect(lines), depth=0)

    def _collect(self, lines):
        """Pull MACRO definitions out; returns the remaining lines."""
        out = []
        i = 0
        while i < len(lines):
            n, line = lines[i]
            words = line.split()
            if words[0] == "MACRO":
                m = _CALL.match(line[len("MACRO"):].strip())
                if not m:
                    raise AsmError("malformed MACRO header", n)
                params = [p.strip() for p in m.group(2).split(",") if p.strip()]
                body, i = self._block(lines, i + 1)
                self.macros[m.group(1)] = (params, body)
                continue
            out.append((n, line))
            i += 1
        return out

    def _block(self, lines, i):
        depth = 1
        body = []
        while i < len(lines):
            n, line = lines[i]
            word = line.split()[0]
            if word in ("MACRO", "REPEAT"):
                depth += 1
            elif word == "END":
                depth -= 1
                if depth == 0:
                    return body, i + 1
            body.append((n, line))
            i += 1
        raise AsmError("missing END")

    def _expand(self, lines, depth):
        if depth > 50:
            raise AsmError("macro expansion too deep")
        out = []
        i = 0
        while i < len(lines):
            n, line = lines[i]
            words = line.split()
            if words[0] == "REPEAT":
                if len(words) != 2 or not words[1].isdigit():
                    raise AsmError("REPEAT needs a natural number", n)
                body, i = self._block(lines, i + 1)
                for _ in range(int(words[1])):
                    out.extend(self._expand(self._relabel(body), depth + 1))
                continue
            if words[0] == "TAPES":
                self.tapes = int(words[1])
                i += 1
                continue
            if words[0] == "ONLIMIT":
                if len(words) != 3 or words[1] != "GOTO":
                    raise AsmError("expected ONLIMIT GOTO label", n)
                self.onlimit = (words[2], n)
                i += 1
                continue
            label = None
            m = _LABEL.match(line)
            if m:
                label, rest = m.group(1), m.group(2)
                if not rest:
                    out.append((n, f"{label}:"))
                    i += 1
                    continue
                line = rest
            call = _CALL.match(line)
            if call and call.group(1) in self.macros:
                params, body = self.macros[call.group(1)]
                args = [a.strip() for a in call.group(2).split(",") if a.strip()]
                if len(args) != len(params):
                    raise MacroArityError(
                        f"macro {call.group(1)} takes {len(params)} arguments, got {len(args)}", n)
                if label:
                    out.append((n, f"{label}:"))
                sub = []
                for bn, bline in self._relabel(body):
                    for p, a in zip(params, args):
                        bline = re.sub(rf"\b{re.escape(p)}\b", a, bline)
                    sub.append((bn, bline))
                out.extend(self._expand(self._collect(sub), depth + 1))
            elif call:
                raise AsmError(f"unknown macro {call.group(1)}", n)
            else:
                out.append((n, f"{label}: {line}" if label else line))
            i += 1
        return out

    def _relabel(self, body):
        self.counter += 1
        suffix = f"__{self.counter}"
        local = set()
        for _, line in body:
            m = _LABEL.match(line)
            if m:
                local.add(m.group(1))
        if not local:
            return list(body)
        pat = re.compile(r"\b(" + "|".join(re.escape(x) for x in sorted(local)) + r")\b")
        return [(n, pat.sub(lambda m: m.group(1) + suffix, line)) for n, line in body]


def _parse_instrs(lines, k):
    aliases = tape_aliases(k)

    def tape(name, n):
        if name not in aliases:
            raise UndeclaredTape(f"unknown tape {name!r}", n)
        return aliases[name]

    instrs = []
    pending = []
    for n, line in lines:
        m = _LABEL.match(line)
        if m:
            pending.append(m.group(1))
            line = m.group(2)
            if not line:
                continue
        w = line.split()
        op = w[0]
        if op == "WRITE" and len(w) == 3:
            t = tape(w[1], n)
            if t == 0:
                raise WriteToInput("the input tape cannot be written", n)
            args = (t, int(w[2]))
        elif op == "MOVE" and len(w) == 3 and w[2] in _MOVES:
            args = (tape(w[1], n), _MOVES[w[2]])
        elif op == "IFBIT" and len(w) == 5 and w[3] == "GOTO":
            args = (tape(w[1], n), int(w[2]), w[4])
        elif op == "GOTO" and len(w) == 2:
            args = (w[1],)
        elif op == "HALT" and len(w) == 1:
            args = ()
        elif op == "CASE" and len(w) == 6 and w[2] == "->":
            bits, target, writes, moves = w[1], w[3], w[4], w[5]
            if not (len(bits) == len(writes) == len(moves) == k):
                raise AsmError("CASE fields must have one entry per tape", n)
            if writes[0] != bits[0]:
                raise WriteToInput("the input tape cannot be written", n)
            args = (tuple(int(c) for c in bits), target, tuple(int(c) for c in writes),
                    tuple(_MOVES[c] for c in moves))
            if instrs and instrs[-1].op == "CASES" and not pending:
                instrs[-1].args += (args,)
                continue
            op, args = "CASES", (args,)
        else:
            raise AsmError(f"cannot parse {line!r}", n)
        instrs.append(_Instr(op, args, n, tuple(pending)))
        pending = []
    if pending:
        instrs.append(_Instr("HALT", (), lines[-1][0] if lines else 0, tuple(pending)))
    return instrs


def assemble(src, convention=DISTINGUISHED):
    """Assemble source text into a :class:`Program`."""
    if convention not in (DISTINGUISHED, LIMINF):
        raise ConventionError(f"unknown convention {convention!r}")
    exp = _Expander()
    lines = exp.run(exp._collect(_strip(src)))
    k = exp.tapes
    if k < 3:
        raise AsmError("at least three tapes are required")
    instrs = _parse_instrs(lines, k)
    if not instrs:
        raise AsmError("empty program")
    labels = {}
    for pos, ins in enumerate(instrs):
        for lab in ins.labels:
            if lab in labels:
                raise AsmError(f"duplicate label {lab!r}", ins.line)
            labels[lab] = pos

    def target(lab, line):
        if lab not in labels:
            raise UnresolvedLabel(f"unresolved label {lab!r}", line)
        return labels[lab]

    HALT = "halt"

    def resolve(pos, line):
        seen = set()
        while True:
            if pos >= len(instrs):
                raise AsmError("control falls off the end of the program", line)
            ins = instrs[pos]
            if ins.op == "HALT":
                return HALT
            if ins.op != "GOTO":
                return pos
            if pos in seen:
                raise AsmError("GOTO cycle without any instruction", ins.line)
            seen.add(pos)
            pos = target(ins.args[0], ins.line)

    # validate all label references before numbering
    for ins in instrs:
        if ins.op in ("GOTO",):
            target(ins.args[0], ins.line)
        elif ins.op == "IFBIT":
            target(ins.args[2], ins.line)
        elif ins.op == "CASES":
            for case in ins.args:
                target(case[1], ins.line)

    def successors(pos):
        ins = instrs[pos]
        if ins.op == "IFBIT":
            return [resolve(pos + 1, ins.line), resolve(target(ins.args[2], ins.line), ins.line)]
        if ins.op == "CASES":
            return [resolve(target(c[1], ins.line), ins.line) for c in ins.args]
        return [resolve(pos + 1, ins.line)]

    entry = resolve(0, instrs[0].line)
    limit_target = None
    if exp.onlimit is not None:
        if convention != DISTINGUISHED:
            raise ConventionError("ONLIMIT needs the distinguished limit-state convention",
                                  exp.onlimit[1])
        limit_target = resolve(target(*exp.onlimit), exp.onlimit[1])

    number = {}
    order = []
    queue = [entry] + ([limit_target] if limit_target is not None else [])
    while queue:
        node = queue.pop(0)
        if node in number:
            continue
        number[node] = len(order)
        order.append(node)
        if node != HALT:
            queue.extend(successors(node))
    if HALT not in number:
        number[HALT] = len(order)
        order.append(HALT)

    table = []
    names = []
    for node in order:
        if node == HALT:
            table.append(())
            names.append("HALT")
            continue
        ins = instrs[node]
        names.append(ins.labels[0] if ins.labels else f"@{ins.line}")
        row = []
        nxt = number[resolve(node + 1, ins.line)] if ins.op != "CASES" else None
        cases = {}
        if ins.op == "CASES":
            for bits, lab, writes, moves in ins.args:
                cases[bits] = Action(number[resolve(target(lab, ins.line), ins.line)], writes, moves)
            if len(cases) != 2 ** k:
                raise AsmError("CASE group does not cover every bit pattern", ins.line)
        for idx in range(2 ** k):
            bits = index_bits(idx, k)
            stay = (STAY,) * k
            if ins.op == "WRITE":
                t, b = ins.args
                writes = bits[:t] + (b,) + bits[t + 1:]
                row.append(Action(nxt, writes, stay))
            elif ins.op == "MOVE":
                t, mv = ins.args
                row.append(Action(nxt, bits, stay[:t] + (mv,) + stay[t + 1:]))
            elif ins.op == "IFBIT":
                t, b, lab = ins.args
                dest = number[resolve(target(lab, ins.line), ins.line)] if bits[t] == b else nxt
                row.append(Action(dest, bits, stay))
            else:
                row.append(cases[bits])
        table.append(tuple(row))
    limit_state = number[limit_target] if limit_target is not None else 0
    return Program(len(order), number[HALT], k, tuple(table), limit_state, convention, tuple(names))


def disassemble(prog):
    """Source text that assembles to an equivalent program (CASE form)."""
    inv = {v: c for c, v in _MOVES.items()}
    k = prog.tape_count
    lines = [f"TAPES {k}"]
    if prog.convention == DISTINGUISHED:
        lines.append(f"ONLIMIT GOTO s{prog.limit_state}")
    order = [0] + [s for s in range(prog.num_states) if s != 0]
    for s in order:
        if s == prog.halt_state:
            lines.append(f"s{s}: HALT")
            continue
        for idx, act in enumerate(prog.table[s]):
            bits = "".join(map(str, index_bits(idx, k)))
            writes = "".join(map(str, act.writes))
            moves = "".join(inv[m] for m in act.moves)
            prefix = f"s{s}: " if idx == 0 else "    "
            lines.append(f"{prefix}CASE {bits} -> s{act.next} {writes} {moves}")
    return "\n".join(lines) + "\n"


# --- catalog ------------------------------------------------------------------


class UnknownProgram(AsmError):
    pass


class UnsupportedRange(AsmError):
    pass


_MOVE_RIGHT = """\
MACRO move_right(n)
REPEAT n
    MOVE OUT R
END
END
move_right({n})
HALT
"""

_SWEEP_FILL = """\
loop: WRITE OUT 1
      MOVE OUT R
      GOTO loop
"""

_REACH_LIMIT = """\
ONLIMIT GOTO lim
loop: WRITE OUT 1
      MOVE OUT R
      GOTO loop
lim:  IFBIT OUT 0 GOTO done     # the cell under the head was never written
      GOTO loop
done: HALT
"""

# W1 carries a marker at cell n; each limit moves the W1 head one cell right.
_REACH_LIMIT_TIMES = """\
ONLIMIT GOTO lim
REPEAT {n}
    MOVE W1 R
END
WRITE W1 1
REPEAT {n}
    MOVE W1 L
END
loop: WRITE OUT 1
      MOVE OUT R
      GOTO loop
lim:  MOVE W1 R
      IFBIT W1 1 GOTO done
      GOTO loop
done: HALT
"""

_BUSY_LOOP = """\
loop: MOVE W1 S
      GOTO loop
"""

# IN marks gamma < beta.  W1 holds ones on [1, gamma]: cells below gamma are a
# unary counter, the one at gamma doubles as a marker.  Each iteration erases a
# counter cell and walks IN/W1/OUT right until IN shows beta, so OUT advances by
# beta.  IN/W1 return to 0 by sweeping to the next limit and stepping left.
# W2[0] flags the return sweep, W2[1] flags the last iteration.
_MULT_POSITION = """\
TAPES 4
ONLIMIT GOTO lim
        IFBIT IN 1 GOTO done        # gamma = 0
        MOVE IN R
        MOVE W1 R
scan:   WRITE W1 1
        IFBIT IN 1 GOTO scanned
        MOVE IN R
        MOVE W1 R
        GOTO scan
scanned:
back:   MOVE IN L
        MOVE W1 L
        IFBIT W1 1 GOTO back
iter:   MOVE IN R
        MOVE W1 R
        MOVE OUT R
        IFBIT W1 0 GOTO iter
        IFBIT IN 1 GOTO last
        WRITE W1 0
        GOTO seek
last:   MOVE W2 R
        WRITE W2 1
        MOVE W2 L
seek:   MOVE IN R
        MOVE W1 R
        MOVE OUT R
        IFBIT IN 0 GOTO seek
        IFBIT W1 1 GOTO seek
found:  WRITE W2 1
ret:    MOVE IN R
        MOVE W1 R
        GOTO ret
lim:    IFBIT W2 1 GOTO retdone
        IFBIT IN 1 GOTO found
        GOTO seek
retdone: WRITE W2 0
        MOVE IN L
        MOVE W1 L
        MOVE W2 R
        IFBIT W2 1 GOTO done
        MOVE W2 L
        GOTO iter
done:   HALT
"""

# IN holds a finite code.  IN and W1 sweep right together.  A walker ticks
# right along W1 through the cells x*x+x (that is, pair(x, 0)): the W2 ruler
# holds x ones and one pass out and back over it is the gap 2(x+1).  At each
# code cell the walker is brought up to it; landing there on a gap end means
# a field of 0, counted by a step of OUT.  The walker then waits at that
# cell with the ruler pass suspended, so the total walk is linear.
_COUNT_THROUGH_CODE = """\
TAPES 4
ONLIMIT GOTO fin
MACRO extend_ruler()
er:   MOVE W2 R
      IFBIT W2 1 GOTO er
      WRITE W2 1
el:   MOVE W2 L
      IFBIT W2 1 GOTO el
END
MACRO sweep(resume)
sw:   MOVE IN R
      MOVE W1 R
      IFBIT IN 0 GOTO sw
      WRITE W1 1                # bookmark
sk:   MOVE W1 L
      IFBIT W1 0 GOTO sk
      WRITE W1 0                # walker leaves its old cell
      GOTO resume
END
        WRITE W1 1              # walker starts at 0
        GOTO stopR
walkR:  MOVE W2 R
        IFBIT W2 0 GOTO endR
        MOVE W1 R
        IFBIT W1 1 GOTO stopR
        GOTO walkR
endR:   MOVE W1 R
        IFBIT W1 1 GOTO stopL
walkL:  MOVE W2 L
        IFBIT W2 0 GOTO endL
        MOVE W1 R
        IFBIT W1 1 GOTO stopL
        GOTO walkL
endL:   extend_ruler()
        MOVE W1 R
        IFBIT W1 1 GOTO yes
        GOTO walkR
yes:    MOVE OUT R
stopR:  sweep(walkR)
stopL:  sweep(walkL)
fin:    HALT
"""


def _natural(name, args, lo=0, hi=10_000):
    if len(args) != 1:
        raise MacroArityError(f"{name} takes one argument")
    n = args[0]
    if isinstance(n, str):
        if not n.strip().isdigit():
            raise UnsupportedRange(f"{name} needs a natural number, got {n!r}")
        n = int(n)
    if not lo <= n <= hi:
        raise UnsupportedRange(f"{name}({n}) outside supported range {lo}..{hi}")
    return n


def _no_args(name, args):
    if args:
        raise MacroArityError(f"{name} takes no arguments")


def _move_right(args):
    return _MOVE_RIGHT.replace("{n}", str(_natural("move_right", args)))


def _reach_limit_times(args):
    return _REACH_LIMIT_TIMES.replace("{n}", str(_natural("reach_limit_times", args, lo=1)))


def _fixed(src, name):
    def build(args):
        _no_args(name, args)
        return src
    return build


CATALOG = {
    "move_right": _move_right,
    "sweep_fill": _fixed(_SWEEP_FILL, "sweep_fill"),
    "reach_limit": _fixed(_REACH_LIMIT, "reach_limit"),
    "reach_limit_times": _reach_limit_times,
    "mult_position": _fixed(_MULT_POSITION, "mult_position"),
    "count_through_code": _fixed(_COUNT_THROUGH_CODE, "count_through_code"),
    "busy_loop": _fixed(_BUSY_LOOP, "busy_loop"),
}


def catalog(name, *args):
    """Source text of a catalog program."""
    if name not in CATALOG:
        raise UnknownProgram(f"unknown catalog program {name!r}")
    return CATALOG[name](list(args))


def catalog_program(name, *args, convention=DISTINGUISHED):
    return assemble(catalog(name, *args), convention)


_SPEC = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_catalog_spec(text):
    """``"move_right(3)"`` -> ``("move_right", [3])``."""
    m = _SPEC.match(text)
    if not m:
        raise AsmError(f"malformed catalog reference {text!r}")
    args = [a.strip() for a in (m.group(2) or "").split(",") if a.strip()]
    return m.group(1), [int(a) if a.isdigit() else a for a in args]


def mult_marks(beta, gamma, alpha):
    """Input tape for ``mult_position``: cells ``gamma < beta`` marked.

    Supported: finite gamma, and beta finite or w.
    """
    from .ordinal import OMEGA, as_ordinal
    from .tape import TapeContent, point

    beta, gamma, alpha = as_ordinal(beta), as_ordinal(gamma), as_ordinal(alpha)
    if not gamma.is_finite or not (beta.is_finite or beta == OMEGA):
        raise UnsupportedRange("mult_position supports finite gamma and beta finite or w")
    if not gamma < beta:
        raise UnsupportedRange("mult_position needs gamma < beta")
    if not beta < alpha:
        raise UnsupportedRange("marks must lie on the tape")
    return TapeContent(alpha, ones=point(gamma).union(point(beta)))
