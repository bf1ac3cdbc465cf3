"""Command line harness: ``ittm run|reach|pair-table|validate-code|report``.

Exit codes: 0 success, 2 validation error, 3 internal or semantics error.
All output is deterministic: no timestamps, fixed field order.
"""
import argparse
import csv
import io
import json
import sys

from . import codes
from .asm import AsmError, assemble, catalog_program, mult_marks, parse_catalog_spec
from .engine import Budget, Halted, NonHaltingCertified, check_tape_length, run
from .machine import DISTINGUISHED, LIMINF, SemanticsError, successor_step
from .ordinal import OMEGA, OrdinalError, godel_unpair, parse, sub, to_literal
from .tape import IntervalSet, TapeContent, TapeError

MAX_PAIRS = 10**6


class UsageError(Exception):
    """A request that fails validation (exit code 2)."""


# --- request parsing ------------------------------------------------------------


def parse_alpha(text):
    try:
        alpha = parse(text)
        check_tape_length(alpha)
    except (OrdinalError, SemanticsError) as e:
        raise UsageError(f"bad --alpha {text!r}: {e}") from None
    return alpha


def _expand_args(spec):
    """``move_right(0..3)`` -> four catalog specs; other specs pass through."""
    name, args = parse_catalog_spec(spec)
    ranged = [i for i, a in enumerate(args) if isinstance(a, str) and ".." in a]
    if not ranged:
        return [spec]
    if len(ranged) > 1:
        raise UsageError(f"at most one argument range per entry: {spec!r}")
    i = ranged[0]
    lo, _, hi = args[i].partition("..")
    if not (lo.strip().isdigit() and hi.strip().isdigit()):
        raise UsageError(f"bad argument range in {spec!r}")
    out = []
    for n in range(int(lo), int(hi) + 1):
        a = list(args)
        a[i] = n
        out.append(f"{name}({','.join(str(x) for x in a)})" if a else name)
    return out


def load_program(spec, convention):
    """A program from ``catalog:name(args)`` or an assembly file."""
    if spec.startswith("catalog:"):
        name, args = parse_catalog_spec(spec[len("catalog:"):])
        return catalog_program(name, *args, convention=convention)
    try:
        with open(spec) as f:
            src = f.read()
    except OSError as e:
        raise UsageError(f"cannot read program {spec!r}: {e.strerror}") from None
    return assemble(src, convention)


def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as e:
        raise UsageError(f"cannot read {path!r}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: not JSON ({e.msg})") from None


def parse_input(spec, alpha):
    """Input tape from ``empty``, ``code:FILE``, ``canonical:G``,
    ``intervals:A..B,...`` or ``marks:B,G``."""
    kind, _, rest = spec.partition(":")
    if kind == "empty" and not rest:
        return None
    if kind == "canonical":
        gamma = parse(rest)
        return codes.code_tape(codes.canonical_code(gamma, OMEGA if gamma.is_finite else alpha),
                               alpha)
    if kind == "code":
        return codes.code_tape(codes.from_json(_read_json(rest)), alpha)
    if kind == "intervals":
        pairs = []
        for part in filter(None, (p.strip() for p in rest.split(","))):
            lo, sep, hi = part.partition("..")
            if not sep:
                raise UsageError(f"interval {part!r} is not of the form A..B")
            pairs.append((parse(lo), parse(hi)))
        ones = IntervalSet(pairs)
        ones.validate(alpha)
        return TapeContent(alpha, ones=ones)
    if kind == "marks":
        b, sep, g = rest.partition(",")
        if not sep:
            raise UsageError("marks input needs two ordinals: marks:BETA,GAMMA")
        return mult_marks(parse(b), parse(g), alpha)
    raise UsageError(f"unknown input spec {spec!r}")


def _cells(text):
    return [parse(c) for c in text.split(",") if c.strip()] if text else []


# --- outcome records ------------------------------------------------------------


def settings_record(args):
    return {
        "alpha": to_literal(args.alpha),
        "budget_steps": args.budget_steps,
        "budget_jumps": args.budget_jumps,
        "limit_state_convention": args.limit_state_convention,
        "accelerate": True,
    }


def outcome_record(out, probes=()):
    if isinstance(out, Halted):
        final = out.final
        rec = {"outcome": "Halted", "time": to_literal(out.time),
               "output_head": to_literal(out.output_head),
               "output_tape": final.tapes[-1].to_json()}
    elif isinstance(out, NonHaltingCertified):
        final = out.config
        rec = {"outcome": "NonHaltingCertified", "loop_from": to_literal(out.loop_from),
               "loop_to": to_literal(out.loop_to)}
    else:
        final = out.last
        rec = {"outcome": "BudgetExhausted", "time": to_literal(out.time),
               "diagnostic": out.diagnostic}
    if probes and final is not None:
        rec["probes"] = {to_literal(c): final.tapes[-1].read(c) for c in probes}
    return rec


def stable_cell(out, prog, limit=10**4):
    """The output cell a certified loop never leaves, if the loop is finite and
    short enough to replay."""
    span = sub(out.loop_to, out.loop_from)
    if out.config is None or not span.is_finite or span.finite_value() > limit:
        return None
    cfg = out.config
    cell = cfg.heads[-1]
    for _ in range(span.finite_value()):
        cfg = successor_step(cfg, prog)
        if cfg.heads[-1] != cell:
            return None
    return cell


def reach_row(label, prog, out):
    row = {"program": label}
    if isinstance(out, Halted):
        row.update(outcome="Reached", cell=to_literal(out.output_head),
                   time=to_literal(out.time))
    elif isinstance(out, NonHaltingCertified):
        cell = stable_cell(out, prog)
        row.update(outcome="NonHalting" if cell is None else "EventuallyStable")
        if cell is not None:
            row["cell"] = to_literal(cell)
        row.update(loop_from=to_literal(out.loop_from), loop_to=to_literal(out.loop_to))
    else:
        row.update(outcome="Unknown", time=to_literal(out.time), detail=out.diagnostic)
    return row


REACH_FIELDS = ["program", "outcome", "cell", "time", "loop_from", "loop_to", "detail"]

DEFAULT_SELECTION = ["move_right(0..19)", "sweep_fill", "reach_limit",
                     "reach_limit_times(1..3)", "busy_loop"]


# --- commands -------------------------------------------------------------------


def _budget(args):
    return Budget(args.budget_steps, args.budget_jumps)


def cmd_run(args):
    prog = load_program(args.program, args.limit_state_convention)
    inp = parse_input(args.input, args.alpha)
    params = [parse(p) for p in args.param]
    out, trace = run(prog, args.alpha, inp, params, _budget(args))
    if args.trace:
        with open(args.trace, "w") as f:
            f.write(trace.to_jsonl())
    rec = {"command": "run", "program": args.program, "input": args.input,
           "params": [to_literal(p) for p in params], "settings": settings_record(args)}
    rec.update(outcome_record(out, _cells(args.probe)))
    return json.dumps(rec, indent=2) + "\n"


def reach_rows(alpha, selection, input_spec, budget, convention):
    rows = []
    for entry in selection:
        for spec in _expand_args(entry):
            prog = load_program("catalog:" + spec, convention)
            inp = parse_input(input_spec, alpha)
            out, _ = run(prog, alpha, inp, budget=budget)
            rows.append(reach_row(spec, prog, out))
    return rows


def format_rows(rows, fields, header, fmt):
    if fmt == "json":
        return json.dumps(dict(header, rows=rows), indent=2) + "\n"
    buf = io.StringIO()
    for k, v in header.items():
        for key, val in (v.items() if isinstance(v, dict) else [(None, v)]):
            buf.write(f"# {k}.{key}={val}\n" if key else f"# {k}={v}\n")
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in fields})
    return buf.getvalue()


def cmd_reach(args):
    selection = [p[len("catalog:"):] if p.startswith("catalog:") else p
                 for p in args.program] or DEFAULT_SELECTION
    rows = reach_rows(args.alpha, selection, args.input, _budget(args),
                      args.limit_state_convention)
    header = {"command": "reach", "input": args.input, **settings_record(args)}
    return format_rows(rows, REACH_FIELDS, header, args.format)


def enumerate_pairs(limit):
    """Pairs of naturals ordered by max, then lexicographically."""
    out = []
    m = 0
    while len(out) < limit:
        block = [(x, m) for x in range(m)] + [(m, y) for y in range(m + 1)]
        out.extend(block[:limit - len(out)])
        m += 1
    return out


def pair_table(limit):
    rows = []
    for r in range(limit):
        x, y = godel_unpair(r)
        rows.append((x.finite_value(), y.finite_value()))
    return rows


def cmd_pair_table(args):
    if not 0 <= args.limit <= MAX_PAIRS:
        raise UsageError(f"--limit must lie in 0..{MAX_PAIRS}")
    table = pair_table(args.limit)
    if args.verify:
        expected = enumerate_pairs(args.limit)
        if args.inject_fault and len(expected) >= 2:
            expected[0], expected[1] = expected[1], expected[0]
        bad = [r for r, (a, b) in enumerate(zip(table, expected)) if a != b]
        if bad:
            raise SemanticsError(f"pairing disagrees with the enumeration at rank {bad[0]}")
    rows = [{"rank": r, "x": x, "y": y} for r, (x, y) in enumerate(table)]
    header = {"command": "pair-table", "limit": args.limit, "verified": bool(args.verify)}
    return format_rows(rows, ["rank", "x", "y"], header, args.format)


def cmd_validate_code(args):
    code = codes.from_json(_read_json(args.file))
    verdict = codes.validate(code, args.budget)
    rec = {"command": "validate-code", "file": args.file, "budget": args.budget,
           "verdict": type(verdict).__name__}
    if hasattr(verdict, "reason"):
        rec["reason"] = verdict.reason
    if isinstance(verdict, codes.Valid):
        value = codes.decode(code, args.budget)
        if isinstance(value, (codes.Unknown, codes.NotOrdinal)):
            rec["decode"] = type(value).__name__
            rec["decode_reason"] = value.reason
        else:
            rec["decode"] = to_literal(value)
    return json.dumps(rec, indent=2) + "\n"


CONFIG_KEYS = {"alpha", "programs", "input", "budget_steps", "budget_jumps",
               "limit_state_convention"}


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config {path!r}: {e.strerror}") from None
    conf = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: expected one of {sorted(CONFIG_KEYS)} = value")
        conf[key] = value.strip()
    return conf


def cmd_report(args):
    conf = read_config(args.config)
    alpha = parse_alpha(conf.get("alpha", "w"))
    try:
        budget = Budget(int(conf.get("budget_steps", 10**6)), int(conf.get("budget_jumps", 1000)))
    except ValueError:
        raise UsageError("budgets must be integers") from None
    convention = conf.get("limit_state_convention", DISTINGUISHED)
    if convention not in (DISTINGUISHED, LIMINF):
        raise UsageError(f"unknown convention {convention!r}")
    selection = [p.strip() for p in conf.get("programs", "").split(";") if p.strip()]
    rows = reach_rows(alpha, selection or DEFAULT_SELECTION, conf.get("input", "empty"),
                      budget, convention)
    header = {"command": "report", "config": dict(sorted(conf.items()))}
    return format_rows(rows, REACH_FIELDS, header, args.format)


# --- entry point ----------------------------------------------------------------


def _engine_flags(p, alpha=True):
    if alpha:
        p.add_argument("--alpha", default="w", help="tape length, an ordinal literal")
    p.add_argument("--input", default="empty",
                   help="empty | code:FILE | canonical:G | intervals:A..B,... | marks:B,G")
    p.add_argument("--budget-steps", type=int, default=10**6)
    p.add_argument("--budget-jumps", type=int, default=1000)
    p.add_argument("--limit-state-convention", choices=[DISTINGUISHED, LIMINF],
                   default=DISTINGUISHED)
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="ittm", description="Transfinite machine experiments.")
    sp = ap.add_subparsers(dest="command", required=True)

    p = sp.add_parser("run", help="run one program")
    _engine_flags(p)
    p.add_argument("--program", required=True, help="assembly file or catalog:name(args)")
    p.add_argument("--param", action="append", default=[], help="ordinal marked on W1")
    p.add_argument("--probe", default="", help="output cells to report, comma separated")
    p.add_argument("--trace", help="write the JSONL trace here")
    p.set_defaults(func=cmd_run)

    p = sp.add_parser("reach", help="reachability rows over catalog programs")
    _engine_flags(p)
    p.add_argument("--program", action="append", default=[],
                   help="catalog entry such as move_right(0..19); repeatable")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_reach)

    p = sp.add_parser("pair-table", help="first pairs in pairing order")
    p.add_argument("--limit", type=int, default=16)
    p.add_argument("--verify", action="store_true", help="cross-check against an enumeration")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_pair_table)

    p = sp.add_parser("validate-code", help="check a code file")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=10**5, help="exploration budget")
    p.add_argument("--output")
    p.set_defaults(func=cmd_validate_code)

    p = sp.add_parser("report", help="reach rows driven by a key-value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_report)
    return ap


VALIDATION_ERRORS = (UsageError, OrdinalError, AsmError, codes.CodeError, TapeError)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if hasattr(args, "alpha"):
            args.alpha = parse_alpha(args.alpha)
        text = args.func(args)
    except VALIDATION_ERRORS as e:
        print(f"ittm: error: {e}", file=sys.stderr)
        return 2
    except (SemanticsError, RecursionError) as e:
        print(f"ittm: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
