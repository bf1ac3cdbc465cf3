"""Ordinal codes: relations on a tape of length alpha read through the pairing function.

A code ``E`` is a set of cells; cell ``godel_pair(a, b)`` being set means
``a E b``.  The coded ordinal is the collapse of field 0.

Canonical codes use field 0 for the coded ordinal and field ``1+b`` for each
``b < gamma``, with ``(1+b) E (1+b')`` iff ``b < b'`` and ``(1+b) E 0``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .ordinal import (
    ONE, ZERO, Ordinal, add, as_ordinal, godel_pair, godel_unpair, is_mult_closed, parse,
    sub, to_literal,
)
from .tape import Base, IntervalSet, TapeContent


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Invalid:
    reason: str


@dataclass(frozen=True)
class Unknown:
    reason: str


@dataclass(frozen=True)
class NotOrdinal:
    reason: str


@dataclass(frozen=True)
class AlphaCode:
    alpha: Ordinal
    membership: Callable = field(compare=False, repr=False)
    pairs: Optional[frozenset] = None      # explicit finite relation, if any
    canonical: Optional[Ordinal] = None    # gamma for canonical codes
    support: Optional[int] = None          # every field is below this natural number

    def holds(self, a, b):
        return bool(self.membership(godel_pair(a, b)))

    def __contains__(self, cell):
        return bool(self.membership(as_ordinal(cell)))

    def to_json(self):
        if self.canonical is not None:
            return {"canonical": to_literal(self.canonical), "alpha": to_literal(self.alpha)}
        if self.pairs is None:
            raise CodeError("only finite and canonical codes serialize")
        pairs = sorted(self.pairs, key=lambda p: (p[0], p[1]))
        return {"alpha": to_literal(self.alpha),
                "pairs": [[to_literal(a), to_literal(b)] for a, b in pairs]}


def _check_alpha(alpha):
    alpha = as_ordinal(alpha)
    if not is_mult_closed(alpha):
        raise CodeError(f"{to_literal(alpha)} is not multiplicatively closed")
    return alpha


def _field_value(f):
    """The ordinal b with 1+b = f, for f >= 1."""
    return sub(f, ONE) if f.is_finite else f


def canonical_code(gamma, alpha):
    gamma, alpha = as_ordinal(gamma), _check_alpha(alpha)
    if not gamma < alpha:
        raise CodeError("gamma must be below alpha")

    def member(cell):
        a, b = godel_unpair(as_ordinal(cell))
        if a.is_zero:
            return False
        va = _field_value(a)
        if not va < gamma:
            return False
        if b.is_zero:
            return True
        vb = _field_value(b)
        return vb < gamma and va < vb

    support = gamma.finite_value() + 1 if gamma.is_finite else None
    return AlphaCode(alpha, member, canonical=gamma, support=support)


def finite_code(pairs, alpha):
    alpha = _check_alpha(alpha)
    rel = frozenset((as_ordinal(a), as_ordinal(b)) for a, b in pairs)
    for a, b in rel:
        if not (a < alpha and b < alpha):
            raise CodeError("code fields must lie below alpha")
    cells = frozenset(godel_pair(a, b) for a, b in rel)
    fields = {x for p in rel for x in p}
    support = None
    if all(f.is_finite for f in fields):
        support = max((f.finite_value() for f in fields), default=-1) + 1
    return AlphaCode(alpha, lambda c: as_ordinal(c) in cells, pairs=rel, support=support)


def predicate_code(pred, alpha, support=None):
    """Code given by an arbitrary membership predicate on cells."""
    return AlphaCode(_check_alpha(alpha), pred, support=support)


# --- exploration --------------------------------------------------------------


class _OutOfBudget(Exception):
    pass


class _Explorer:
    """Predecessor lookups with a budget on membership evaluations."""

    def __init__(self, code, budget):
        self.code = code
        self.left = budget
        self.cache = {}

    def preds(self, b):
        if b in self.cache:
            return self.cache[b]
        code = self.code
        if code.pairs is not None:
            out = sorted((a for a, bb in code.pairs if bb == b), key=lambda x: x)
            self.left -= len(out) + 1
        elif code.support is not None:
            out = []
            for a in range(code.support):
                self.left -= 1
                if self.left < 0:
                    raise _OutOfBudget
                if code.holds(a, b):
                    out.append(as_ordinal(a))
        else:
            # infinitely many candidate fields: never complete
            raise _OutOfBudget
        if self.left < 0:
            raise _OutOfBudget
        self.cache[b] = out
        return out

    def fields(self):
        code = self.code
        if code.pairs is not None:
            return sorted({x for p in code.pairs for x in p} | {ZERO})
        if code.support is not None:
            return [as_ordinal(a) for a in range(code.support)]
        raise _OutOfBudget


def _collapse(explorer, roots):
    """Collapse values (hashable nested frozensets) of every field below ``roots``.

    Raises ValueError on an E-cycle.
    """
    value = {}
    onstack = set()

    def visit(x):
        if x in value:
            return value[x]
        if x in onstack:
            raise ValueError("ill-founded")
        onstack.add(x)
        v = frozenset(visit(y) for y in explorer.preds(x))
        onstack.discard(x)
        value[x] = v
        return v

    for r in roots:
        visit(r)
    return value


def _as_ordinal_set(s, memo):
    """Natural number n if the hereditarily finite set ``s`` is the ordinal n."""
    if s in memo:
        return memo[s]
    vals = [_as_ordinal_set(x, memo) for x in s]
    res = None
    if all(v is not None for v in vals) and sorted(vals) == list(range(len(vals))):
        res = len(vals)
    memo[s] = res
    return res


def _non_extensional(value):
    seen = {}
    for x in sorted(value):
        v = value[x]
        if v in seen:
            return seen[v], x
        seen[v] = x
    return None


def decode(code, budget, fast=True):
    """The ordinal coded by ``code``, ``NotOrdinal`` or ``Unknown``."""
    if fast and code.canonical is not None:
        return code.canonical
    ex = _Explorer(code, budget)
    try:
        value = _collapse(ex, [ZERO])
    except ValueError:
        return NotOrdinal("ill-founded")
    except _OutOfBudget:
        return Unknown("budget exhausted")
    clash = _non_extensional(value)
    if clash:
        return NotOrdinal(f"fields {to_literal(clash[0])} and {to_literal(clash[1])} "
                          "have the same elements")
    n = _as_ordinal_set(value[ZERO], {})
    if n is None:
        return NotOrdinal("the collapse of 0 is not an ordinal")
    return as_ordinal(n)


def validate(code, budget):
    """Bounded check of well-foundedness and extensionality."""
    if code.canonical is not None:
        return Valid()
    ex = _Explorer(code, budget)
    try:
        fields = ex.fields()
        value = _collapse(ex, fields)
    except ValueError:
        return Invalid("ill-founded")
    except _OutOfBudget:
        return _bounded_search(code, budget)
    clash = _non_extensional(value)
    if clash:
        return Invalid("extensionality")
    return Valid()


def _bounded_search(code, budget):
    """Look for a violation among small fields; ``Unknown`` if none is found."""
    n = 1
    while (n + 1) ** 2 <= budget:
        n += 1
    small = _Explorer(predicate_code(code.membership, code.alpha, support=n)
                      if code.pairs is None else code, budget)
    try:
        _collapse(small, small.fields())
    except ValueError:
        # a cycle among small fields is a genuine cycle
        return Invalid("ill-founded")
    except _OutOfBudget:
        pass
    # equal predecessor sets in a window are not conclusive: larger fields may differ
    return Unknown("budget exhausted")


# --- serialization and tapes --------------------------------------------------


def from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    alpha = parse(obj["alpha"]) if isinstance(obj["alpha"], str) else as_ordinal(obj["alpha"])
    if "canonical" in obj:
        g = obj["canonical"]
        return canonical_code(parse(g) if isinstance(g, str) else g, alpha)
    pairs = [tuple(parse(x) if isinstance(x, str) else as_ordinal(x) for x in p)
             for p in obj["pairs"]]
    return finite_code(pairs, alpha)


def to_json(code):
    return code.to_json()


def code_cells(code):
    """Cells of a code with finite support, in increasing order."""
    if code.pairs is not None:
        return sorted(godel_pair(a, b) for a, b in code.pairs)
    if code.support is None:
        raise CodeError("code has infinite support")
    s = code.support
    return sorted(godel_pair(a, b) for a, b in itertools.product(range(s), repeat=2)
                  if code.holds(a, b))


def code_tape(code, alpha=None, name="opaque"):
    """Read-only input tape holding ``code``.

    Codes with finite support may be placed on any tape that holds their
    cells; others become an opaque base predicate named ``name``.
    """
    alpha = code.alpha if alpha is None else as_ordinal(alpha)
    if code.pairs is not None or code.support is not None:
        cells = code_cells(code)
        if cells and not cells[-1] < alpha:
            raise CodeError("code cells do not fit on the tape")
        ones = IntervalSet([(c, add(c, ONE)) for c in cells])
        return TapeContent(alpha, ones=ones, read_only=True)
    if alpha != code.alpha:
        raise CodeError("codes with infinite support stay on their own tape length")
    key = f"canonical:{to_literal(code.canonical)}" if code.canonical is not None \
        else f"code:{name}"
    return TapeContent(alpha, base=Base(key, None, code.membership), read_only=True)


__all__ = [
    "AlphaCode", "CodeError", "Invalid", "NotOrdinal", "Unknown", "Valid",
    "canonical_code", "code_cells", "code_tape", "decode", "finite_code", "from_json",
    "predicate_code", "to_json", "validate",
]
