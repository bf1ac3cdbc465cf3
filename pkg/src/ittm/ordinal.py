"""Ordinals below epsilon_0 in Cantor normal form.

An :class:`Ordinal` is an immutable tuple of ``(exponent, coefficient)`` terms
with strictly decreasing exponents and positive integer coefficients.  The
empty tuple is 0.  Python ints are accepted wherever an ordinal is expected.
"""
from __future__ import annotations

import re
from functools import lru_cache
from math import isqrt


class OrdinalError(ValueError):
    pass


class NotationOverflow(OrdinalError):
    """Raised when a result would have no Cantor normal form below epsilon_0."""


class OrdinalSyntaxError(OrdinalError):
    pass


def _finite_n(terms):
    # natural-number value, or -1 for infinite ordinals
    if not terms:
        return 0
    if len(terms) == 1 and not terms[0][0].terms:
        return terms[0][1]
    return -1


class Ordinal:
    __slots__ = ("terms", "_hash", "_n")

    def __init__(self, terms=()):
        terms = tuple((as_ordinal(e), int(c)) for e, c in terms)
        for i, (e, c) in enumerate(terms):
            if c < 1:
                raise OrdinalError(f"coefficient must be positive, got {c}")
            if i and not e < terms[i - 1][0]:
                raise OrdinalError("exponents must be strictly decreasing")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_n", _finite_n(terms))

    @classmethod
    def _raw(cls, terms):
        # trusted constructor: terms already canonical
        self = object.__new__(cls)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_n", _finite_n(terms))
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Ordinal is immutable")

    def __reduce__(self):
        return (Ordinal, (self.terms,))

    # --- basic views -------------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_finite(self):
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0].terms)

    def finite_value(self):
        if not self.terms:
            return 0
        if self.is_finite:
            return self.terms[0][1]
        raise OrdinalError(f"{self} is infinite")

    @property
    def leading_exponent(self):
        return self.terms[0][0] if self.terms else ZERO

    @property
    def leading_coefficient(self):
        return self.terms[0][1] if self.terms else 0

    @property
    def finite_part(self):
        if self.terms and not self.terms[-1][0].terms:
            return self.terms[-1][1]
        return 0

    @property
    def is_limit(self):
        return bool(self.terms) and bool(self.terms[-1][0].terms)

    @property
    def is_successor(self):
        return bool(self.terms) and not self.terms[-1][0].terms

    # --- python protocol ---------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.from_int(other) if other >= 0 else None
            if other is None:
                return False
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self is other or self.terms == other.terms

    def _cmp(self, other):
        if isinstance(other, int):
            other = as_ordinal(other)
        elif not isinstance(other, Ordinal):
            return None
        return compare(self, other)

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.finite_value()) if self.is_finite else hash(self.terms)
            object.__setattr__(self, "_hash", h)
        return h

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(as_ordinal(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(as_ordinal(other), self)

    def __pow__(self, other):
        if self == OMEGA:
            return omega_pow(other)
        return power(self, as_ordinal(other).finite_value())

    def __repr__(self):
        return f"Ordinal({to_literal(self)!r})"

    def __str__(self):
        return to_literal(self)

    @staticmethod
    def from_int(n):
        if n < 0:
            raise OrdinalError(f"negative ordinal {n}")
        if n < len(_SMALL):
            return _SMALL[n]
        return Ordinal._raw(((ZERO, n),))


ZERO = Ordinal._raw(())
_SMALL = [ZERO] + [Ordinal._raw(((ZERO, n),)) for n in range(1, 257)]
ONE = _SMALL[1]
OMEGA = Ordinal._raw(((ONE, 1),))


def as_ordinal(x):
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Ordinal.from_int(x)
    if isinstance(x, str):
        return parse(x)
    raise TypeError(f"cannot interpret {x!r} as an ordinal")


def compare(a, b):
    """Return -1, 0 or 1 as ``a`` is below, equal to or above ``b``."""
    if a.__class__ is not Ordinal or b.__class__ is not Ordinal:
        a, b = as_ordinal(a), as_ordinal(b)
    if a is b:
        return 0
    na, nb = a._n, b._n
    if na >= 0:
        if nb >= 0:
            return (na > nb) - (na < nb)
        return -1
    if nb >= 0:
        return 1
    ta, tb = a.terms, b.terms
    for (ea, ca), (eb, cb) in zip(ta, tb):
        if ea is not eb:
            c = compare(ea, eb)
            if c:
                return c
        if ca != cb:
            return -1 if ca < cb else 1
    if len(ta) == len(tb):
        return 0
    return -1 if len(ta) < len(tb) else 1


def add(a, b):
    a, b = as_ordinal(a), as_ordinal(b)
    if not b.terms:
        return a
    if not a.terms:
        return b
    e, c = b.terms[0]
    kept = []
    for ea, ca in a.terms:
        k = compare(ea, e)
        if k > 0:
            kept.append((ea, ca))
        elif k == 0:
            kept.append((e, ca + c))
            return Ordinal._raw(tuple(kept) + b.terms[1:])
        else:
            break
    return Ordinal._raw(tuple(kept) + b.terms)


def sub(b, a):
    """Left subtraction: the unique ``d`` with ``a + d == b``; requires ``a <= b``."""
    a, b = as_ordinal(a), as_ordinal(b)
    if compare(a, b) > 0:
        raise OrdinalError(f"cannot subtract {a} from smaller {b}")
    ta, tb = a.terms, b.terms
    for i, ((ea, ca), (eb, cb)) in enumerate(zip(ta, tb)):
        if ea == eb and ca == cb:
            continue
        # first difference: b's term is larger here
        if ea == eb:
            return Ordinal._raw(((eb, cb - ca),) + tb[i + 1:])
        return Ordinal._raw(tb[i:])
    return Ordinal._raw(tb[len(ta):])


def mul(a, b):
    a, b = as_ordinal(a), as_ordinal(b)
    if not a.terms or not b.terms:
        return ZERO
    lead_e, lead_c = a.terms[0]
    result = ZERO
    for e, c in b.terms:
        if not e.terms:
            piece = Ordinal._raw(((lead_e, lead_c * c),) + a.terms[1:])
        else:
            piece = Ordinal._raw(((add(lead_e, e), c),))
        result = add(result, piece)
    return result


def power(a, n):
    """``a`` raised to a finite power ``n``."""
    result = ONE
    for _ in range(n):
        result = mul(result, a)
    return result


def omega_pow(a):
    a = as_ordinal(a)
    return Ordinal._raw(((a, 1),))


def classify(a):
    """Return ``("zero", None)``, ``("successor", predecessor)`` or ``("limit", None)``."""
    a = as_ordinal(a)
    if not a.terms:
        return ("zero", None)
    e, c = a.terms[-1]
    if e.terms:
        return ("limit", None)
    head = a.terms[:-1]
    pred = Ordinal._raw(head + (((ZERO, c - 1),) if c > 1 else ()))
    return ("successor", pred)


def predecessor(a):
    kind, p = classify(a)
    if kind != "successor":
        raise OrdinalError(f"{a} has no predecessor")
    return p


def strip_finite(a):
    """Split ``a`` into ``(lam, n)`` with ``lam`` zero or a limit and ``a == lam + n``."""
    a = as_ordinal(a)
    n = a.finite_part
    if n:
        return Ordinal._raw(a.terms[:-1]), n
    return a, 0


def next_limit(t):
    lam, _ = strip_finite(t)
    return add(lam, OMEGA)


def is_mult_closed(a):
    """True iff ``a`` is infinite and closed under ordinal multiplication.

    These are exactly the ordinals ``w^(w^b)``.
    """
    a = as_ordinal(a)
    if len(a.terms) != 1 or a.terms[0][1] != 1:
        return False
    e = a.terms[0][0]
    return len(e.terms) == 1 and e.terms[0][1] == 1


def is_power_of_omega(a):
    """True iff ``a`` is ``w^b`` for some ``b >= 1`` (an infinite additive principal)."""
    a = as_ordinal(a)
    return len(a.terms) == 1 and a.terms[0][1] == 1 and not a.terms[0][0].is_zero


# --- Goedel pairing ----------------------------------------------------------
#
# Pairs are ordered by max(b, c), then lexicographically.  The block of pairs
# with maximum m is (0,m) < (1,m) < ... < (m,0) < ... < (m,m), of order type
# m*2+1.  ``_block_start(m)`` is the order type of all pairs with max < m.


def _last_piece_split(e):
    """Write ``e = rest + w^l`` (one copy of the last term removed)."""
    le, lc = e.terms[-1]
    head = e.terms[:-1]
    if lc > 1:
        head = head + ((le, lc - 1),)
    return Ordinal._raw(head)


def _h(e):
    # _block_start(w^e) == w^_h(e) for e >= 1
    return add(_last_piece_split(e), e)


def _h_inverse(x):
    """Largest ``e >= 1`` with ``_h(e) <= x``; requires ``x >= 1``."""
    x1, a = x.terms[0]
    rest = Ordinal._raw(x.terms[1:])
    if a % 2:
        return Ordinal._raw(((x1, (a + 1) // 2),))
    return add(Ordinal._raw(((x1, a // 2),)), rest)


@lru_cache(maxsize=65536)
def _block_start(m):
    if m.is_finite:
        n = m.finite_value()
        return as_ordinal(n * n)
    terms = m.terms
    e0, c0 = terms[0]
    value = add(omega_pow(_h(e0)), mul(omega_pow(add(e0, e0)), c0 - 1))
    acc = Ordinal._raw((terms[0],))
    for e, c in terms[1:]:
        if e.terms:
            value = add(value, Ordinal._raw(((add(e0, e), c),)))
            acc = add(acc, Ordinal._raw(((e, c),)))
        else:
            x = add(acc, acc)
            value = add(add(value, mul(x, c)), c)
            acc = add(acc, c)
    return value


def _largest_max(r):
    """Largest ``m`` with ``_block_start(m) <= r``."""
    if r.is_finite:
        return as_ordinal(isqrt(r.finite_value()))
    e0 = _h_inverse(r.leading_exponent)
    lo, hi = 1, r.leading_coefficient + 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _block_start(Ordinal._raw(((e0, mid),))) <= r:
            lo = mid
        else:
            hi = mid - 1
    acc = Ordinal._raw(((e0, lo),))
    while True:
        d = sub(r, _block_start(acc))
        if not d.terms:
            return acc
        d1 = d.leading_exponent
        k = compare(d1, e0)
        if k > 0:
            acc = add(acc, Ordinal._raw(((sub(d1, e0), d.leading_coefficient),)))
            continue
        if k == 0:
            lo, hi = 0, d.leading_coefficient
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if _block_start(add(acc, mid)) <= r:
                    lo = mid
                else:
                    hi = mid - 1
            acc = add(acc, lo)
        return acc


def godel_pair(b, c):
    b, c = as_ordinal(b), as_ordinal(c)
    if compare(b, c) < 0:
        return add(_block_start(c), b)
    return add(add(_block_start(b), b), c)


def godel_unpair(r):
    r = as_ordinal(r)
    m = _largest_max(r)
    off = sub(r, _block_start(m))
    if compare(off, m) < 0:
        return off, m
    return m, sub(off, m)


# --- literals ----------------------------------------------------------------


def to_literal(a):
    a = as_ordinal(a)
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if not e.terms:
            parts.append(str(c))
            continue
        if e == ONE:
            s = "w"
        elif e.is_finite:
            s = f"w^{e.finite_value()}"
        else:
            s = f"w^({to_literal(e)})"
        if c != 1:
            s += f"*{c}"
        parts.append(s)
    return "+".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = []
        for m in _TOKEN.finditer(text):
            if m.group(1) is not None:
                self.toks.append(("nat", int(m.group(1))))
            elif m.group(2).strip():
                self.toks.append(("sym", m.group(2)))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind, value=None):
        k, v = self.peek()
        if k != kind or (value is not None and v != value):
            raise OrdinalSyntaxError(f"unexpected token {v!r} in {self.text!r}")
        self.i += 1
        return v

    def ordinal(self):
        k, v = self.peek()
        if k == "nat" and v == 0:
            self.i += 1
            return ZERO
        terms = [self.term()]
        while self.peek() == ("sym", "+"):
            self.i += 1
            terms.append(self.term())
        for (e1, _), (e2, _) in zip(terms, terms[1:]):
            if not e2 < e1:
                raise OrdinalSyntaxError(f"non-canonical literal {self.text!r}")
        return Ordinal._raw(tuple(terms))

    def term(self):
        k, v = self.peek()
        if k == "nat":
            self.i += 1
            if v == 0:
                raise OrdinalSyntaxError(f"zero term in {self.text!r}")
            return (ZERO, v)
        self.take("sym", "w")
        exp = ONE
        if self.peek() == ("sym", "^"):
            self.i += 1
            if self.peek() == ("sym", "("):
                self.i += 1
                exp = self.ordinal()
                self.take("sym", ")")
            else:
                exp = as_ordinal(self.take("nat"))
            if exp.is_zero:
                raise OrdinalSyntaxError(f"use a natural number instead of w^0 in {self.text!r}")
        coef = 1
        if self.peek() == ("sym", "*"):
            self.i += 1
            coef = self.take("nat")
            if coef == 0:
                raise OrdinalSyntaxError(f"zero coefficient in {self.text!r}")
        return (exp, coef)


def parse(text):
    """Parse an ordinal literal such as ``w^2*3+w+4`` or ``w^(w)``."""
    p = _Parser(text)
    if not p.toks:
        raise OrdinalSyntaxError("empty ordinal literal")
    result = p.ordinal()
    if p.i != len(p.toks):
        raise OrdinalSyntaxError(f"trailing input in {text!r}")
    return result
