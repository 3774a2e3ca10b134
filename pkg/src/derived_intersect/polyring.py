"""Exact multivariate polynomials over Q or a prime field.

A polynomial is a map from exponent tuples to coefficients.  Rationals are
``fractions.Fraction`` (always in lowest terms); elements of F_p are plain
ints in ``range(p)``.  Values are never mutated after construction.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

ORDERS = ("degrevlex", "lex", "deglex")
DEFAULT_PRIME = 32003


class FieldMismatchError(ValueError):
    """Raised when values over different coefficient fields are combined."""


class RingMismatchError(ValueError):
    pass


def _degrevlex_key(exps):
    return (sum(exps), tuple(-e for e in reversed(exps)))


def _deglex_key(exps):
    return (sum(exps), exps)


def _lex_key(exps):
    return exps


def order_key(order: str) -> Callable[[tuple], tuple]:
    """Sort key for exponent tuples: larger key means larger monomial."""
    if order == "degrevlex":
        return lru_cache(maxsize=1 << 16)(_degrevlex_key)
    if order == "deglex":
        return _deglex_key
    if order == "lex":
        return _lex_key
    raise ValueError(f"unknown monomial order {order!r}")


def monomial_compare(m1: Sequence[int], m2: Sequence[int], order: str = "degrevlex") -> int:
    """Return -1, 0 or 1 as ``m1`` is smaller, equal or larger than ``m2``."""
    if len(m1) != len(m2):
        raise ValueError("monomials of different arity")
    key = order_key(order)
    k1, k2 = key(tuple(m1)), key(tuple(m2))
    return (k1 > k2) - (k1 < k2)


def parse_field(spec) -> int:
    """Map ``'qq'``, ``'fp:p'``, ``0`` or a prime to a characteristic."""
    if spec in (None, 0, "qq", "QQ", "Q"):
        return 0
    if isinstance(spec, int):
        p = spec
    elif isinstance(spec, str) and spec.lower().startswith("fp"):
        rest = spec[2:].lstrip(":")
        p = int(rest) if rest else DEFAULT_PRIME
    else:
        raise ValueError(f"unknown field {spec!r}")
    if p < 3 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise ValueError(f"characteristic must be an odd prime, got {p}")
    return p


class PolyRing:
    """Polynomial ring k[names] with a default monomial order."""

    def __init__(self, names: Sequence[str], field=0, order: str = "degrevlex"):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        for nm in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
                raise ValueError(f"bad variable name {nm!r}")
        if order not in ORDERS:
            raise ValueError(f"unknown monomial order {order!r}")
        self.names = names
        self.nvars = len(names)
        self.p = parse_field(field)
        self.order = order
        self.key = order_key(order)
        self._index = {nm: i for i, nm in enumerate(names)}
        self._zero_exps = (0,) * self.nvars

    # -- identity ---------------------------------------------------------
    def _sig(self):
        return (self.names, self.p, self.order)

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self._sig() == other._sig()

    def __hash__(self):
        return hash(self._sig())

    def __repr__(self):
        return f"PolyRing({list(self.names)!r}, field={self.field_name!r}, order={self.order!r})"

    @property
    def field_name(self) -> str:
        return "qq" if self.p == 0 else f"fp:{self.p}"

    def check_same(self, other: "PolyRing"):
        if self is other or self == other:
            return
        if self.p != other.p:
            raise FieldMismatchError(f"cannot mix {self.field_name} and {other.field_name}")
        raise RingMismatchError("polynomials live in different rings")

    def with_order(self, order: str) -> "PolyRing":
        return PolyRing(self.names, self.p, order)

    # -- coefficients -----------------------------------------------------
    def coerce(self, c):
        if self.p:
            if isinstance(c, Fraction):
                num, den = c.numerator % self.p, c.denominator % self.p
                if den == 0:
                    raise ZeroDivisionError(f"denominator vanishes mod {self.p}")
                return num * pow(den, -1, self.p) % self.p
            return int(c) % self.p
        return Fraction(c)

    def inv(self, c):
        if self.p:
            return pow(c, -1, self.p)
        return 1 / c

    # -- constructors -----------------------------------------------------
    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.const(1)

    def const(self, c) -> "Poly":
        c = self.coerce(c)
        return Poly(self, {self._zero_exps: c} if c else {})

    def gen(self, name_or_index) -> "Poly":
        i = name_or_index if isinstance(name_or_index, int) else self._index[name_or_index]
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): self.coerce(1)})

    def gens(self) -> list["Poly"]:
        return [self.gen(i) for i in range(self.nvars)]

    def index(self, name: str) -> int:
        return self._index[name]

    def monomial(self, exps: Sequence[int], c=1) -> "Poly":
        exps = tuple(exps)
        if len(exps) != self.nvars or min(exps, default=0) < 0:
            raise ValueError("bad exponent vector")
        c = self.coerce(c)
        return Poly(self, {exps: c} if c else {})

    def from_dict(self, terms: Mapping[tuple, object]) -> "Poly":
        out = {}
        for e, c in terms.items():
            e = tuple(e)
            if len(e) != self.nvars:
                raise ValueError("exponent arity mismatch")
            c = self.coerce(c)
            if c:
                out[e] = c
        return Poly(self, out)

    def linear_form(self, coeffs: Sequence) -> "Poly":
        if len(coeffs) != self.nvars:
            raise ValueError("linear form has wrong length")
        out = {}
        for i, c in enumerate(coeffs):
            c = self.coerce(c)
            if c:
                e = [0] * self.nvars
                e[i] = 1
                out[tuple(e)] = c
        return Poly(self, out)

    def __call__(self, value) -> "Poly":
        if isinstance(value, Poly):
            self.check_same(value.ring)
            return value
        if isinstance(value, str):
            return self.parse(value)
        return self.const(value)

    def parse(self, text: str) -> "Poly":
        return _Parser(self, text).parse()

    def transfer(self, f: "Poly") -> "Poly":
        """Move ``f`` into this ring by variable name.

        Variables of ``f.ring`` absent here are set to zero, so this is the
        quotient map onto a coordinate subring as well as the inclusion of one.
        """
        if f.ring == self:
            return f
        if f.ring.p != self.p:
            raise FieldMismatchError(f"cannot mix {f.ring.field_name} and {self.field_name}")
        pos = [self._index.get(nm) for nm in f.ring.names]
        out = {}
        for e, c in f.terms.items():
            if any(k and pos[i] is None for i, k in enumerate(e)):
                continue
            ne = [0] * self.nvars
            for i, k in enumerate(e):
                if k:
                    ne[pos[i]] = k
            out[tuple(ne)] = c
        return Poly(self, out)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class _Parser:
    """Recursive-descent parser for ``3*x^2*y - 1/2*z + 4``."""

    def __init__(self, ring: PolyRing, text: str):
        self.ring = ring
        self.text = text
        self.toks = []
        for m in _TOKEN.finditer(text):
            num, name, op = m.groups()
            if num is not None:
                self.toks.append(("num", int(num)))
            elif name is not None:
                self.toks.append(("var", name))
            elif op is not None and not op.isspace():
                self.toks.append(("op", op))
        self.pos = 0

    def _peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def _take(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _error(self, msg):
        raise ValueError(f"cannot parse polynomial {self.text!r}: {msg}")

    def parse(self) -> "Poly":
        if not self.toks:
            self._error("empty input")
        out = self._expr()
        if self.pos != len(self.toks):
            self._error(f"unexpected token {self._peek()[1]!r}")
        return out

    def _expr(self):
        kind, val = self._peek()
        sign = 1
        if (kind, val) in (("op", "-"), ("op", "+")):
            self._take()
            sign = -1 if val == "-" else 1
        acc = self._term() * sign
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "+-":
                self._take()
                t = self._term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def _term(self):
        acc = self._power()
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "*":
                self._take()
                acc = acc * self._power()
            elif kind == "op" and val == "/":
                self._take()
                kind, den = self._take()
                if kind != "num" or den == 0:
                    self._error("division only by nonzero integer literals")
                acc = acc * self.ring.const(Fraction(1, den))
            else:
                return acc

    def _power(self):
        base = self._atom()
        kind, val = self._peek()
        if kind == "op" and val == "^":
            self._take()
            kind, e = self._take()
            if kind != "num":
                self._error("exponent must be a nonnegative integer")
            return base ** e
        return base

    def _atom(self):
        kind, val = self._take()
        if kind == "num":
            return self.ring.const(val)
        if kind == "var":
            if val not in self.ring._index:
                self._error(f"unknown variable {val!r}")
            return self.ring.gen(val)
        if (kind, val) == ("op", "("):
            inner = self._expr()
            if self._take() != ("op", ")"):
                self._error("missing ')'")
            return inner
        if (kind, val) == ("op", "-"):
            return -self._power()
        self._error(f"unexpected token {val!r}")


class Poly:
    """Immutable polynomial; ``terms`` maps exponent tuples to nonzero coefficients."""

    __slots__ = ("ring", "terms", "_sorted", "_hash")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms
        self._sorted = None
        self._hash = None

    # -- structure ------------------------------------------------------
    def sorted_terms(self) -> tuple:
        """Terms in descending order for the ring's monomial order."""
        if self._sorted is None:
            key = self.ring.key
            self._sorted = tuple(sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True))
        return self._sorted

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring._zero_exps in self.terms)

    def constant_value(self):
        return self.terms.get(self.ring._zero_exps, self.ring.coerce(0))

    def leading_term(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return self.sorted_terms()[0]

    @property
    def lm(self) -> tuple:
        return self.leading_term()[0]

    @property
    def lc(self):
        return self.leading_term()[1]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if not degs:
            return True
        return len(degs) == 1 and (degree is None or degs == {degree})

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        return self * self.ring.inv(self.lc)

    # -- arithmetic -----------------------------------------------------
    def _coerce_other(self, other) -> "Poly":
        if isinstance(other, Poly):
            self.ring.check_same(other.ring)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce_other(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if p:
                v %= p
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        p = self.ring.p
        return Poly(self.ring, {e: (-c % p if p else -c) for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce_other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        ring = self.ring
        p = ring.p
        if isinstance(other, (int, Fraction)):
            c = ring.coerce(other)
            if not c:
                return ring.zero()
            return Poly(ring, {e: (v * c % p if p else v * c) for e, v in self.terms.items()})
        other = self._coerce_other(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        if p:
            out = {e: c % p for e, c in out.items()}
        return Poly(ring, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == self.ring.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # -- calculus and substitution -------------------------------------
    def diff(self, var) -> "Poly":
        """Formal partial derivative with respect to a variable (name or index)."""
        i = var if isinstance(var, int) else self.ring.index(var)
        ring = self.ring
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                v = ring.coerce(c * e[i])
                if v:
                    out[ne] = v
        return Poly(ring, out)

    def subs(self, values: Mapping) -> "Poly":
        """Substitute polynomials or scalars for some variables."""
        ring = self.ring
        vals = {}
        for k, v in values.items():
            i = k if isinstance(k, int) else ring.index(k)
            vals[i] = v if isinstance(v, Poly) else ring.const(v)
        out = ring.zero()
        for e, c in self.terms.items():
            rest = list(e)
            term = ring.one()
            for i, v in vals.items():
                if e[i]:
                    term = term * v ** e[i]
                rest[i] = 0
            out = out + term * ring.monomial(rest, c)
        return out

    def set_zero(self, indices: Iterable[int]) -> "Poly":
        """Fast substitution of zero for the given variables."""
        idx = tuple(indices)
        return Poly(self.ring, {e: c for e, c in self.terms.items() if not any(e[i] for i in idx)})

    def evaluate(self, point: Sequence):
        ring = self.ring
        p = ring.p
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = v * x ** k
                    if p:
                        v %= p
            total += v
        return ring.coerce(total)

    # -- text ------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        names = self.ring.names
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (names[i] if k == 1 else f"{names[i]}^{k}") for i, k in enumerate(e) if k
            )
            neg = (not self.ring.p) and c < 0
            mag = -c if neg else c
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("- " if neg else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"Poly({str(self)!r})"
