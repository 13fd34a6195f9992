"""Exact sparse multivariate polynomials over the rationals.

A :class:`Poly` owns an ordered tuple of variable names and a map from
exponent vectors to nonzero :class:`fractions.Fraction` coefficients.
Values are immutable; binary operations align operands on the union of
their variable names (left operand's order first).

Terms are printed and hashed in graded-lex order: higher total degree
first, ties broken lexicographically with the poly's own variable order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

from . import _zpoly as zp

Exp = Tuple[int, ...]
Number = Union[int, Fraction]
Coercible = Union["Poly", int, Fraction]

NEG_INF = -math.inf  # total degree of the zero polynomial


class PolyError(ValueError):
    """Malformed polynomial input or an operation outside its domain."""


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficient must be rational, got {type(c).__name__}")


class Poly:
    __slots__ = ("_vars", "_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Exp, Number]] = None,
                 variables: Sequence[str] = ()):
        self._vars: Tuple[str, ...] = tuple(variables)
        if len(set(self._vars)) != len(self._vars):
            raise PolyError(f"duplicate variable names in {self._vars}")
        n = len(self._vars)
        clean: Dict[Exp, Fraction] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != n:
                raise PolyError(f"exponent {e} does not match variables {self._vars}")
            if any(k < 0 for k in e):
                raise PolyError(f"negative exponent {e}")
            c = _frac(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        self._terms = clean
        self._hash = None

    # -- construction -----------------------------------------------------

    @classmethod
    def const(cls, c: Number, variables: Sequence[str] = ()) -> "Poly":
        return cls({(0,) * len(variables): c}, variables)

    @classmethod
    def var(cls, name: str, variables: Optional[Sequence[str]] = None) -> "Poly":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            raise PolyError(f"{name!r} not in {variables}")
        e = tuple(1 if v == name else 0 for v in variables)
        return cls({e: 1}, variables)

    @classmethod
    def parse(cls, text: str, variables: Optional[Sequence[str]] = None) -> "Poly":
        return parse_poly(text, variables)

    @classmethod
    def _raw(cls, terms: Dict[Exp, Fraction], variables: Tuple[str, ...]) -> "Poly":
        p = object.__new__(cls)
        p._vars = variables
        p._terms = terms
        p._hash = None
        return p

    # -- inspection -------------------------------------------------------

    @property
    def variables(self) -> Tuple[str, ...]:
        return self._vars

    @property
    def terms(self) -> Mapping[Exp, Fraction]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise PolyError(f"{self} is not constant")
        return next(iter(self._terms.values()), Fraction(0))

    def degree(self, var: Optional[str] = None):
        """Total degree, or degree in ``var``; ``-inf`` for the zero poly."""
        if not self._terms:
            return NEG_INF
        if var is None:
            return max(sum(e) for e in self._terms)
        if var not in self._vars:
            return 0
        i = self._vars.index(var)
        return max(e[i] for e in self._terms)

    def used_variables(self) -> Tuple[str, ...]:
        return tuple(v for i, v in enumerate(self._vars)
                     if any(e[i] for e in self._terms))

    def sorted_terms(self) -> Iterator[Tuple[Exp, Fraction]]:
        """Terms in graded-lex order, largest first."""
        for e in sorted(self._terms, key=lambda e: (sum(e), e), reverse=True):
            yield e, self._terms[e]

    def leading_term(self) -> Tuple[Exp, Fraction]:
        if not self._terms:
            raise PolyError("zero polynomial has no leading term")
        e = max(self._terms, key=lambda e: (sum(e), e))
        return e, self._terms[e]

    def max_abs_coeff(self) -> Fraction:
        return max((abs(c) for c in self._terms.values()), default=Fraction(0))

    # -- variable bookkeeping --------------------------------------------

    def with_variables(self, variables: Sequence[str]) -> "Poly":
        """Re-express over ``variables`` (must cover every used variable)."""
        variables = tuple(variables)
        if variables == self._vars:
            return self
        idx = []
        for v in variables:
            idx.append(self._vars.index(v) if v in self._vars else None)
        for i, v in enumerate(self._vars):
            if v not in variables and any(e[i] for e in self._terms):
                raise PolyError(f"variable {v!r} is used but missing from {variables}")
        terms = {tuple(e[i] if i is not None else 0 for i in idx): c
                 for e, c in self._terms.items()}
        return Poly._raw(terms, variables)

    def compress(self) -> "Poly":
        """Drop variables that do not occur."""
        return self.with_variables(self.used_variables())

    def _aligned(self, other: "Poly") -> Tuple[Tuple[str, ...], "Poly", "Poly"]:
        if self._vars == other._vars:
            return self._vars, self, other
        union = self._vars + tuple(v for v in other._vars if v not in self._vars)
        return union, self.with_variables(union), other.with_variables(union)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return Poly.const(_frac(other), self._vars)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vs, a, b = self._aligned(other)
        out = dict(a._terms)
        for e, c in b._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(out, vs)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({e: -c for e, c in self._terms.items()}, self._vars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            k = _frac(other)
            if not k:
                return Poly._raw({}, self._vars)
            return Poly._raw({e: c * k for e, c in self._terms.items()}, self._vars)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vs, a, b = self._aligned(other)
        out: Dict[Exp, Fraction] = {}
        get = out.get
        for e1, c1 in a._terms.items():
            for e2, c2 in b._terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = get(e, 0) + c1 * c2
        return Poly._raw({e: c for e, c in out.items() if c}, vs)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            if not other.is_constant():
                raise PolyError("division only by constants; use divexact()")
            other = other.constant_value()
        k = _frac(other)
        if not k:
            raise ZeroDivisionError("division of polynomial by zero")
        return self * (1 / k)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise PolyError("exponent must be a nonnegative integer")
        result = Poly.const(1, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def divexact(self, other: "Poly") -> "Poly":
        """Exact quotient; raises :class:`PolyError` if ``other`` does not divide."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        vs, a, b = self._aligned(other)
        sa, za = a.to_zpoly()
        sb, zb = b.to_zpoly()
        q = zp.zdivexact(za, zb)
        if q is None:
            raise PolyError("polynomial division is not exact")
        return Poly.from_zpoly(q, vs, sa / sb)

    # -- comparison -------------------------------------------------------

    def _canonical(self):
        p = self.compress()
        order = sorted(range(len(p._vars)), key=lambda i: p._vars[i])
        vs = tuple(p._vars[i] for i in order)
        return vs, frozenset((tuple(e[i] for i in order), c) for e, c in p._terms.items())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if self._vars == other._vars:
            return self._terms == other._terms
        return self._canonical() == other._canonical()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._canonical())
        return self._hash

    # -- calculus and substitution ---------------------------------------

    def diff(self, var: str) -> "Poly":
        """Formal partial derivative with respect to ``var``."""
        if var not in self._vars:
            raise PolyError(f"unknown variable {var!r}; have {self._vars}")
        i = self._vars.index(var)
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Poly._raw(out, self._vars)

    def subs(self, mapping: Mapping[str, Coercible]) -> "Poly":
        """Simultaneous substitution of polynomials/rationals for variables."""
        repl: Dict[str, Poly] = {}
        for k, v in mapping.items():
            if k not in self._vars:
                continue
            repl[k] = v if isinstance(v, Poly) else Poly.const(_frac(v))
        if not repl:
            return self
        keep = tuple(v for v in self._vars if v not in repl)
        allvars = list(keep)
        for r in repl.values():
            for v in r._vars:
                if v not in allvars:
                    allvars.append(v)
        allvars = tuple(allvars)
        repl = {k: r.with_variables(allvars) for k, r in repl.items()}
        idx = {v: i for i, v in enumerate(self._vars)}
        powers: Dict[Tuple[str, int], Poly] = {}

        def power(name, k):
            key = (name, k)
            if key not in powers:
                powers[key] = repl[name] ** k
            return powers[key]

        result: Dict[Exp, Fraction] = {}
        keep_pos = [allvars.index(v) for v in keep]
        for e, c in self._terms.items():
            base = [0] * len(allvars)
            for v, pos in zip(keep, keep_pos):
                base[pos] = e[idx[v]]
            term = Poly._raw({tuple(base): c}, allvars)
            for name in repl:
                k = e[idx[name]]
                if k:
                    term = term * power(name, k)
            for te, tc in term._terms.items():
                s = result.get(te, 0) + tc
                if s:
                    result[te] = s
                else:
                    result.pop(te, None)
        return Poly._raw(result, allvars)

    def coeffs(self, var: str) -> Dict[int, "Poly"]:
        """Coefficients with respect to ``var`` as polys in the other variables."""
        if var not in self._vars:
            return {0: self} if self._terms else {}
        i = self._vars.index(var)
        rest = self._vars[:i] + self._vars[i + 1:]
        buckets: Dict[int, Dict[Exp, Fraction]] = {}
        for e, c in self._terms.items():
            buckets.setdefault(e[i], {})[e[:i] + e[i + 1:]] = c
        return {k: Poly._raw(t, rest) for k, t in buckets.items()}

    def homogeneous_part(self, k: int) -> "Poly":
        return Poly._raw({e: c for e, c in self._terms.items() if sum(e) == k}, self._vars)

    def top_form(self) -> "Poly":
        """Homogeneous component of top total degree."""
        if not self._terms:
            raise PolyError("top form of the zero polynomial")
        return self.homogeneous_part(self.degree())

    # -- evaluation -------------------------------------------------------

    def eval(self, point: Mapping[str, object], mode: str = "exact"):
        """Evaluate at ``point``.

        ``mode="exact"`` returns a Fraction (inputs must be rational);
        ``mode="complex"`` evaluates in double-precision complex arithmetic
        with a nested Horner scheme, one variable at a time.
        """
        missing = [v for v in self.used_variables() if v not in point]
        if missing:
            raise PolyError(f"no value bound for {missing}")
        if mode == "exact":
            vals = [_frac(point[v]) if v in point else Fraction(0) for v in self._vars]
            total = Fraction(0)
            for e, c in self._terms.items():
                t = c
                for x, k in zip(vals, e):
                    if k:
                        t *= x ** k
                total += t
            return total
        if mode == "complex":
            vals = [complex(point[v]) if v in point else 0j for v in self._vars]
            items = [(e, complex(c)) for e, c in self._terms.items()]
            return _horner(items, vals, 0)
        raise PolyError(f"unknown evaluation mode {mode!r}")

    # -- integer form -----------------------------------------------------

    def to_zpoly(self) -> Tuple[Fraction, zp.ZPoly]:
        """``self == scale * Z`` with ``Z`` integral and primitive."""
        if not self._terms:
            return Fraction(0), {}
        den = 1
        for c in self._terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = {e: (c * den).numerator for e, c in self._terms.items()}
        g = zp.zcontent(ints)
        return Fraction(g, den), {e: c // g for e, c in ints.items()}

    @classmethod
    def from_zpoly(cls, z: zp.ZPoly, variables: Sequence[str], scale: Number = 1) -> "Poly":
        s = _frac(scale)
        if s == 1:
            return cls._raw({e: Fraction(c) for e, c in z.items()}, tuple(variables))
        return cls._raw({e: c * s for e, c in z.items() if c}, tuple(variables))

    # -- printing ---------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r}, {self._vars!r})"


def _horner(items, vals, i):
    if i == len(vals):
        return sum(c for _, c in items)
    groups: Dict[int, list] = {}
    for e, c in items:
        groups.setdefault(e[i], []).append((e, c))
    x = vals[i]
    acc = 0j
    for k in range(max(groups), -1, -1):
        acc = acc * x
        if k in groups:
            acc += _horner(groups[k], vals, i + 1)
    return acc


@dataclass(frozen=True)
class HomogPoly:
    """A polynomial homogeneous of ``claimed_degree`` (extra variable included)."""

    base: Poly
    claimed_degree: int

    def __post_init__(self):
        for e in self.base.terms:
            if sum(e) != self.claimed_degree:
                raise PolyError(f"term of degree {sum(e)} in a form of degree {self.claimed_degree}")


def homogenize(p: Poly, t: str = "t", degree: Optional[int] = None) -> HomogPoly:
    if t in p.variables:
        raise PolyError(f"homogenizing variable {t!r} already in use")
    d = p.degree() if degree is None else degree
    if p.is_zero():
        return HomogPoly(Poly({}, p.variables + (t,)), 0 if degree is None else degree)
    terms = {e + (d - sum(e),): c for e, c in p.terms.items()}
    return HomogPoly(Poly(terms, p.variables + (t,)), d)


def dehomogenize(h: HomogPoly, var: str) -> Poly:
    """Set ``var`` to 1 and drop it."""
    return h.base.subs({var: 1}).with_variables(
        tuple(v for v in h.base.variables if v != var))


# ---------------------------------------------------------------------------
# text syntax

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolyError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, tokens, variables):
        self.toks = tokens
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise PolyError(f"expected {op!r}, got {val!r}")

    def expr(self) -> Poly:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            left = self.term()
            if val == "-":
                left = -left
        else:
            left = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                right = self.term()
                left = left + right if val == "+" else left - right
            else:
                return left

    def term(self) -> Poly:
        left = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                left = left * self.power()
            elif kind == "op" and val == "/":
                self.take()
                right = self.power()
                if not right.is_constant():
                    raise PolyError("division by a non-constant polynomial")
                left = left / right.constant_value()
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                left = left * self.power()
            else:
                return left

    def power(self) -> Poly:
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return -self.power()
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k2, v2 = self.take()
            if k2 != "num" or not v2.isdigit():
                raise PolyError(f"exponent must be a nonnegative integer literal, got {v2!r}")
            base = base ** int(v2)
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return Poly.const(Fraction(val), self.variables)
        if kind == "name":
            if val not in self.variables:
                raise PolyError(f"unknown variable {val!r}; expected one of {self.variables}")
            return Poly.var(val, self.variables)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise PolyError(f"unexpected token {val!r}")


def parse_poly(text: str, variables: Optional[Sequence[str]] = None) -> Poly:
    """Parse ``x^2 + 3/2*x*y - 1`` style text.

    Variables default to identifiers in order of first appearance.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise PolyError("empty polynomial text")
    if variables is None:
        seen = []
        for kind, val in tokens:
            if kind == "name" and val not in seen:
                seen.append(val)
        variables = tuple(seen)
    parser = _Parser(tokens, tuple(variables))
    result = parser.expr()
    if parser.i != len(tokens):
        raise PolyError(f"trailing input at token {parser.i}: {tokens[parser.i][1]!r}")
    return result.with_variables(tuple(variables))


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(p.variables, e) if k)
        mag = abs(c)
        if not mono:
            body = _format_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_format_coeff(mag)}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def poly_vars(*names: str) -> Tuple[Poly, ...]:
    """Convenience: generator polynomials over the shared variable tuple."""
    return tuple(Poly.var(n, names) for n in names)

