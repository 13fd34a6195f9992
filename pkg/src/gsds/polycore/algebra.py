"""Elimination primitives: resultants, gcds, contents, squarefree parts.

Conventions (frozen; tests and every caller rely on them):

* **Resultant sign.**  ``resultant(p, q, x)`` is the determinant of the
  Sylvester matrix whose first ``deg q`` rows carry the coefficients of
  ``p`` and last ``deg p`` rows those of ``q``, with columns in *ascending*
  powers of ``x``.  Hence ``Res_x(x - a, x - b) = b - a`` and
  ``Res_x(x^2 - u, x) = -u``.  This equals ``(-1)^(deg p * deg q)`` times
  the textbook ``lc(p)^deg q * prod q(alpha)``, and
  ``resultant(p, q) = (-1)^(deg p * deg q) * resultant(q, p)``.
* **Normal form.**  :func:`normalize_primitive` scales a polynomial to
  integer coefficients with gcd 1 and a positive leading coefficient in
  graded-lex order.  Every gcd and squarefree part is returned in this form.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import _zpoly as zp
from .poly import Poly, PolyError


def normalize_primitive(p: Poly) -> Poly:
    """Primitive integer form with positive graded-lex leading coefficient."""
    if p.is_zero():
        raise PolyError("cannot normalise the zero polynomial")
    _, z = p.to_zpoly()
    q = Poly.from_zpoly(z, p.variables)
    if q.leading_term()[1] < 0:
        q = -q
    return q


def _main_first(p: Poly, q: Poly, var: str):
    vs = p.variables + tuple(v for v in q.variables if v not in p.variables)
    if var not in vs:
        raise PolyError(f"unknown variable {var!r}")
    order = (var,) + tuple(v for v in vs if v != var)
    return order, p.with_variables(order), q.with_variables(order)


def _coeff_list(z: zp.ZPoly, degree: int) -> List[zp.ZPoly]:
    cs = zp.zcoeffs(z, 0)
    if cs and max(cs) > degree:
        raise PolyError("formal degree smaller than actual degree")
    return [cs.get(k, {}) for k in range(degree + 1)]


def sylvester_matrix(p: Poly, q: Poly, var: str) -> List[List[Poly]]:
    """The Sylvester matrix used by :func:`resultant` (as Poly entries)."""
    order, pp, qq = _main_first(p, q, var)
    m, n = pp.degree(var), qq.degree(var)
    pc = pp.coeffs(var)
    qc = qq.coeffs(var)
    rest = order[1:]
    zero = Poly({}, rest)
    size = m + n
    rows = []
    for i in range(n):
        row = [zero] * size
        for j in range(m + 1):
            row[i + j] = pc.get(j, zero).with_variables(rest)
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for j in range(n + 1):
            row[i + j] = qc.get(j, zero).with_variables(rest)
        rows.append(row)
    return rows


def resultant(p: Poly, q: Poly, var: str, *, method: str = "auto",
              formal_degrees: Optional[Tuple[int, int]] = None) -> Poly:
    """Sylvester resultant of ``p`` and ``q`` with respect to ``var``.

    The determinant is computed fraction-free over the integers after
    clearing denominators.  ``method="bareiss"`` runs Bareiss elimination
    directly over the polynomial ring in the remaining variables;
    ``"interp"`` (the ``"auto"`` choice whenever other variables remain)
    specialises those variables at integer nodes, runs Bareiss on integer
    matrices and interpolates, using a priori degree bounds.  Both give
    the same determinant.

    ``formal_degrees`` overrides the degrees used to size the matrix
    (needed for binary forms whose leading coefficient may vanish).
    """
    order, pp, qq = _main_first(p, q, var)
    rest = order[1:]
    if formal_degrees is None:
        m, n = pp.degree(var), qq.degree(var)
        if pp.is_zero() or qq.is_zero() or m <= 0 or n <= 0:
            raise PolyError(f"resultant needs positive degree in {var!r} for both arguments")
    else:
        m, n = formal_degrees
    if pp.is_zero() or qq.is_zero():
        return Poly({}, rest)
    sp, zpp = pp.to_zpoly()
    sq, zqq = qq.to_zpoly()
    rows = zp.sylvester_rows(_coeff_list(zpp, m), _coeff_list(zqq, n))
    k = len(rest)
    if k == 0:
        det = zp.zconst(zp.det_int([[x.get((), 0) for x in r] for r in rows]), 0)
    elif method == "bareiss":
        det = zp.det_bareiss_poly(rows, k)
    elif method in ("auto", "interp"):
        dp, dq = zp.ztotal_degree(zpp), zp.ztotal_degree(zqq)
        total = max(n * dp + m * dq - m * n, 0)
        bounds = []
        for i in range(1, k + 1):
            per_var = n * zp.zdeg(zpp, i) + m * zp.zdeg(zqq, i)
            bounds.append(max(min(per_var, total), 0))
        det = zp.det_interp(rows, k, bounds)
    else:
        raise PolyError(f"unknown resultant method {method!r}")
    return Poly.from_zpoly(det, rest, sp ** n * sq ** m)


def gcd(p: Poly, q: Poly) -> Poly:
    """Polynomial gcd over Q, in :func:`normalize_primitive` form.

    ``gcd(0, 0)`` raises; ``gcd(p, 0)`` is ``normalize_primitive(p)``.
    """
    if p.is_zero() and q.is_zero():
        raise PolyError("gcd(0, 0) is undefined")
    vs = p.variables + tuple(v for v in q.variables if v not in p.variables)
    _, zpp = p.with_variables(vs).to_zpoly()
    _, zqq = q.with_variables(vs).to_zpoly()
    g = zp.zgcd(zpp, zqq, len(vs))
    return normalize_primitive(Poly.from_zpoly(g, vs))


def content(p: Poly, main_var: str) -> Poly:
    """Gcd of the coefficients of ``p`` viewed as a polynomial in ``main_var``."""
    if p.is_zero():
        raise PolyError("content of the zero polynomial")
    rest = tuple(v for v in p.variables if v != main_var)
    out: Optional[Poly] = None
    for c in p.coeffs(main_var).values():
        c = c.with_variables(rest)
        out = normalize_primitive(c) if out is None else gcd(out, c)
        if out.is_constant():
            break
    return out


def _yun(p: Poly, x: str) -> List[Tuple[Poly, int]]:
    """Yun's squarefree decomposition of a primitive (in ``x``) polynomial."""
    if p.degree(x) <= 0:
        return []
    dp = p.diff(x)
    b = gcd(p, dp)
    c = p.divexact(b)
    d = dp.divexact(b) - c.diff(x)
    out = []
    i = 1
    while not c.is_constant():
        a = gcd(c, d) if not d.is_zero() else normalize_primitive(c)
        if not a.is_constant():
            out.append((a, i))
        c = c.divexact(a)
        d = d.divexact(a) - c.diff(x)
        i += 1
    return out


def _first_used(p: Poly) -> Optional[str]:
    used = p.used_variables()
    return used[0] if used else None


def squarefree_factors(p: Poly, main_var: Optional[str] = None) -> List[Tuple[Poly, int]]:
    """Pairwise coprime squarefree factors with multiplicities.

    ``p`` equals a rational constant times the product of ``f**k``.  The
    split is by content (recursively, over the remaining variables) and by
    Yun's algorithm in the main variable; it does not factor further.
    """
    if p.is_zero():
        raise PolyError("squarefree factors of the zero polynomial")
    x = main_var or _first_used(p)
    if x is None or p.degree(x) <= 0:
        x = _first_used(p)
        if x is None:
            return []
    p = normalize_primitive(p)
    cont = content(p, x)
    prim = p.divexact(cont)
    out = _yun(prim, x)
    if not cont.is_constant():
        out.extend(squarefree_factors(cont))
    merged: dict = {}
    for f, k in out:
        merged[k] = merged[k] * f if k in merged else f
    return [(normalize_primitive(f.with_variables(p.variables)), k)
            for k, f in sorted(merged.items())]


def squarefree_primitive_part(p: Poly, main_var: Optional[str] = None) -> Poly:
    """Same zero set as ``p``, every factor to the first power, normal form.

    The content with respect to ``main_var`` is stripped from the
    primitive part and reduced on its own (recursively), so factors free
    of ``main_var`` survive with multiplicity one.
    """
    if p.is_zero():
        raise PolyError("squarefree part of the zero polynomial")
    out = Poly.const(1, p.variables)
    for f, _ in squarefree_factors(p, main_var):
        out = out * f
    return normalize_primitive(out)


def is_squarefree(p: Poly) -> bool:
    return all(k == 1 for _, k in squarefree_factors(p))


def binary_form_resultant(a: Poly, b: Poly, x: str, y: str) -> Fraction:
    """Resultant of two binary forms in ``(x, y)``; zero iff a common projective root."""
    da, db = a.degree(), b.degree()
    if a.is_zero() or b.is_zero():
        return Fraction(0)
    if da == 0 or db == 0:
        return Fraction(1)
    ax = a.subs({y: 1}).with_variables((x,))
    bx = b.subs({y: 1}).with_variables((x,))
    r = resultant(ax, bx, x, formal_degrees=(da, db))
    return r.constant_value()


def univariate_coeffs(p: Poly, var: str) -> List[Fraction]:
    """Ascending coefficient list of a univariate polynomial."""
    extra = [v for v in p.used_variables() if v != var]
    if extra:
        raise PolyError(f"not univariate in {var!r}: also uses {extra}")
    if p.is_zero():
        return []
    cs = p.coeffs(var)
    return [cs[k].constant_value() if k in cs else Fraction(0) for k in range(max(cs) + 1)]


def pairwise_coprime_refine(pieces: Sequence[Poly], splitter: Poly) -> List[Poly]:
    """Split each piece by its gcd with ``splitter`` (constants dropped)."""
    out = []
    for piece in pieces:
        g = gcd(piece, splitter)
        if g.is_constant():
            out.append(piece)
            continue
        out.append(g)
        rest = piece.divexact(g)
        if not rest.is_constant():
            out.append(normalize_primitive(rest))
    return out
