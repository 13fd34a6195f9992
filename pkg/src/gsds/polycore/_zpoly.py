"""Integer sparse polynomial kernels.

A ``zpoly`` is a ``dict`` mapping exponent tuples (all of one length) to
nonzero Python ints.  Everything here is internal to :mod:`gsds.polycore`;
the public :class:`~gsds.polycore.poly.Poly` clears denominators and hands
its terms to these routines for the heavy work (resultants, gcds, exact
division), where ``Fraction`` arithmetic would dominate the running time.
"""

from __future__ import annotations

from math import gcd, isqrt
from typing import Dict, List, Optional, Sequence, Tuple

try:  # GMP integers make the big determinants and gcds several times faster
    from gmpy2 import gcd as _biggcd
    from gmpy2 import mpz as _big
except ImportError:  # pragma: no cover
    _big = int
    _biggcd = gcd

Exp = Tuple[int, ...]
ZPoly = Dict[Exp, int]


# ---------------------------------------------------------------------------
# ring operations

def zadd(f: ZPoly, g: ZPoly) -> ZPoly:
    out = dict(f)
    for e, c in g.items():
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def zsub(f: ZPoly, g: ZPoly) -> ZPoly:
    out = dict(f)
    for e, c in g.items():
        s = out.get(e, 0) - c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def zneg(f: ZPoly) -> ZPoly:
    return {e: -c for e, c in f.items()}


def zscale(f: ZPoly, k: int) -> ZPoly:
    if not k:
        return {}
    return {e: c * k for e, c in f.items()}


def zmul(f: ZPoly, g: ZPoly) -> ZPoly:
    if len(f) > len(g):
        f, g = g, f
    out: ZPoly = {}
    get = out.get
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def zpow(f: ZPoly, k: int, nvars: int) -> ZPoly:
    result: ZPoly = {(0,) * nvars: 1}
    base = f
    while k:
        if k & 1:
            result = zmul(result, base)
        k >>= 1
        if k:
            base = zmul(base, base)
    return result


def zconst(c: int, nvars: int) -> ZPoly:
    return {(0,) * nvars: c} if c else {}


# ---------------------------------------------------------------------------
# inspection

def zcontent(f: ZPoly) -> int:
    g = 0
    for c in f.values():
        g = gcd(g, c)
        if g == 1:
            break
    return g


def zmaxnorm(f: ZPoly) -> int:
    return max((abs(c) for c in f.values()), default=0)


def zlead(f: ZPoly) -> Tuple[Exp, int]:
    """Leading term in lexicographic order on exponent tuples."""
    e = max(f)
    return e, f[e]


def zdeg(f: ZPoly, i: int) -> int:
    return max((e[i] for e in f), default=-1)


def ztotal_degree(f: ZPoly) -> int:
    return max((sum(e) for e in f), default=-1)


def zprimitive(f: ZPoly) -> ZPoly:
    """Divide by the integer content; leading lex coefficient made positive."""
    if not f:
        return {}
    c = zcontent(f)
    if zlead(f)[1] < 0:
        c = -c
    if c == 1:
        return dict(f)
    return {e: v // c for e, v in f.items()}


# ---------------------------------------------------------------------------
# variable manipulation

def zeval_last(f: ZPoly, t: int) -> ZPoly:
    """Substitute the integer ``t`` for the last variable."""
    out: ZPoly = {}
    get = out.get
    top = max((e[-1] for e in f), default=0)
    big = abs(t) > 1 << 64
    pw = [_big(1) if big else 1] * (top + 1)
    for k in range(1, top + 1):
        pw[k] = pw[k - 1] * t
    for e, c in f.items():
        k = e[:-1]
        out[k] = get(k, 0) + c * pw[e[-1]]
    if big:
        return {e: int(c) for e, c in out.items() if c}
    return {e: c for e, c in out.items() if c}


def zcoeffs(f: ZPoly, i: int) -> Dict[int, ZPoly]:
    """Split ``f`` by the exponent of variable ``i`` (variable removed)."""
    out: Dict[int, ZPoly] = {}
    for e, c in f.items():
        out.setdefault(e[i], {})[e[:i] + e[i + 1:]] = c
    return out


def zfrom_coeffs(coeffs: Dict[int, ZPoly], i: int) -> ZPoly:
    out: ZPoly = {}
    for k, cf in coeffs.items():
        for e, c in cf.items():
            out[e[:i] + (k,) + e[i:]] = c
    return out


def zderiv(f: ZPoly, i: int) -> ZPoly:
    out: ZPoly = {}
    for e, c in f.items():
        k = e[i]
        if k:
            out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
    return out


# ---------------------------------------------------------------------------
# exact division

def zdivexact(f: ZPoly, g: ZPoly) -> Optional[ZPoly]:
    """Return ``f / g`` if ``g`` divides ``f`` exactly over Z, else ``None``."""
    if not g:
        raise ZeroDivisionError("division by zero polynomial")
    if not f:
        return {}
    ge, gc = zlead(g)
    rest = [(e, c) for e, c in g.items() if e != ge]
    r = dict(f)
    q: ZPoly = {}
    while r:
        re_, rc = zlead(r)
        d = tuple(a - b for a, b in zip(re_, ge))
        if any(k < 0 for k in d):
            return None
        qc, rem = divmod(rc, gc)
        if rem:
            return None
        q[d] = qc
        del r[re_]
        for e, c in rest:
            m = tuple(a + b for a, b in zip(e, d))
            s = r.get(m, 0) - qc * c
            if s:
                r[m] = s
            else:
                r.pop(m, None)
    return q


# ---------------------------------------------------------------------------
# determinants

def det_int(rows: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [[_big(x) for x in r] for r in rows]
    sign = 1
    prev = _big(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = m[k][k]
        rk = m[k]
        for i in range(k + 1, n):
            ri = m[i]
            a = ri[k]
            if a:
                for j in range(k + 1, n):
                    ri[j] = (ri[j] * pk - a * rk[j]) // prev
            else:
                for j in range(k + 1, n):
                    ri[j] = (ri[j] * pk) // prev
        prev = pk
    return int(sign * m[n - 1][n - 1])


def det_bareiss_poly(rows: Sequence[Sequence[ZPoly]], nvars: int) -> ZPoly:
    """Bareiss elimination directly over Z[x_1..x_nvars]."""
    n = len(rows)
    if n == 0:
        return zconst(1, nvars)
    m = [[dict(x) for x in r] for r in rows]
    sign = 1
    prev: ZPoly = zconst(1, nvars)
    for k in range(n - 1):
        if not m[k][k]:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return {}
        pk = m[k][k]
        for i in range(k + 1, n):
            a = m[i][k]
            for j in range(k + 1, n):
                num = zmul(m[i][j], pk)
                if a and m[k][j]:
                    num = zsub(num, zmul(a, m[k][j]))
                q = zdivexact(num, prev)
                if q is None:
                    raise ArithmeticError("Bareiss division was not exact")
                m[i][j] = q
        prev = pk
    out = m[n - 1][n - 1]
    return zneg(out) if sign < 0 else out


def interpolation_nodes(count: int) -> List[int]:
    """0, 1, -1, 2, -2, ... (small nodes keep the evaluated integers small)."""
    nodes = [0]
    k = 1
    while len(nodes) < count:
        nodes.append(k)
        if len(nodes) < count:
            nodes.append(-k)
        k += 1
    return nodes


def interpolate_last(nodes: Sequence[int], values: Sequence[ZPoly]) -> ZPoly:
    """Recover a polynomial with integer coefficients from its values.

    ``values[k]`` is the polynomial with the last variable set to
    ``nodes[k]``.  Divided differences of an integer polynomial at integer
    nodes are integers, so all divisions below are exact.
    """
    keys = set()
    for v in values:
        keys.update(v)
    out: ZPoly = {}
    n = len(nodes)
    for key in keys:
        a = [v.get(key, 0) for v in values]
        if not any(a):
            continue
        for j in range(1, n):
            for i in range(n - 1, j - 1, -1):
                num = a[i] - a[i - 1]
                den = nodes[i] - nodes[i - j]
                q, r = divmod(num, den)
                if r:
                    raise ArithmeticError("interpolated polynomial is not integral")
                a[i] = q
        # Newton form -> monomial coefficients
        coeffs = [a[n - 1]]
        for k in range(n - 2, -1, -1):
            t = nodes[k]
            shifted = [0] + coeffs
            for i in range(len(coeffs)):
                shifted[i] -= t * coeffs[i]
            shifted[0] += a[k]
            coeffs = shifted
        for deg, c in enumerate(coeffs):
            if c:
                out[key + (deg,)] = c
    return out


def det_interp(rows: Sequence[Sequence[ZPoly]], nvars: int,
               bounds: Sequence[int]) -> ZPoly:
    """Determinant over Z[x_1..x_nvars] by evaluation/interpolation.

    ``bounds[i]`` must bound the degree of the determinant in ``x_i``.  The
    last variable is specialised at ``bounds[-1] + 1`` integer nodes, the
    smaller determinants are computed recursively, and the result is
    rebuilt by interpolation.  The base case is :func:`det_int`.
    """
    if nvars == 0:
        ints = [[x.get((), 0) for x in r] for r in rows]
        return zconst(det_int(ints), 0)
    nodes = interpolation_nodes(bounds[-1] + 1)
    values = []
    for t in nodes:
        sub = [[zeval_last(x, t) for x in r] for r in rows]
        values.append(det_interp(sub, nvars - 1, bounds[:-1]))
    return interpolate_last(nodes, values)


# ---------------------------------------------------------------------------
# Sylvester matrices

def sylvester_rows(pc: Sequence[ZPoly], qc: Sequence[ZPoly]) -> List[List[ZPoly]]:
    """Sylvester matrix from ascending coefficient lists.

    ``pc[j]`` is the coefficient of ``var**j`` in p (formal degree
    ``len(pc) - 1``).  Rows of p come first; columns are ascending powers.
    """
    m = len(pc) - 1
    n = len(qc) - 1
    size = m + n
    rows: List[List[ZPoly]] = []
    for i in range(n):
        row: List[ZPoly] = [{} for _ in range(size)]
        for j, c in enumerate(pc):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [{} for _ in range(size)]
        for j, c in enumerate(qc):
            row[i + j] = c
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# gcd

def _gcd_int_list(values) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g


def zgcd(f: ZPoly, g: ZPoly, nvars: int) -> ZPoly:
    """Greatest common divisor over Z, normalised by :func:`zprimitive`
    up to the gcd of the integer contents (kept positive).

    Heuristic gcd (evaluation at a large integer, recursive, then
    xi-adic reconstruction checked by trial division) with a primitive
    PRS fallback.
    """
    if not f:
        return _normalise_gcd(g)
    if not g:
        return _normalise_gcd(f)
    if nvars == 0:
        return zconst(gcd(f[()], g[()]), 0)
    cf, cg = zcontent(f), zcontent(g)
    c = gcd(cf, cg)
    f = {e: v // cf for e, v in f.items()}
    g = {e: v // cg for e, v in g.items()}
    if len(f) == 1 or len(g) == 1:
        return zscale(_monomial_gcd(f, g), c)
    h = _heugcd(f, g, nvars)
    if h is None:
        h = _prs_gcd(f, g, nvars)
    h = zprimitive(h)
    return zscale(h, c)


def _normalise_gcd(f: ZPoly) -> ZPoly:
    if not f:
        return {}
    if zlead(f)[1] < 0:
        return zneg(f)
    return dict(f)


def _monomial_gcd(f: ZPoly, g: ZPoly) -> ZPoly:
    # f or g is a single primitive term; the gcd is the common monomial
    exps = list(f) + list(g)
    low = tuple(min(col) for col in zip(*exps))
    return {low: 1}


def _heugcd(f: ZPoly, g: ZPoly, nvars: int) -> Optional[ZPoly]:
    # both inputs primitive over Z
    fn, gn = zmaxnorm(f), zmaxnorm(g)
    xi = 2 * min(fn, gn) + 29
    for _ in range(6):
        ff = zeval_last(f, xi)
        gg = zeval_last(g, xi)
        if ff and gg:
            if nvars == 1:
                hh = zconst(int(_biggcd(ff[()], gg[()])), 0)
            else:
                hh = zgcd(ff, gg, nvars - 1)
            cand = _xi_adic(hh, xi)
            if cand:
                cand = zprimitive(cand)
                if zdivexact(f, cand) is not None and zdivexact(g, cand) is not None:
                    return cand
        xi = xi * 73794 * isqrt(isqrt(xi)) // 27011
    return None


def _xi_adic(h: ZPoly, xi: int) -> ZPoly:
    """Symmetric xi-adic expansion of each coefficient into a new last variable."""
    out: ZPoly = {}
    half = xi // 2
    for e, c in h.items():
        k = 0
        while c:
            r = c % xi
            if r > half:
                r -= xi
            if r:
                out[e + (k,)] = r
            c = (c - r) // xi
            k += 1
    return out


def _prem(fc: List[ZPoly], gc: List[ZPoly], nv: int) -> List[ZPoly]:
    """Pseudo-remainder of coefficient lists (descending) in the main variable."""
    r = [dict(x) for x in fc]
    dg = len(gc) - 1
    lcg = gc[0]
    while r and len(r) - 1 >= dg:
        lcr = r[0]
        if not lcr:
            r.pop(0)
            continue
        new = []
        for i in range(1, len(r)):
            term = zmul(r[i], lcg)
            if i <= dg:
                term = zsub(term, zmul(lcr, gc[i]))
            new.append(term)
        r = new
    while r and not r[0]:
        r.pop(0)
    return r


def _prs_gcd(f: ZPoly, g: ZPoly, nvars: int) -> ZPoly:
    """Primitive PRS in the first variable, recursive contents in the rest."""
    def split(p):
        cs = zcoeffs(p, 0)
        d = max(cs)
        return [cs.get(k, {}) for k in range(d, -1, -1)]

    def content(cl):
        c: ZPoly = {}
        for x in cl:
            if x:
                c = zgcd(c, x, nvars - 1) if c else _normalise_gcd(x)
        return c

    def pp(cl, c):
        out = []
        for x in cl:
            if x:
                q = zdivexact(x, c)
                assert q is not None
                out.append(q)
            else:
                out.append({})
        return out

    def join(cl):
        d = len(cl) - 1
        return zfrom_coeffs({d - i: x for i, x in enumerate(cl) if x}, 0)

    fc, gc = split(f), split(g)
    cf, cgc = content(fc), content(gc)
    cont = zgcd(cf, cgc, nvars - 1) if nvars > 1 else zconst(gcd(cf[()], cgc[()]), 0)
    a, b = pp(fc, cf), pp(gc, cgc)
    if len(a) < len(b):
        a, b = b, a
    while b and len(b) > 1:
        r = _prem(a, b, nvars)
        if not r:
            a = b
            b = []
            break
        a, b = b, pp(r, content(r))
    if b and len(b) == 1:
        # constant in the main variable: gcd is only the content
        return zfrom_coeffs({0: cont}, 0)
    res = zmul(join(a), zfrom_coeffs({0: cont}, 0))
    return res
