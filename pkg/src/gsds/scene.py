"""Problem instances in generic position.

A :class:`GsdsProblem` bundles two plane curves ``X = {f(x, y) = 0}`` and
``Y = {g(z, w) = 0}`` with a projection quadruple ``(a, b, c, d)`` for

    pi(x, y, z, w) = (x + a z + b w, y + c z + d w),

together with the critical polynomial ``h`` (the rank-drop condition of
``pi`` restricted to ``X x Y``) and the cusp polynomial ``s``.  Genericity is
operational: a fixed checklist G1..G5 is run and recorded, and random
quadruples are redrawn until every check passes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .polycore import (Poly, PolyError, binary_form_resultant, gcd,
                       parse_poly, resultant)

X_VARS = ("x", "y")
Y_VARS = ("z", "w")

DEFAULT_HEIGHT = 64
DEFAULT_RETRIES = 50


class GenericityError(ValueError):
    """Curves or maps are not in generic position."""

    def __init__(self, message: str, failed: Sequence[str] = ()):
        super().__init__(message)
        self.failed = list(failed)


@dataclass(frozen=True)
class PlaneCurve:
    poly: Poly
    degree: int = field(init=False)

    def __post_init__(self):
        p = self.poly
        if len(p.variables) != 2:
            raise PolyError(f"plane curve needs exactly two variables, got {p.variables}")
        if p.is_zero():
            raise PolyError("plane curve polynomial is zero")
        d = p.degree()
        if d < 2:
            raise PolyError(f"curve degree must be at least 2, got {d}")
        object.__setattr__(self, "degree", int(d))

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] = X_VARS) -> "PlaneCurve":
        p = parse_poly(text)
        extra = [v for v in p.used_variables() if v not in variables]
        if extra:
            # keep the caller's names when the text uses different ones
            if len(p.used_variables()) > 2:
                raise PolyError(f"curve uses more than two variables: {p.used_variables()}")
            used = list(p.used_variables())
            mapping = {old: Poly.var(new, tuple(variables)) for old, new in zip(used, variables)}
            p = p.subs(mapping)
        return cls(p.with_variables(tuple(variables)))

    @property
    def variables(self) -> Tuple[str, str]:
        return self.poly.variables  # type: ignore[return-value]

    def renamed(self, variables: Sequence[str]) -> "PlaneCurve":
        if tuple(variables) == self.variables:
            return self
        new = tuple(variables)
        mapping = {old: Poly.var(n, new) for old, n in zip(self.variables, new)}
        return PlaneCurve(self.poly.subs(mapping).with_variables(new))

    def __str__(self) -> str:
        return str(self.poly)


@dataclass(frozen=True)
class Quadruple:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, Fraction(getattr(self, k)))

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def as_tuple(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.as_tuple()) + ")"


Matrix2 = Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]


@dataclass(frozen=True)
class AffineMap:
    """``p -> M p + t`` on the plane."""
    M: Matrix2
    t: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))

    def __post_init__(self):
        M = tuple(tuple(Fraction(x) for x in row) for row in self.M)
        t = tuple(Fraction(x) for x in self.t)
        if len(M) != 2 or any(len(r) != 2 for r in M) or len(t) != 2:
            raise ValueError("affine map needs a 2x2 matrix and a 2-vector")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "t", t)
        if self.det == 0:
            raise ValueError("affine map matrix is singular")

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(((1, 0), (0, 1)))

    @classmethod
    def from_values(cls, values: Sequence) -> "AffineMap":
        """Four matrix entries (row-major), optionally followed by two translation entries."""
        v = [Fraction(x) for x in values]
        if len(v) not in (4, 6):
            raise ValueError("affine map needs 4 or 6 rational entries")
        t = (v[4], v[5]) if len(v) == 6 else (0, 0)
        return cls(((v[0], v[1]), (v[2], v[3])), t)

    @property
    def det(self) -> Fraction:
        (p, q), (r, s) = self.M
        return p * s - q * r

    def inverse(self) -> "AffineMap":
        (p, q), (r, s) = self.M
        k = self.det
        Mi = ((s / k, -q / k), (-r / k, p / k))
        t0, t1 = self.t
        return AffineMap(Mi, (-(Mi[0][0] * t0 + Mi[0][1] * t1), -(Mi[1][0] * t0 + Mi[1][1] * t1)))

    def pull_back(self, curve: PlaneCurve) -> PlaneCurve:
        """The curve ``self(curve)``, i.e. ``f o self^-1``."""
        inv = self.inverse()
        u, v = (Poly.var(n, curve.variables) for n in curve.variables)
        (p, q), (r, s) = inv.M
        mapping = {curve.variables[0]: p * u + q * v + inv.t[0],
                   curve.variables[1]: r * u + s * v + inv.t[1]}
        return PlaneCurve(curve.poly.subs(mapping).with_variables(curve.variables))


@dataclass(frozen=True)
class AffinePair:
    G: AffineMap
    H: AffineMap


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class GsdsProblem:
    X: PlaneCurve
    Y: PlaneCurve
    quad: Quadruple
    h: Poly
    s: Poly
    seed: Optional[int] = None
    genericity_log: Tuple[CheckResult, ...] = ()
    retries: int = 0
    source: str = "sampled"

    @property
    def f(self) -> Poly:
        return self.X.poly

    @property
    def g(self) -> Poly:
        return self.Y.poly

    @property
    def degrees(self) -> Tuple[int, int]:
        return self.X.degree, self.Y.degree

    def describe(self) -> dict:
        return {
            "f": str(self.X.poly),
            "g": str(self.Y.poly),
            "quad": [str(x) for x in self.quad.as_tuple()],
            "seed": self.seed,
            "retries": self.retries,
            "source": self.source,
            "genericity": [c.name for c in self.genericity_log if c.passed],
        }


# -- critical system ---------------------------------------------------------

def _split_vars(f: Poly, g: Poly) -> Tuple[Tuple[str, str], Tuple[str, str], Tuple[str, ...]]:
    fv, gv = tuple(f.variables), tuple(g.variables)
    if len(fv) != 2 or len(gv) != 2:
        raise PolyError(f"expected bivariate f and g, got {fv} and {gv}")
    if set(fv) & set(gv):
        raise PolyError(f"variable collision between f {fv} and g {gv}")
    return fv, gv, fv + gv  # type: ignore[return-value]


def build_h(f: Poly, g: Poly, quad: Quadruple) -> Poly:
    """``b f_x g_z - a f_x g_w + d f_y g_z - c f_y g_w`` over ``(x, y, z, w)``."""
    (x, y), (z, w), allv = _split_vars(f, g)
    a, b, c, d = quad.as_tuple()
    fx, fy = f.diff(x).with_variables(allv), f.diff(y).with_variables(allv)
    gz, gw = g.diff(z).with_variables(allv), g.diff(w).with_variables(allv)
    return fx * (b * gz - a * gw) + fy * (d * gz - c * gw)


def build_s(f: Poly, g: Poly, h: Poly, quad: Quadruple) -> Poly:
    """``h_x (a g_w - b g_z) + h_y (c g_w - d g_z) - h_z g_w + h_w g_z``."""
    (x, y), (z, w), allv = _split_vars(f, g)
    a, b, c, d = quad.as_tuple()
    h = h.with_variables(allv)
    gz, gw = g.diff(z).with_variables(allv), g.diff(w).with_variables(allv)
    return (h.diff(x) * (a * gw - b * gz) + h.diff(y) * (c * gw - d * gz)
            - h.diff(z) * gw + h.diff(w) * gz)


# -- genericity checklist ----------------------------------------------------

_SHEARS = (Fraction(0), Fraction(1), Fraction(-2), Fraction(3, 5), Fraction(-7, 3))


def _no_common_zero(f: Poly, p: Poly, q: Poly, x: str, y: str) -> bool:
    """True when ``f = p = q = 0`` has no affine solution (sufficient test).

    Eliminates ``y`` from (f, p) and (f, q) and asks for a constant gcd, under
    a few shears ``x -> x + k y`` so that a coincidence of ``x``-coordinates
    alone does not produce a false alarm.
    """
    for k in _SHEARS:
        X, Y = Poly.var(x, (x, y)), Poly.var(y, (x, y))
        sub = {x: X + k * Y, y: Y}
        ff, pp, qq = (t.subs(sub).with_variables((x, y)) for t in (f, p, q))
        rs = []
        trivial = False
        for t in (pp, qq):
            if t.is_zero():
                continue
            if t.is_constant():
                trivial = True
                break
            if ff.degree(y) <= 0 or t.degree(y) <= 0:
                rs = None
                break
            rs.append(resultant(ff, t, y))
        if trivial:
            return True
        if rs is None:
            continue
        if not rs:
            return False
        if any(r.is_zero() for r in rs):
            continue
        g_ = rs[0] if len(rs) == 1 else gcd(rs[0], rs[1])
        if g_.is_constant():
            return True
    return False


def _smooth(curve: PlaneCurve) -> bool:
    x, y = curve.variables
    f = curve.poly
    return _no_common_zero(f, f.diff(x), f.diff(y), x, y)


def _top_distinct(curve: PlaneCurve) -> bool:
    x, y = curve.variables
    T = curve.poly.top_form()
    # a binary form has a repeated projective root iff T_x and T_y share one
    return binary_form_resultant(T.diff(x), T.diff(y), x, y) != 0


def _gradient_at_infinity(curve: PlaneCurve) -> Tuple[bool, bool]:
    x, y = curve.variables
    T = curve.poly.top_form()
    return (binary_form_resultant(T, T.diff(x), x, y) != 0,
            binary_form_resultant(T, T.diff(y), x, y) != 0)


def _pairing_nonzero(X: PlaneCurve, Y: PlaneCurve, quad: Quadruple) -> bool:
    """For all infinity points P of X and Q of Y,
    ``Tf_x(P) (b Tg_z - a Tg_w)(Q) + Tf_y(P) (d Tg_z - c Tg_w)(Q) != 0``."""
    x, y = X.variables
    z, w = Y.variables
    allv = (x, y, z, w)
    a, b, c, d = quad.as_tuple()
    Tf = X.poly.top_form().with_variables(allv)
    Tg = Y.poly.top_form().with_variables(allv)
    fx, fy = Tf.diff(x), Tf.diff(y)
    gz, gw = Tg.diff(z), Tg.diff(w)
    K = fx * (b * gz - a * gw) + fy * (d * gz - c * gw)
    if K.is_zero():
        return False
    d1 = X.degree
    # resultant in (x : y) with formal degrees keeps roots at (1 : 0)
    Tf1 = Tf.subs({y: 1}).with_variables((x,))
    K1 = K.subs({y: 1}).with_variables((x, z, w))
    R = resultant(Tf1, K1, x, formal_degrees=(d1, d1 - 1))
    if R.is_zero():
        return False
    Tg2 = Y.poly.top_form().with_variables((z, w))
    return binary_form_resultant(Tg2, R.with_variables((z, w)), z, w) != 0


def curve_checks(X: PlaneCurve, Y: PlaneCurve) -> List[CheckResult]:
    out = []
    for label, curve in (("X", X), ("Y", Y)):
        ok = _smooth(curve)
        out.append(CheckResult(f"G1[{label}]", ok, "" if ok else
                               f"{label} = {{{curve}}} may be singular: f, f_x, f_y share a zero"))
    for label, curve in (("X", X), ("Y", Y)):
        ok = _top_distinct(curve)
        out.append(CheckResult(f"G2[{label}]", ok, "" if ok else
                               f"top form of {label} has a repeated point at infinity"))
    for label, curve in (("X", X), ("Y", Y)):
        gx, gy = _gradient_at_infinity(curve)
        ok = gx and gy
        which = [n for n, flag in zip(curve.variables, (gx, gy)) if not flag]
        out.append(CheckResult(f"G3[{label}]", ok, "" if ok else
                               f"top-degree partial(s) {which} of {label} vanish at infinity"))
    return out


def quadruple_checks(X: PlaneCurve, Y: PlaneCurve, quad: Quadruple) -> List[CheckResult]:
    g5 = quad.det != 0
    g4 = g5 and _pairing_nonzero(X, Y, quad)
    return [
        CheckResult("G4", g4, "" if g4 else "infinity pairing constant vanishes for some pair"),
        CheckResult("G5", g5, "" if g5 else "ad - bc = 0"),
    ]


def validate_genericity(X: PlaneCurve, Y: PlaneCurve, quad: Quadruple) -> List[CheckResult]:
    """Run G1..G5 and return every result (failures included)."""
    X, Y = X.renamed(X_VARS), Y.renamed(Y_VARS)
    return curve_checks(X, Y) + quadruple_checks(X, Y, quad)


def failed(checks: Sequence[CheckResult]) -> List[CheckResult]:
    return [c for c in checks if not c.passed]


def _make_problem(X: PlaneCurve, Y: PlaneCurve, quad: Quadruple, log, **kw) -> GsdsProblem:
    h = build_h(X.poly, Y.poly, quad)
    s = build_s(X.poly, Y.poly, h, quad)
    return GsdsProblem(X, Y, quad, h, s, genericity_log=tuple(log), **kw)


def _random_rational(rng: random.Random, height: int) -> Fraction:
    num = rng.randint(1, height) * rng.choice((-1, 1))
    return Fraction(num, rng.randint(1, height))


def sample_problem(X: PlaneCurve, Y: PlaneCurve, seed: int, *,
                   height: int = DEFAULT_HEIGHT,
                   retry_limit: int = DEFAULT_RETRIES) -> GsdsProblem:
    """Draw a seeded random quadruple and redraw until G4, G5 pass.

    Raises :class:`GenericityError` when the curves fail G1..G3 (nothing
    here perturbs curves) or when ``retry_limit`` draws all fail.
    """
    X, Y = X.renamed(X_VARS), Y.renamed(Y_VARS)
    checks = curve_checks(X, Y)
    bad = failed(checks)
    if bad:
        raise GenericityError("curve checks fail: " + "; ".join(f"{c.name}: {c.detail}" for c in bad),
                              [c.name for c in bad])
    rng = random.Random(seed)
    for attempt in range(retry_limit):
        quad = Quadruple(*(_random_rational(rng, height) for _ in range(4)))
        qc = quadruple_checks(X, Y, quad)
        if not failed(qc):
            return _make_problem(X, Y, quad, checks + qc, seed=seed, retries=attempt)
    raise GenericityError(f"no generic quadruple in {retry_limit} draws (seed {seed})", ["G4"])


def problem_from_quadruple(X: PlaneCurve, Y: PlaneCurve, quad: Quadruple, *,
                           seed: Optional[int] = None) -> GsdsProblem:
    """Validate an explicit quadruple; raise :class:`GenericityError` on failure."""
    X, Y = X.renamed(X_VARS), Y.renamed(Y_VARS)
    checks = validate_genericity(X, Y, quad)
    bad = failed(checks)
    if bad:
        raise GenericityError("genericity checks fail: " + ", ".join(c.name for c in bad),
                              [c.name for c in bad])
    return _make_problem(X, Y, quad, checks, seed=seed, source="quadruple")


def pair_to_quadruple(X: PlaneCurve, Y: PlaneCurve, pair: AffinePair) -> GsdsProblem:
    """Midpoint set of ``G(X)`` and ``H(Y)`` as a problem with quadruple (1, 0, 0, 1).

    The curves become ``f o G^-1`` and ``g o H^-1``; the projection is
    ``(x + z, y + w)``, i.e. twice the midpoint map.
    """
    GX = pair.G.pull_back(X.renamed(X_VARS))
    HY = pair.H.pull_back(Y.renamed(X_VARS)).renamed(Y_VARS)
    quad = Quadruple(1, 0, 0, 1)
    checks = validate_genericity(GX, HY, quad)
    bad = failed(checks)
    if bad:
        raise GenericityError("transformed pair is not generic: "
                              + "; ".join(f"{c.name}: {c.detail}" for c in bad),
                              [c.name for c in bad])
    return _make_problem(GX, HY, quad, checks, source="affine-pair")
