"""Implicit equation of the discriminant curve ``C' = pi(C)``.

Writing ``x = u - a z - b w`` and ``y = v - c z - d w`` turns the critical
system into three polynomials in ``(z, w, u, v)``; eliminating ``w`` and
then ``z`` by resultants gives a polynomial in ``(u, v)`` that vanishes on
``C'`` but also carries extraneous factors.  Those are split off with the
eliminant obtained in the opposite variable order (gcd-free refinement),
and each piece is kept or dropped by testing it on numeric points of
``C'``.  The retained degree must equal ``d1 d2 (d1 + d2 - 2)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .invariants import expected_invariants
from .polycore import (Poly, normalize_primitive, pairwise_coprime_refine,
                       resultant, squarefree_factors)
from .sampling import critical_samples
from .scene import GsdsProblem

FIBER_VARS = ("z", "w", "u", "v")
UV = ("u", "v")

DEFAULT_MAX_TERMS = 200_000
DEFAULT_MAX_BITS = 1_000_000


class EliminationError(RuntimeError):
    """Elimination failed or produced a curve of the wrong degree."""

    def __init__(self, message: str, provenance: Optional[dict] = None):
        super().__init__(message)
        self.provenance = provenance or {}


class BudgetExceeded(EliminationError):
    """An intermediate resultant outgrew the configured size budget."""


@dataclass(frozen=True)
class Budget:
    max_terms: int = DEFAULT_MAX_TERMS
    max_bits: int = DEFAULT_MAX_BITS
    time_limit: Optional[float] = None  # seconds, checked between resultants


@dataclass
class ImplicitCurve:
    P: Poly
    degree: int
    infinity_points: List[Tuple[complex, complex, int]] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.P.variables != UV:
            self.P = self.P.with_variables(UV)
        if self.P.degree() != self.degree:
            raise ValueError(f"degree field {self.degree} != deg P = {self.P.degree()}")

    def as_dict(self) -> Dict[str, Any]:
        terms = [[list(e), c.numerator, c.denominator] for e, c in self.P.sorted_terms()]
        return {
            "variables": list(self.P.variables),
            "degree": self.degree,
            "terms": terms,
            "infinity_points": [
                {"alpha": [p.real, p.imag], "beta": [q.real, q.imag], "multiplicity": m}
                for p, q, m in self.infinity_points],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ImplicitCurve":
        vs = tuple(data["variables"])
        P = Poly({tuple(e): Fraction(n, d) for e, n, d in data["terms"]}, vs)
        pts = [(complex(*p["alpha"]), complex(*p["beta"]), int(p["multiplicity"]))
               for p in data.get("infinity_points", [])]
        return cls(P.with_variables(UV) if vs != UV else P, int(data["degree"]), pts,
                   dict(data.get("provenance", {})))


def substitute_fiber(problem: GsdsProblem) -> Tuple[Poly, Poly, Poly]:
    """``F1 = f(u - az - bw, v - cz - dw)``, ``F2 = g``, ``F3 = h(...)`` over (z, w, u, v)."""
    a, b, c, d = problem.quad.as_tuple()
    z, w, u, v = (Poly.var(n, FIBER_VARS) for n in FIBER_VARS)
    sub = {"x": u - a * z - b * w, "y": v - c * z - d * w}
    F1 = problem.f.subs(sub).with_variables(FIBER_VARS)
    F2 = problem.g.with_variables(FIBER_VARS)
    F3 = problem.h.subs(sub).with_variables(FIBER_VARS)
    return F1, F2, F3


def _size(p: Poly) -> Dict[str, int]:
    bits = max((max(abs(c.numerator).bit_length(), c.denominator.bit_length())
                for c in p.terms.values()), default=0)
    return {"degree": int(p.degree()) if not p.is_zero() else -1, "terms": len(p), "max_bits": bits}


def _guard(p: Poly, label: str, budget: Budget, record: dict, t0: float) -> None:
    info = _size(p)
    record[label] = info
    record.setdefault("_seconds", {})[label] = round(time.perf_counter() - t0, 3)
    if info["terms"] > budget.max_terms or info["max_bits"] > budget.max_bits:
        raise BudgetExceeded(
            f"{label} exceeds the size budget ({info['terms']} terms, {info['max_bits']} bits; "
            f"limits {budget.max_terms} terms, {budget.max_bits} bits)", record)
    if budget.time_limit is not None and time.perf_counter() - t0 > budget.time_limit:
        raise BudgetExceeded(f"time limit of {budget.time_limit} s reached after {label}", record)


def eliminate_order(F: Sequence[Poly], first: str, second: str, budget: Budget,
                    record: dict, t0: float) -> Poly:
    """``Res_second(Res_first(F1, F2), Res_first(F1, F3))`` in (u, v)."""
    F1, F2, F3 = F
    R1 = resultant(F1, F2, first)
    _guard(R1, f"Res_{first}(F1,F2)", budget, record, t0)
    R2 = resultant(F1, F3, first)
    _guard(R2, f"Res_{first}(F1,F3)", budget, record, t0)
    R3 = resultant(R1, R2, second).with_variables(UV)
    _guard(R3, f"Res_{second}(R1,R2)[{first},{second}]", budget, record, t0)
    return R3


def _gaussian_dyadic(z: complex) -> Tuple[int, int, int]:
    """``z = (re + i im) / 2**e`` with integers ``re, im`` (floats are dyadic)."""
    a, b = Fraction(z.real), Fraction(z.imag)
    e = max(a.denominator.bit_length(), b.denominator.bit_length()) - 1
    return int(a * 2 ** e), int(b * 2 ** e), e


def _log2_abs_exact(p: Poly, point: Tuple[complex, complex]) -> float:
    """``log2 |p(u, v)|`` computed exactly over the Gaussian rationals.

    Double evaluation of a high-degree eliminant is useless near its zero
    set: the terms cancel far below the rounding level of the largest one.
    """
    (ur, ui, eu), (vr, vi, ev) = _gaussian_dyadic(point[0]), _gaussian_dyadic(point[1])
    e = max(eu, ev)
    ur, ui, vr, vi = ur << (e - eu), ui << (e - eu), vr << (e - ev), vi << (e - ev)
    D = p.degree()
    du = max((t[0] for t in p.terms), default=0)
    dv = max((t[1] for t in p.terms), default=0)
    upow, vpow = [(1, 0)], [(1, 0)]
    for k in range(du):
        r, i = upow[-1]
        upow.append((r * ur - i * ui, r * ui + i * ur))
    for k in range(dv):
        r, i = vpow[-1]
        vpow.append((r * vr - i * vi, r * vi + i * vr))
    den = 1
    for c in p.terms.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    sr = si = 0
    for (i, j), c in p.terms.items():
        k = (c * den).numerator << (e * (D - i - j))
        (ar, ai), (br, bi) = upow[i], vpow[j]
        sr += k * (ar * br - ai * bi)
        si += k * (ar * bi + ai * br)
    n2 = sr * sr + si * si
    if n2 == 0:
        return -math.inf
    # |p| = sqrt(n2) / (den * 2**(e*D)); shift n2 into float range before the log
    shift = max(n2.bit_length() - 1000, 0)
    return (0.5 * (math.log2(n2 >> shift) + shift) - math.log2(den) - e * D)


def _contrast(p: Poly, uv: np.ndarray, step: float = 1e-2, n_probe: int = 4) -> np.ndarray:
    """``|p(s)|`` relative to the median of ``|p|`` at nearby points ``s + delta``.

    Near 1 where ``p`` does not vanish; about the sample accuracy where it
    does.  This scale is local, so it is immune to the huge dynamic range of
    the coefficients.
    """
    p = p.with_variables(UV)
    rng = np.random.default_rng(0)
    out = np.empty(len(uv))
    for k, s in enumerate(uv):
        d = rng.standard_normal((n_probe, 2)) + 1j * rng.standard_normal((n_probe, 2))
        d *= step * (1.0 + np.abs(s).max()) / np.abs(d).max(axis=1, keepdims=True)
        here = _log2_abs_exact(p, (complex(s[0]), complex(s[1])))
        near = np.median([_log2_abs_exact(p, (complex(q[0]), complex(q[1]))) for q in s + d])
        out[k] = 2.0 ** max(here - near, -1000.0)
    return out


def remove_extraneous(P_raw: Poly, problem: GsdsProblem, samples: np.ndarray, *,
                      splitters: Sequence[Poly] = (), tol: float = 1e-6,
                      quorum: float = 0.9, expected_degree: Optional[int] = None,
                      record: Optional[dict] = None) -> Poly:
    """Keep the squarefree pieces of ``P_raw`` that vanish on the samples.

    ``P_raw`` is split into pairwise coprime squarefree pieces (Yun, then gcd
    refinement against each of ``splitters``).  A piece is retained when
    its relative value is below ``tol`` on at least ``quorum`` of the
    sample points of ``C'``.
    """
    samples = np.asarray(samples, dtype=complex).reshape(-1, 2)
    if not len(samples):
        raise EliminationError("remove_extraneous needs sample points of C'")
    if expected_degree is None:
        expected_degree = expected_invariants(*problem.degrees).degree
    P_raw = P_raw.with_variables(UV)
    pieces = [f for f, _ in squarefree_factors(P_raw, "u")]
    for sp in splitters:
        pieces = pairwise_coprime_refine(pieces, sp.with_variables(UV))
    kept, dropped = [], []
    for piece in pieces:
        rel = _contrast(piece, samples)
        frac = float(np.mean(rel < tol))
        entry = {"degree": int(piece.degree()), "terms": len(piece), "vanishing_fraction": frac}
        (kept if frac >= quorum else dropped).append((piece, entry))
    if record is not None:
        record["pieces"] = [e for _, e in kept] + [e for _, e in dropped]
        record["retained"] = [e["degree"] for _, e in kept]
        record["removed"] = [e["degree"] for _, e in dropped]
    if not kept:
        raise EliminationError("no factor of the eliminant vanishes on the samples", record)
    out = Poly.const(1, UV)
    for piece, _ in kept:
        out = out * piece
    out = normalize_primitive(out)
    if out.degree() > expected_degree:
        raise EliminationError(
            f"retained degree {out.degree()} exceeds {expected_degree}: ambiguous split", record)
    return out


def implicitize(problem: GsdsProblem, *, orders: Sequence[Tuple[str, str]] = (("w", "z"), ("z", "w")),
                budget: Budget = Budget(), n_samples: int = 24, seed: int = 0,
                tol: float = 1e-6) -> ImplicitCurve:
    """Eliminate ``z, w`` from the critical system and return ``C'``.

    The first order produces the main eliminant; eliminants from the other
    orders act as splitters for the extraneous-factor test.  Raises
    :class:`EliminationError` (with provenance) if the retained curve does
    not have the expected degree, and :class:`BudgetExceeded` if an
    intermediate result outgrows ``budget``.
    """
    d1, d2 = problem.degrees
    expected = expected_invariants(d1, d2).degree
    t0 = time.perf_counter()
    prov: Dict[str, Any] = {"orders": [list(o) for o in orders], "stages": {}}
    F = substitute_fiber(problem)
    eliminants = []
    for first, second in orders:
        eliminants.append(eliminate_order(F, first, second, budget, prov["stages"], t0))
    if any(R.is_zero() for R in eliminants):
        raise EliminationError("an eliminant vanished identically", prov)
    _, uv = critical_samples(problem, n_samples, seed=seed)
    prov["samples"] = int(len(uv))
    if len(uv) < 20:
        raise EliminationError(f"only {len(uv)} sample points of C' found (need 20)", prov)
    P = remove_extraneous(eliminants[0], problem, uv, splitters=eliminants[1:], tol=tol,
                          expected_degree=expected, record=prov)
    timings = prov["stages"].pop("_seconds", {})
    timings["total"] = round(time.perf_counter() - t0, 3)
    if P.degree() != expected:
        raise EliminationError(f"degree {P.degree()} after factor removal, expected {expected}", prov)
    curve = ImplicitCurve(P, int(P.degree()), provenance=prov, timings=timings)
    curve.infinity_points = [(p, q, m) for p, q, m in infinity_profile(curve, problem)]
    return curve


# -- points at infinity -------------------------------------------------------

def _binary_roots(form: Poly) -> List[Tuple[complex, complex]]:
    """Projective roots (alpha : beta) of a squarefree binary form in (u, v)."""
    form = form.with_variables(UV)
    deg = int(form.degree())
    cs = form.coeffs("u")  # coefficient of u^k is c_k v^(deg-k)
    coeffs = np.zeros(deg + 1, dtype=complex)
    for k, c in cs.items():
        coeffs[deg - k] = complex(next(iter(c.terms.values())))
    lead = np.trim_zeros(coeffs, "f")
    at_inf = deg - (len(lead) - 1)  # roots with v = 0, i.e. (1 : 0)
    out = [(1 + 0j, 0j)] * at_inf
    if len(lead) > 1:
        for r in np.roots(lead):
            n = np.hypot(abs(r), 1.0)
            out.append((r / n, 1 / n))
    return out


def infinity_profile(curve: ImplicitCurve, problem: GsdsProblem) -> List[Tuple[complex, complex, int]]:
    """Points at infinity of ``C'`` with multiplicities, ordered by multiplicity.

    Multiplicities come from the exact squarefree decomposition of the top
    form of ``P``.  The expected structure (``d1`` points of multiplicity
    ``d2 (d2 - 1)`` in the directions of ``X``'s asymptotes, ``d2`` points of
    multiplicity ``d1 (d1 - 1)`` in the projected directions of ``Y``'s) is
    checked separately by :func:`infinity_structure_matches`.
    """
    T = curve.P.top_form().with_variables(UV)
    out = []
    for piece, k in squarefree_factors(T, "u"):
        for a, b in _binary_roots(piece):
            out.append((complex(a), complex(b), int(k)))
    out.sort(key=lambda t: (-t[2], round(t[0].real, 12), round(t[0].imag, 12)))
    return out


def infinity_structure_matches(curve: ImplicitCurve, problem: GsdsProblem) -> bool:
    """Exact test ``top(P) ~ top(f)^(d2(d2-1)) * top(g o M^-1)^(d1(d1-1))``.

    ``M = [[a, b], [c, d]]`` maps directions of ``Y`` to directions of ``C'``.
    """
    d1, d2 = problem.degrees
    a, b, c, d = problem.quad.as_tuple()
    u, v = Poly.var("u", UV), Poly.var("v", UV)
    Tf = problem.f.top_form().subs({"x": u, "y": v}).with_variables(UV)
    det = a * d - b * c
    # M^-1 (u, v) = ((d u - b v)/det, (-c u + a v)/det)
    Tg = problem.g.top_form().subs({"z": (d * u - b * v) / det,
                                    "w": (-c * u + a * v) / det}).with_variables(UV)
    model = Tf ** (d2 * (d2 - 1)) * Tg ** (d1 * (d1 - 1))
    T = curve.P.top_form().with_variables(UV)
    return normalize_primitive(model) == normalize_primitive(T)
