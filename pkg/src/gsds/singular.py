"""Singular points of the discriminant curve and the cross-checks on ``C``.

Singular points of ``C' = {P = 0}`` are the common zeros of ``P``, ``P_u``
and ``P_v``.  Candidates come from three sources, all polished by damped
Newton on ``(P_u, P_v)``:

* a hidden-variable eigenproblem (the Sylvester matrix of ``P_u`` and
  ``P_v`` in one variable, as a matrix polynomial in the other);
* random starts with log-uniform moduli inside a box bounded, for
  moderate degrees, by root bounds of the exact resultants
  ``Res_v(P_u, P_v)`` and ``Res_u(P_u, P_v)``;
* extra random starts on escalation.

Critical points of ``P`` that are not on ``C'`` are filtered by ``|P|``.
Cusps are double roots of ``(P_u, P_v)``; they are re-polished on the
consistent system ``(P, P_u, P_v, det Hess P)``, which is regular there.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import scipy.linalg as sla

from .eliminate import UV, ImplicitCurve
from .invariants import expected_invariants
from .numeric import PolyEval, System, complex_box, damped_newton, dedup
from .polycore import Poly, resultant
from .sampling import ALL_VARS, product_starts
from .scene import GsdsProblem

NODE, CUSP, OTHER = "Node", "Cusp", "Other"

DEFAULT_DEDUP = 1e-8
DEFAULT_RESIDUAL = 1e-8
DEFAULT_CLASSIFY = 1e-6
DEFAULT_STARTS_FACTOR = 50
EXACT_BOUND_MAX_DEGREE = 18


class SolveError(RuntimeError):
    def __init__(self, message: str, report: Optional["SolveReport"] = None):
        super().__init__(message)
        self.report = report


@dataclass
class SingularPoint:
    location: Tuple[complex, complex]
    kind: str
    multiplicity_data: Dict[str, Any]
    residual: float
    is_real: bool

    def as_dict(self) -> Dict[str, Any]:
        u, v = self.location
        return {"u": [u.real, u.imag], "v": [v.real, v.imag], "kind": self.kind,
                "residual": self.residual, "is_real": self.is_real,
                "local": self.multiplicity_data}


@dataclass
class SolveReport:
    points: List[SingularPoint]
    n_nodes: int
    n_cusps: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def n_other(self) -> int:
        return len(self.points) - self.n_nodes - self.n_cusps

    def as_dict(self) -> Dict[str, Any]:
        return {"points": [p.as_dict() for p in self.points],
                "n_nodes": self.n_nodes, "n_cusps": self.n_cusps, "n_other": self.n_other,
                "diagnostics": self.diagnostics}


# -- local classification -----------------------------------------------------

class _Derivs:
    """Compiled partial derivatives of a bivariate polynomial up to order 3."""

    def __init__(self, P: Poly, variables: Sequence[str] = UV, scale=None):
        P = P.with_variables(tuple(variables))
        u, v = variables
        s = scale if scale is not None else P.max_abs_coeff()
        self.scale = s
        self.d: Dict[Tuple[int, int], PolyEval] = {}
        for i in range(4):
            for j in range(4 - i):
                q = P
                for _ in range(i):
                    q = q.diff(u)
                for _ in range(j):
                    q = q.diff(v)
                self.d[(i, j)] = PolyEval(q, variables, scale=s)

    def at(self, X: np.ndarray) -> Dict[Tuple[int, int], np.ndarray]:
        return {k: ev(X) for k, ev in self.d.items()}

    def magnitude(self, key, X):
        return self.d[key].magnitude(X)


def _classify_from(D: Dict[Tuple[int, int], complex], tol: float) -> Tuple[str, Dict[str, Any]]:
    A, B, C = D[(2, 0)] / 2, D[(1, 1)], D[(0, 2)] / 2
    q2 = math.sqrt(abs(A) ** 2 + abs(B) ** 2 + abs(C) ** 2)
    cubic = [D[(3, 0)] / 6, D[(2, 1)] / 2, D[(1, 2)] / 2, D[(0, 3)] / 6]
    c3 = math.sqrt(sum(abs(x) ** 2 for x in cubic))
    disc = B * B - 4 * A * C
    data: Dict[str, Any] = {"quadratic": [[z.real, z.imag] for z in (A, B, C)],
                            "disc_rel": abs(disc) / q2 ** 2 if q2 else 0.0}
    if q2 == 0 or q2 < tol * max(c3, 1e-300) * 1e-6:
        data["order"] = ">=3"
        return OTHER, data
    if abs(disc) > tol * q2 ** 2:
        return NODE, data
    # rank one: Q2 ~ (l . (xi, eta))^2; kernel k with l . k = 0
    M = np.array([[A, B / 2], [B / 2, C]])
    row = M[0] if abs(M[0]).sum() >= abs(M[1]).sum() else M[1]
    k = np.array([-row[1], row[0]])
    k = k / np.linalg.norm(k)
    k0, k1 = k
    along = cubic[0] * k0 ** 3 + cubic[1] * k0 ** 2 * k1 + cubic[2] * k0 * k1 ** 2 + cubic[3] * k1 ** 3
    data["cubic_kernel_rel"] = abs(along) / c3 if c3 else 0.0
    if c3 and abs(along) > tol * c3:
        return CUSP, data
    return OTHER, data


def classify_local(P: Poly, point: Tuple[complex, complex], tol: float = DEFAULT_CLASSIFY
                   ) -> str:
    """Node, Cusp or Other from the Taylor expansion of ``P`` at ``point``.

    Raises ``ValueError`` when the quadratic part vanishes (a point of
    multiplicity at least 3), which a generic caustic never has.
    """
    kind, data = classify_local_data(P, point, tol)
    if data.get("order") == ">=3":
        raise ValueError("quadratic part vanishes: multiplicity >= 3")
    return kind


def classify_local_data(P: Poly, point, tol: float = DEFAULT_CLASSIFY):
    variables = P.variables if len(P.variables) == 2 else UV
    der = _Derivs(P, variables)
    X = np.array([point], dtype=complex)
    D = {k: v[0] for k, v in der.at(X).items()}
    return _classify_from(D, tol)


# -- candidate generation -----------------------------------------------------

def _dense(p: Poly, D: int, scale) -> np.ndarray:
    A = np.zeros((D + 1, D + 1), dtype=complex)
    for (i, j), c in p.with_variables(UV).terms.items():
        A[i, j] = complex(c / scale)
    return A


def hidden_variable_candidates(P: Poly, hidden: str = "u", limit: float = 1e8) -> np.ndarray:
    """Approximate common zeros of ``P_u`` and ``P_v`` from a polynomial eigenproblem.

    The Sylvester matrix ``S(t)`` of ``P_u`` and ``P_v`` in the other variable
    is a matrix polynomial in the hidden variable ``t``; its finite
    eigenvalues are the roots of the resultant, and the eigenvectors have
    Vandermonde structure ``(1, s, s^2, ...)`` in the eliminated variable.
    """
    P = P.with_variables(UV)
    D = int(P.degree())
    if D < 2:
        return np.zeros((0, 2), dtype=complex)
    s = P.max_abs_coeff()
    Pu, Pv = _dense(P.diff("u"), D, s), _dense(P.diff("v"), D, s)
    if hidden == "v":
        Pu, Pv = Pu.T, Pv.T
    m = n = D - 1
    N, K = m + n, D - 1
    S = np.zeros((K + 1, N, N), dtype=complex)
    for r in range(n):
        S[:, r, r:r + m + 1] = Pu[:K + 1, :m + 1]
    for r in range(m):
        S[:, n + r, r:r + n + 1] = Pv[:K + 1, :n + 1]
    scale = max(np.abs(S).max(), 1e-300)
    S /= scale
    NK = N * K
    A = np.zeros((NK, NK), dtype=complex)
    B = np.eye(NK, dtype=complex)
    for k in range(K - 1):
        A[k * N:(k + 1) * N, (k + 1) * N:(k + 2) * N] = np.eye(N)
    for k in range(K):
        A[(K - 1) * N:, k * N:(k + 1) * N] = -S[k]
    B[(K - 1) * N:, (K - 1) * N:] = S[K]
    with np.errstate(all="ignore"):
        w, vr = sla.eig(A, B)
        ok = np.isfinite(w) & (np.abs(w) < limit)
        X = vr[:N, ok]
        other = X[1] / X[0]
    t = w[ok]
    good = np.isfinite(other)
    pts = np.stack([t[good], other[good]], axis=1)
    if hidden == "v":
        pts = pts[:, ::-1]
    return pts


def _root_bound(coeffs: Sequence) -> float:
    """Fujiwara bound on the moduli of the roots of ``sum coeffs[k] t^k``."""
    cs = [c for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    n = len(cs) - 1
    if n <= 0:
        return 1.0

    def lg(c):
        c = abs(c)
        return math.log(c.numerator) - math.log(c.denominator)

    ln = lg(cs[-1])
    best = -math.inf
    for k in range(1, n + 1):
        c = cs[n - k]
        if c == 0:
            continue
        val = (lg(c) - ln - (math.log(2) if k == n else 0.0)) / k
        best = max(best, val)
    return 2 * math.exp(best) if best > -math.inf else 1.0


def exact_coordinate_bounds(P: Poly) -> Optional[Tuple[float, float]]:
    """Root bounds on ``u`` and ``v`` of every critical point of ``P``,
    from ``Res_v(P_u, P_v)`` and ``Res_u(P_u, P_v)``.

    ``None`` when a partial does not involve the eliminated variable or a
    resultant vanishes (degenerate, non-generic input).
    """
    P = P.with_variables(UV)
    Pu, Pv = P.diff("u"), P.diff("v")
    out = []
    for elim, keep in (("v", "u"), ("u", "v")):
        if Pu.degree(elim) <= 0 or Pv.degree(elim) <= 0:
            return None
        R = resultant(Pu, Pv, elim).with_variables((keep,))
        if R.is_zero():
            return None
        cs = R.coeffs(keep)
        deg = max(cs) if cs else 0
        out.append(_root_bound([cs[k].constant_value() if k in cs else 0 for k in range(deg + 1)]))
    return out[0], out[1]


# -- main solver --------------------------------------------------------------

class _Curve:
    """Normalised evaluators for ``P`` and its derivatives."""

    def __init__(self, P: Poly):
        self.P = P.with_variables(UV)
        self.der = _Derivs(self.P)
        s = self.der.scale
        self.grad = System([PolyEval(self.P.diff("u"), UV, scale=s),
                            PolyEval(self.P.diff("v"), UV, scale=s)],
                           [[self.der.d[(2, 0)], self.der.d[(1, 1)]],
                            [self.der.d[(1, 1)], self.der.d[(0, 2)]]])
        Puu, Puv, Pvv = (self.P.diff("u").diff("u"), self.P.diff("u").diff("v"),
                         self.P.diff("v").diff("v"))
        hess = Puu * Pvv - Puv * Puv
        self.node_sys = System([self.der.d[(0, 0)], self.grad.F[0], self.grad.F[1]],
                               [[self.der.d[(1, 0)], self.der.d[(0, 1)]]] + self.grad.J)
        hs = hess.max_abs_coeff() if not hess.is_zero() else 1
        self.cusp_sys = System(self.node_sys.F + [PolyEval(hess, UV, scale=hs)],
                               self.node_sys.J + [[PolyEval(hess.diff("u"), UV, scale=hs),
                                                   PolyEval(hess.diff("v"), UV, scale=hs)]])

    def residual(self, X: np.ndarray) -> np.ndarray:
        vals = [np.abs(self.der.d[k](X)) for k in ((0, 0), (1, 0), (0, 1))]
        return np.max(vals, axis=0)

    def rel_value(self, X: np.ndarray) -> np.ndarray:
        ev = self.der.d[(0, 0)]
        return np.abs(ev(X)) / np.maximum(ev.magnitude(X), 1e-300)

    def rel_grad(self, X: np.ndarray) -> np.ndarray:
        return self.grad.relative_residual(X)


def _polish(curve: _Curve, X: np.ndarray, tol: float) -> Tuple[np.ndarray, List[str], List[dict]]:
    """Re-solve each point on the system matching its local type."""
    D = curve.der.at(X)
    kinds, datas = [], []
    for i in range(len(X)):
        k, data = _classify_from({key: val[i] for key, val in D.items()}, tol)
        kinds.append(k)
        datas.append(data)
    kinds_arr = np.array(kinds)
    Y = X.copy()
    for kind, system in ((NODE, curve.node_sys), (CUSP, curve.cusp_sys)):
        sel = np.nonzero(kinds_arr == kind)[0]
        if len(sel):
            out = damped_newton(system, X[sel], max_iter=30)
            better = curve.residual(out.X) <= curve.residual(X[sel])
            Y[sel[better]] = out.X[better]
    return Y, kinds, datas


class _MpPoly:
    """Exact coefficients evaluated in mpmath complex arithmetic."""

    def __init__(self, p: Poly, scale):
        self.items = [(e, mpmath.mpf(c.numerator) / c.denominator / scale)
                      for e, c in p.with_variables(UV).terms.items()]

    def __call__(self, u, v):
        return mpmath.fsum(c * u ** i * v ** j for (i, j), c in self.items)


def _mp_polish(P: Poly, pts: np.ndarray, kinds: Sequence[str], dps: int = 40,
               iters: int = 8) -> np.ndarray:
    """Extended-precision Newton on a square system that is regular at the point.

    Nodes: ``(P_u, P_v)``.  Cusps: the stronger of ``P_u``, ``P_v`` (by
    gradient) together with ``det Hess P``.
    """
    P = P.with_variables(UV)
    s = P.max_abs_coeff()
    with mpmath.workdps(dps):
        Pu, Pv = P.diff("u"), P.diff("v")
        Puu, Puv, Pvv = Pu.diff("u"), Pu.diff("v"), Pv.diff("v")
        H = Puu * Pvv - Puv * Puv
        ev = {name: _MpPoly(q, s) for name, q in
              (("Pu", Pu), ("Pv", Pv), ("Puu", Puu), ("Puv", Puv), ("Pvv", Pvv), ("H", H),
               ("Hu", H.diff("u")), ("Hv", H.diff("v")))}
        out = pts.copy()
        for n, kind in enumerate(kinds):
            u, v = mpmath.mpc(pts[n, 0]), mpmath.mpc(pts[n, 1])
            if kind not in (NODE, CUSP):
                continue
            for _ in range(iters):
                a, b, c = ev["Puu"](u, v), ev["Puv"](u, v), ev["Pvv"](u, v)
                if kind == NODE:
                    F = [ev["Pu"](u, v), ev["Pv"](u, v)]
                    J = [[a, b], [b, c]]
                else:
                    first = ("Pu", [a, b]) if abs(a) + abs(b) >= abs(b) + abs(c) else ("Pv", [b, c])
                    F = [ev[first[0]](u, v), ev["H"](u, v)]
                    J = [first[1], [ev["Hu"](u, v), ev["Hv"](u, v)]]
                det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
                if det == 0:
                    break
                du = (J[1][1] * F[0] - J[0][1] * F[1]) / det
                dv = (J[0][0] * F[1] - J[1][0] * F[0]) / det
                u, v = u - du, v - dv
                if abs(du) + abs(dv) < mpmath.mpf(10) ** (-dps + 5) * (1 + abs(u) + abs(v)):
                    break
            cand = np.array([complex(u), complex(v)])
            if np.isfinite(cand).all() and np.abs(cand - pts[n]).max() < 1e-4 * (1 + np.abs(pts[n]).max()):
                out[n] = cand
    return out


def _mp_residual(P: Poly, pts: np.ndarray, dps: int = 40) -> np.ndarray:
    """``max(|P|, |P_u|, |P_v|)`` (unit max coefficient) evaluated without roundoff."""
    P = P.with_variables(UV)
    s = P.max_abs_coeff()
    with mpmath.workdps(dps):
        evs = [_MpPoly(q, s) for q in (P, P.diff("u"), P.diff("v"))]
        return np.array([float(max(abs(e(mpmath.mpc(p[0]), mpmath.mpc(p[1]))) for e in evs))
                         for p in pts])


def solve_singular_points(curve: ImplicitCurve, *, expected: Optional[int] = None,
                          degrees: Optional[Tuple[int, int]] = None,
                          tol_residual: float = DEFAULT_RESIDUAL,
                          tol_dedup: float = DEFAULT_DEDUP,
                          tol_classify: float = DEFAULT_CLASSIFY,
                          starts_factor: float = DEFAULT_STARTS_FACTOR,
                          seed: int = 0, exact_bounds: Optional[bool] = None,
                          strict: bool = False) -> SolveReport:
    """Locate, deduplicate and classify the affine singular points of ``C'``.

    ``expected`` (default: ``n + c`` from the closed forms when ``degrees``
    is given) sizes the start budget and triggers one x4 escalation when
    the count falls short.  With ``strict=True`` a final mismatch or a
    residual failure raises :class:`SolveError`.
    """
    t0 = time.perf_counter()
    if expected is None and degrees is not None:
        e = expected_invariants(*degrees)
        expected = e.nodes + e.cusps
    P = curve.P.with_variables(UV)
    C = _Curve(P)
    rng = np.random.default_rng(seed)
    diag: Dict[str, Any] = {"expected": expected, "seed": seed}
    timings: Dict[str, float] = {}

    if exact_bounds is None:
        exact_bounds = P.degree() <= EXACT_BOUND_MAX_DEGREE
    cands = [hidden_variable_candidates(P, "u"), hidden_variable_candidates(P, "v")]
    eig = np.concatenate(cands)
    diag["eigen_candidates"] = int(len(eig))
    timings["eigen"] = round(time.perf_counter() - t0, 3)
    bounds = exact_coordinate_bounds(P) if exact_bounds else None
    if bounds is not None:
        bu, bv = bounds
        diag["bound_source"] = "exact resultants"
        timings["bounds"] = round(time.perf_counter() - t0, 3)
    else:
        finite = np.abs(eig[np.isfinite(eig).all(axis=1)])
        bu = float(2 * finite[:, 0].max()) if len(finite) else 10.0
        bv = float(2 * finite[:, 1].max()) if len(finite) else 10.0
        diag["bound_source"] = "eigen candidates"
    diag["bound_u"], diag["bound_v"] = bu, bv
    radius = min(max(bu, bv), 1e6)

    target = expected if expected else 64
    budget = int(starts_factor * target)
    found = np.zeros((0, 2), dtype=complex)
    starts_used = 0
    rounds = 0
    escalations = 0
    starts = eig
    while True:
        rounds += 1
        rand = complex_box(rng, budget, 2, radius)
        X0 = np.concatenate([starts, rand])
        starts_used += len(X0)
        out = damped_newton(C.grad, X0)
        X = out.X[out.converged]
        X = X[C.rel_grad(X) < 1e-9]
        X = X[C.rel_value(X) < tol_residual]
        found = np.concatenate([found, X])
        # collapse obvious repeats before the expensive polish
        reps, _ = dedup(found, 1e-6)
        found = found[np.sort(reps)]
        if expected is None or len(found) >= expected or escalations >= 1:
            break
        escalations += 1
        budget *= 4
        starts = np.zeros((0, 2), dtype=complex)
    timings["newton"] = round(time.perf_counter() - t0, 3)

    polished, kinds, _ = _polish(C, found, tol_classify)
    polished = _mp_polish(P, polished, kinds)
    res = C.residual(polished)
    reps, groups = dedup(polished, tol_dedup, score=res)
    merges = sum(len(g) - 1 for g in groups)
    pts = polished[reps]
    D = C.der.at(pts)
    resid = _mp_residual(P, pts)
    points: List[SingularPoint] = []
    for i in range(len(pts)):
        kind, data = _classify_from({k: v[i] for k, v in D.items()}, tol_classify)
        u, v = complex(pts[i, 0]), complex(pts[i, 1])
        points.append(SingularPoint((u, v), kind, data, float(resid[i]),
                                    bool(abs(u.imag) < 1e-8 and abs(v.imag) < 1e-8)))
    points.sort(key=lambda p: (p.location[0].real, p.location[0].imag,
                               p.location[1].real, p.location[1].imag))
    n_nodes = sum(p.kind == NODE for p in points)
    n_cusps = sum(p.kind == CUSP for p in points)
    worst = max((p.residual for p in points), default=0.0)
    diag.update({"starts_used": starts_used, "rounds": rounds, "escalations": escalations,
                 "dedup_merges": merges, "worst_residual": worst,
                 "residual_ok": worst < tol_residual,
                 "count_ok": expected is None or len(points) == expected})
    timings["total"] = round(time.perf_counter() - t0, 3)
    report = SolveReport(points, n_nodes, n_cusps, diag, timings)
    if strict:
        if not diag["count_ok"]:
            raise SolveError(f"found {len(points)} singular points, expected {expected}", report)
        if not diag["residual_ok"]:
            raise SolveError(f"worst residual {worst:.3g} above {tol_residual}", report)
    return report


# -- checks on the critical curve -----------------------------------------------

def _cusp_system(problem: GsdsProblem) -> System:
    return System.build([problem.f, problem.g, problem.h, problem.s], ALL_VARS)


def find_cusps_direct(problem: GsdsProblem, *, seed: int = 0, batch: int = 200,
                      starts_factor: float = DEFAULT_STARTS_FACTOR, stable_batches: int = 2,
                      tol_dedup: float = DEFAULT_DEDUP, tol: float = 1e-10
                      ) -> Tuple[np.ndarray, Dict[str, Any]]:
    """Solutions of ``f = g = h = s = 0`` by multi-start Newton from points of ``X x Y``."""
    expected = expected_invariants(*problem.degrees).cusps
    system = _cusp_system(problem)
    rng = np.random.default_rng(seed)
    pts = np.zeros((0, 4), dtype=complex)
    budget = int(starts_factor * expected)
    used = 0
    stable = 0
    history = []
    while used < budget:
        S = product_starts(problem, rng, batch, radius=rng.choice([1.0, 3.0, 10.0]))
        used += len(S)
        out = damped_newton(system, S)
        got = out.X[out.converged]
        got = got[system.relative_residual(got) < tol]
        pts = np.concatenate([pts, got])
        reps, _ = dedup(pts, tol_dedup)
        pts = pts[np.sort(reps)]
        history.append(int(len(pts)))
        if len(pts) == expected:
            stable += 1
            if stable > stable_batches:
                break
        else:
            stable = 0
    return pts, {"starts_used": used, "history": history, "expected": expected}


def count_cusps_direct(problem: GsdsProblem, **kw) -> int:
    """Number of points of ``C`` where ``s`` vanishes (cusps of ``C'``)."""
    pts, _ = find_cusps_direct(problem, **kw)
    return int(len(pts))


def _fibre_starts(problem: GsdsProblem, target, rng, n: int) -> np.ndarray:
    """Points ``(x, y, z, w)`` with ``(z, w)`` on ``Y`` and ``pi = target``."""
    a, b, c, d = (float(t) for t in problem.quad.as_tuple())
    S = product_starts(problem, rng, n, radius=float(rng.choice([1.0, 3.0])))
    z, w = S[:, 2], S[:, 3]
    x = target[0] - a * z - b * w
    y = target[1] - c * z - d * w
    return np.stack([x, y, z, w], axis=1)


def _projection_rows(problem: GsdsProblem, target, n: int):
    a, b, c, d = (float(t) for t in problem.quad.as_tuple())
    A = np.array([[1, 0, a, b], [0, 1, c, d]], dtype=complex)
    bb = -np.array(target, dtype=complex)
    return np.broadcast_to(A, (n, 2, 4)).copy(), np.broadcast_to(bb, (n, 2)).copy()


def _fibre_solutions(problem: GsdsProblem, polys, target, *, seed: int, starts: int,
                     tol: float, sep: float, deflate: bool = False) -> np.ndarray:
    """Distinct solutions of ``polys = 0`` with ``pi = target``.

    With ``deflate`` the clustering uses positions re-solved on the
    deflated system (see :func:`_deflate_cusp_preimages`), so the two
    nearby approximations of a double root count once.
    """
    system = System.build(polys, ALL_VARS)
    rng = np.random.default_rng(seed)
    pts = np.zeros((0, 4), dtype=complex)
    keys = np.zeros((0, 4), dtype=complex)
    for _ in range(4):
        S = _fibre_starts(problem, target, rng, starts)
        out = damped_newton(system, S, linear=_projection_rows(problem, target, len(S)))
        got = out.X[out.converged]
        if len(got):
            A, bb = _projection_rows(problem, target, len(got))
            lin = np.abs(np.einsum("nkj,nj->nk", A, got) + bb).max(axis=1)
            scale = 1 + np.abs(got).max(axis=1)
            got = got[(system.relative_residual(got) < tol) & (lin < tol * scale)]
            pts = np.concatenate([pts, got])
            keys = np.concatenate([keys, _deflate_cusp_preimages(problem, got, target)
                                   if deflate and len(got) else got])
        reps, _ = dedup(keys, sep)
        reps = np.sort(reps)
        pts, keys = pts[reps], keys[reps]
    return pts


def _deflate_cusp_preimages(problem: GsdsProblem, X: np.ndarray, target) -> np.ndarray:
    """Over a cusp the fibre system has a double root; where ``s`` nearly
    vanishes, re-solve with ``s`` appended, which makes the root regular."""
    full = _cusp_system(problem)
    s_rel = np.abs(full.F[3](X)) / np.maximum(full.F[3].magnitude(X), 1e-300)
    sel = np.nonzero(s_rel < 1e-3)[0]
    if not len(sel):
        return X
    out = damped_newton(full, X[sel], linear=_projection_rows(problem, target, len(sel)),
                        max_iter=40)
    better = full.relative_residual(out.X) < 1e-6
    X = X.copy()
    X[sel[better]] = out.X[better]
    return X


def node_preimages(problem: GsdsProblem, node: SingularPoint, *, seed: int = 0,
                   starts: int = 120, tol: float = 1e-8, sep: float = 1e-6,
                   require_node: bool = True) -> int:
    """Number of distinct points of ``C`` over the location of ``node``."""
    if require_node and node.kind != NODE:
        raise ValueError(f"node_preimages expects a Node, got {node.kind}")
    pts = _fibre_solutions(problem, [problem.f, problem.g, problem.h], node.location,
                           seed=seed, starts=starts, tol=tol, sep=sep, deflate=True)
    return int(len(pts))


def fiber_count(problem: GsdsProblem, point: Tuple[complex, complex], *,
                curve: Optional[ImplicitCurve] = None, seed: int = 0, starts: int = 60,
                tol: float = 1e-10, sep: float = 1e-6, min_value: float = 1e-3) -> int:
    """Number of points of ``X x Y`` over ``point`` (``f = g = 0``, ``pi = point``)."""
    if curve is not None:
        ev = PolyEval(curve.P, UV, normalize=True)
        val = abs(ev(np.array([point], dtype=complex))[0])
        if val <= min_value:
            raise ValueError(f"point is too close to C' (|P| = {val:.3g})")
    pts = _fibre_solutions(problem, [problem.f, problem.g], point,
                           seed=seed, starts=starts, tol=tol, sep=sep)
    return int(len(pts))


def random_off_curve_points(curve: ImplicitCurve, n: int, seed: int = 0,
                            min_value: float = 1e-3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ev = PolyEval(curve.P, UV, normalize=True)
    out = []
    while len(out) < n:
        X = (rng.standard_normal((4 * n, 2)) + 1j * rng.standard_normal((4 * n, 2))) * 0.7
        ok = np.abs(ev(X)) > min_value
        out.extend(X[ok][: n - len(out)])
    return np.array(out, dtype=complex)


def line_section_degree(problem: GsdsProblem, *, seed: int = 0, batch: int = 400,
                        max_batches: int = 40, stable_batches: int = 3,
                        tol: float = 1e-10, sep: float = 1e-6) -> Tuple[int, Dict[str, Any]]:
    """Degree of ``C'`` without elimination: points of ``C`` over a random line.

    ``pi`` restricted to ``C`` is birational onto its image, so the number of
    points of ``C`` with ``alpha u + beta v = gamma`` (random complex
    coefficients) equals the degree.  Batches of starts run until the count
    stops changing for ``stable_batches`` batches in a row.
    """
    rng = np.random.default_rng(seed)
    a, b, c, d = (complex(float(t)) for t in problem.quad.as_tuple())
    al, be, ga = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    row = np.array([al, be, al * a + be * c, al * b + be * d])
    system = System.build([problem.f, problem.g, problem.h], ALL_VARS)
    pts = np.zeros((0, 4), dtype=complex)
    history: List[int] = []
    stable = 0
    for _ in range(max_batches):
        S = product_starts(problem, rng, batch, radius=float(rng.choice([1.0, 3.0, 10.0])))
        A = np.broadcast_to(row, (len(S), 1, 4)).copy()
        bb = np.full((len(S), 1), -ga)
        out = damped_newton(system, S, linear=(A, bb))
        got = out.X[out.converged]
        lin = np.abs(got @ row - ga) / (1 + np.abs(got).max(axis=1))
        got = got[(system.relative_residual(got) < tol) & (lin < tol)]
        before = len(pts)
        pts = np.concatenate([pts, got])
        reps, _ = dedup(pts, sep)
        pts = pts[np.sort(reps)]
        history.append(int(len(pts)))
        stable = stable + 1 if len(pts) == before else 0
        if stable >= stable_batches:
            break
    return int(len(pts)), {"history": history, "seed": seed}
