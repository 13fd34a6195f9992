"""Numeric points on ``X x Y`` and on the critical curve ``C = {f = g = h = 0}``.

Starts are built on ``X x Y`` directly: pick complex ``x0`` and ``z0`` at
random and take all roots ``y`` of ``f(x0, y)`` and ``w`` of ``g(z0, w)``.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .numeric import System, damped_newton, dedup
from .polycore import Poly
from .scene import GsdsProblem

ALL_VARS = ("x", "y", "z", "w")


def _curve_fibre_points(p: Poly, a: str, b: str, values: np.ndarray) -> np.ndarray:
    """All points ``(t, s)`` with ``p(t, s) = 0`` for each ``t`` in ``values``."""
    cs = p.with_variables((a, b)).coeffs(b)
    deg = max(cs)
    out = []
    for t in values:
        coeffs = np.zeros(deg + 1, dtype=complex)
        for k, c in cs.items():
            coeffs[deg - k] = c.eval({a: t}, mode="complex")
        c = np.trim_zeros(coeffs, "f")
        if len(c) < 2:
            continue
        for s in np.roots(c):
            out.append((t, s))
    return np.array(out, dtype=complex).reshape(-1, 2)


def product_starts(problem: GsdsProblem, rng: np.random.Generator, n: int,
                   radius: float = 2.0) -> np.ndarray:
    """About ``n`` points of ``X x Y`` as rows ``(x, y, z, w)``."""
    d1, d2 = problem.degrees
    draws = max(1, int(np.ceil(n / (d1 * d2))))
    xs = radius * (rng.standard_normal(draws) + 1j * rng.standard_normal(draws)) / np.sqrt(2)
    zs = radius * (rng.standard_normal(draws) + 1j * rng.standard_normal(draws)) / np.sqrt(2)
    rows = []
    for x0, z0 in zip(xs, zs):
        P = _curve_fibre_points(problem.f, "x", "y", [x0])
        Q = _curve_fibre_points(problem.g, "z", "w", [z0])
        for p in P:
            for q in Q:
                rows.append((p[0], p[1], q[0], q[1]))
    return np.array(rows, dtype=complex).reshape(-1, 4)


def project(problem: GsdsProblem, pts: np.ndarray) -> np.ndarray:
    """``pi(x, y, z, w) = (x + a z + b w, y + c z + d w)``."""
    a, b, c, d = (float(t) for t in problem.quad.as_tuple())
    x, y, z, w = pts.T
    return np.stack([x + a * z + b * w, y + c * z + d * w], axis=1)


def critical_samples(problem: GsdsProblem, n: int, seed: int = 0,
                     tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """Up to ``n`` distinct points on ``C`` and their images under ``pi``.

    Each start on ``X x Y`` gets a random hyperplane through it, and Newton
    runs on ``(f, g, h, hyperplane)``.  Only points whose relative residual
    on ``(f, g, h)`` is below ``tol`` are kept.
    """
    rng = np.random.default_rng(seed)
    crit = System.build([problem.f, problem.g, problem.h], ALL_VARS)
    pts = np.zeros((0, 4), dtype=complex)
    for _ in range(8):
        S = product_starts(problem, rng, 2 * n)
        if not len(S):
            continue
        A = (rng.standard_normal((len(S), 1, 4)) + 1j * rng.standard_normal((len(S), 1, 4)))
        b = -np.einsum("nkj,nj->nk", A, S)
        out = damped_newton(crit, S, linear=(A, b), max_iter=100)
        got = out.X[out.converged]
        got = got[crit.relative_residual(got) < tol]
        pts = np.concatenate([pts, got])
        reps, _ = dedup(pts, 1e-8)
        pts = pts[np.sort(reps)]
        if len(pts) >= n:
            break
    pts = pts[:n]
    return pts, project(problem, pts)
