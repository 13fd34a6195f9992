"""Real pictures of the caustic.

Two independent renderings in display coordinates (half of ``pi``, i.e.
the midpoint map itself):

* :func:`trace_midpoints` pairs real points ``p`` of ``X`` with real points
  ``q`` of ``Y`` where the critical polynomial ``h(p, q)`` changes sign
  along ``Y``, refines each pair, and emits ``pi(p, q) / 2``.  No
  elimination is involved.
* :func:`contour` extracts ``{P = 0}`` from a sign grid (marching squares).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from skimage import measure

from .eliminate import UV, ImplicitCurve
from .numeric import PolyEval
from .polycore import Poly
from .scene import GsdsProblem
from .singular import CUSP, SingularPoint, SolveReport

Window = Tuple[float, float, float, float]  # (umin, umax, vmin, vmax)
Polyline = np.ndarray  # (n, 2) real


class TraceError(ValueError):
    pass


@dataclass
class RealTrace:
    midpoint_samples: np.ndarray
    contour_polylines: List[Polyline]
    real_cusps: List[Tuple[float, float]]
    window: Window
    resolution: int = 512
    extra: dict = field(default_factory=dict)


# -- real loci of the input curves --------------------------------------------

def _grid_values(p: Poly, variables: Sequence[str], window: Window, n: int):
    ev = PolyEval(p, variables, normalize=True)
    us = np.linspace(window[0], window[1], n)
    vs = np.linspace(window[2], window[3], n)
    U, V = np.meshgrid(us, vs, indexing="ij")
    vals = ev(np.stack([U.ravel(), V.ravel()], axis=1)).real.reshape(n, n)
    return us, vs, vals


def _to_world(path: np.ndarray, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    i, j = path[:, 0], path[:, 1]
    du = (us[-1] - us[0]) / (len(us) - 1)
    dv = (vs[-1] - vs[0]) / (len(vs) - 1)
    return np.stack([us[0] + i * du, vs[0] + j * dv], axis=1)


def contour(curve, window: Window, resolution: int = 512) -> List[Polyline]:
    """Polylines approximating ``{P = 0}`` inside ``window``.

    ``curve`` is an :class:`ImplicitCurve` or a bivariate :class:`Poly`.
    Grid values are signs of ``P`` at ``resolution x resolution`` nodes;
    crossings are placed by linear interpolation and every polyline keeps
    the positive side of ``P`` on the same hand.
    """
    P = curve.P if isinstance(curve, ImplicitCurve) else curve
    variables = P.variables if len(P.variables) == 2 else UV
    us, vs, vals = _grid_values(P, variables, window, resolution)
    if not np.isfinite(vals).all():
        raise TraceError("P overflows on the grid; shrink the window")
    if vals.min() > 0 or vals.max() < 0:
        return []
    paths = measure.find_contours(vals, 0.0, fully_connected="high", positive_orientation="high")
    return [_to_world(p, us, vs) for p in paths if len(p) >= 2]


def _project_to_curve(p: Poly, variables, pts: np.ndarray, steps: int = 4) -> np.ndarray:
    """A few Newton steps along the gradient onto ``{p = 0}`` (real points)."""
    a, b = variables
    f = PolyEval(p, variables, normalize=True)
    fa = PolyEval(p.diff(a), variables, scale=f.scale)
    fb = PolyEval(p.diff(b), variables, scale=f.scale)
    X = pts.astype(float).copy()
    for _ in range(steps):
        val = f(X).real
        ga, gb = fa(X).real, fb(X).real
        g2 = ga * ga + gb * gb
        ok = g2 > 1e-300
        t = np.where(ok, val / np.where(ok, g2, 1), 0)
        X[:, 0] -= t * ga
        X[:, 1] -= t * gb
    return X


def real_locus(p: Poly, variables: Sequence[str], window: Window, resolution: int
               ) -> List[Polyline]:
    """Ordered samples of the real curve ``{p = 0}`` inside ``window``."""
    lines = contour(p.with_variables(tuple(variables)), window, resolution)
    return [_project_to_curve(p, tuple(variables), line) for line in lines]


def _locus_window(curve: Poly, radius: float) -> Window:
    return (-radius, radius, -radius, radius)


# -- chord midpoints ------------------------------------------------------------

def trace_midpoints(problem: GsdsProblem, resolution: int = 256, *,
                    radius: float = 4.0) -> np.ndarray:
    """Points of the real caustic (display coordinates) from parallel-tangent pairs.

    Real loci of ``X`` and ``Y`` are sampled at ``resolution`` grid lines
    across ``[-radius, radius]^2``.  For each sample ``p`` of ``X``, sign
    changes of ``h(p, .)`` between consecutive samples of ``Y`` bracket the
    pairs; each is refined by Newton on ``(g, h(p, .))`` in ``(z, w)`` and
    mapped to ``pi(p, q) / 2``.
    """
    win = _locus_window(problem.f, radius)
    X_lines = real_locus(problem.f, ("x", "y"), win, resolution)
    Y_lines = real_locus(problem.g, ("z", "w"), win, resolution)
    if not X_lines:
        raise TraceError("X has no real points in the sampling window")
    if not Y_lines:
        raise TraceError("Y has no real points in the sampling window")
    allv = ("x", "y", "z", "w")
    h = PolyEval(problem.h, allv, normalize=True)
    hz = PolyEval(problem.h.diff("z"), allv, scale=h.scale)
    hw = PolyEval(problem.h.diff("w"), allv, scale=h.scale)
    g = PolyEval(problem.g.with_variables(allv), allv, normalize=True)
    gz = PolyEval(problem.g.diff("z").with_variables(allv), allv, scale=g.scale)
    gw = PolyEval(problem.g.diff("w").with_variables(allv), allv, scale=g.scale)
    P = np.concatenate(X_lines)
    a, b, c, d = (float(t) for t in problem.quad.as_tuple())
    out = []
    for Q in Y_lines:
        if len(Q) < 2:
            continue
        nq = len(Q)
        # h on all (p, q) pairs for this branch of Y
        pts = np.empty((len(P) * nq, 4))
        pts[:, 0] = np.repeat(P[:, 0], nq)
        pts[:, 1] = np.repeat(P[:, 1], nq)
        pts[:, 2] = np.tile(Q[:, 0], len(P))
        pts[:, 3] = np.tile(Q[:, 1], len(P))
        H = h(pts).real.reshape(len(P), nq)
        sign = np.sign(H)
        i, j = np.nonzero(sign[:, :-1] * sign[:, 1:] < 0)
        if not len(i):
            continue
        t = H[i, j] / (H[i, j] - H[i, j + 1])
        q0 = Q[j] + t[:, None] * (Q[j + 1] - Q[j])
        S = np.stack([P[i, 0], P[i, 1], q0[:, 0], q0[:, 1]], axis=1)
        for _ in range(6):
            F1, F2 = g(S).real, h(S).real
            a11, a12 = gz(S).real, gw(S).real
            a21, a22 = hz(S).real, hw(S).real
            det = a11 * a22 - a12 * a21
            ok = np.abs(det) > 1e-300
            det = np.where(ok, det, 1)
            S[:, 2] -= np.where(ok, (a22 * F1 - a12 * F2) / det, 0)
            S[:, 3] -= np.where(ok, (a11 * F2 - a21 * F1) / det, 0)
        good = (np.abs(g(S)) < 1e-9) & (np.abs(h(S)) < 1e-9)
        good &= np.hypot(S[:, 2] - q0[:, 0], S[:, 3] - q0[:, 1]) < 4 * np.abs(Q[1:] - Q[:-1]).max()
        S = S[good]
        mid = np.stack([S[:, 0] + a * S[:, 2] + b * S[:, 3],
                        S[:, 1] + c * S[:, 2] + d * S[:, 3]], axis=1) / 2
        out.append(mid)
    if not out:
        return np.zeros((0, 2))
    pts = np.concatenate(out)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order]


def default_window(samples: np.ndarray, pad: float = 0.2) -> Window:
    """Bounding box of ``samples`` padded by ``pad`` of its size on each side."""
    if not len(samples):
        return (-1.0, 1.0, -1.0, 1.0)
    lo, hi = samples.min(axis=0), samples.max(axis=0)
    span = np.maximum(hi - lo, 1e-6)
    lo, hi = lo - pad * span, hi + pad * span
    return (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def count_real_cusps(solve: SolveReport) -> int:
    return sum(1 for p in solve.points if p.kind == CUSP and p.is_real)


def real_cusps(solve: SolveReport, scale: float = 0.5) -> List[Tuple[float, float]]:
    return [(scale * p.location[0].real, scale * p.location[1].real)
            for p in solve.points if p.kind == CUSP and p.is_real]


def build_trace(problem: GsdsProblem, curve: ImplicitCurve, solve: SolveReport, *,
                resolution: int = 512, window: Optional[Window] = None,
                radius: float = 4.0) -> RealTrace:
    """Both renderings plus the real cusps, in display coordinates."""
    mids = trace_midpoints(problem, resolution, radius=radius)
    cusps = real_cusps(solve)
    if window is None:
        pts = np.concatenate([mids, np.array(cusps).reshape(-1, 2)]) if cusps else mids
        window = default_window(pts)
    # P lives in pi coordinates: twice the display coordinates
    big = tuple(2 * t for t in window)
    lines = [0.5 * line for line in contour(curve, big, resolution)]  # type: ignore[arg-type]
    return RealTrace(mids, lines, cusps, window, resolution)


def distance_to_polylines(points: np.ndarray, lines: Sequence[Polyline]) -> np.ndarray:
    """Distance from each point to the nearest polyline vertex."""
    from scipy.spatial import cKDTree
    if not lines or not len(points):
        return np.full(len(points), np.inf)
    tree = cKDTree(np.concatenate(lines))
    dist, _ = tree.query(points)
    return dist


# -- output ---------------------------------------------------------------------

def to_svg(trace: RealTrace, *, size: int = 640, title: str = "") -> str:
    umin, umax, vmin, vmax = trace.window
    span = max(umax - umin, vmax - vmin)
    sx = size / span

    def xy(p):
        return (p[0] - umin) * sx, size - (p[1] - vmin) * sx

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if title:
        out.append(f'<title>{title}</title>')
    for line in trace.contour_polylines:
        pts = " ".join("%.2f,%.2f" % xy(p) for p in line)
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.2"/>')
    for p in trace.midpoint_samples[:: max(1, len(trace.midpoint_samples) // 4000)]:
        x, y = xy(p)
        out.append(f'<circle class="midpoint" cx="{x:.2f}" cy="{y:.2f}" r="0.6" fill="#1f77b4"/>')
    for p in trace.real_cusps:
        x, y = xy(p)
        out.append(f'<circle class="cusp" cx="{x:.2f}" cy="{y:.2f}" r="5" fill="none" '
                   f'stroke="red" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def to_csv(points: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v"])
    for u, v in np.asarray(points).reshape(-1, 2):
        w.writerow([f"{u:.15g}", f"{v:.15g}"])
    return buf.getvalue()
