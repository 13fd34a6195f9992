import csv
import io

import numpy as np
import pytest

from gsds.eliminate import UV, implicitize
from gsds.numeric import PolyEval
from gsds.polycore import parse_poly
from gsds.scene import AffineMap, AffinePair, PlaneCurve, pair_to_quadruple
from gsds.singular import solve_singular_points
from gsds.trace import (RealTrace, TraceError, build_trace, contour, count_real_cusps,
                        default_window, distance_to_polylines, to_csv, to_svg,
                        trace_midpoints)


def test_contour_circle():
    res = 256
    lines = contour(parse_poly("u^2 + v^2 - 1", UV), (-2, 2, -2, 2), res)
    assert len(lines) == 1
    ring = lines[0]
    assert np.allclose(ring[0], ring[-1])           # closed
    assert np.abs(np.hypot(ring[:, 0], ring[:, 1]) - 1).max() < 2 / res


def test_contour_line_pair():
    lines = contour(parse_poly("u*v", UV), (-1, 1, -1, 1), 101)
    assert len(lines) == 2
    pts = np.concatenate(lines)
    # every vertex on an axis, both axes covered end to end
    assert np.all(np.minimum(np.abs(pts[:, 0]), np.abs(pts[:, 1])) < 1e-12)
    for axis in (0, 1):
        on = pts[np.abs(pts[:, 1 - axis]) < 1e-12, axis]
        assert on.min() < -0.99 and on.max() > 0.99


def test_contour_empty():
    assert contour(parse_poly("u^2 + v^2 + 1", UV), (-1, 1, -1, 1), 64) == []


def test_contour_orientation_consistent():
    # positive side on the same hand: the circle interior is negative
    ring = contour(parse_poly("u^2 + v^2 - 1", UV), (-2, 2, -2, 2), 128)[0]
    area = 0.5 * np.sum(ring[:-1, 0] * ring[1:, 1] - ring[1:, 0] * ring[:-1, 1])
    ring2 = contour(parse_poly("1 - u^2 - v^2", UV), (-2, 2, -2, 2), 128)[0]
    area2 = 0.5 * np.sum(ring2[:-1, 0] * ring2[1:, 1] - ring2[1:, 0] * ring2[:-1, 1])
    assert np.sign(area) == -np.sign(area2)


def test_empty_real_locus():
    X = PlaneCurve.parse("x^2 + y^2 + 1")
    H = AffineMap.from_values(["1.1", "0.1", "-0.2", "0.9"])
    problem = pair_to_quadruple(X, X.renamed(("z", "w")), AffinePair(AffineMap.identity(), H))
    with pytest.raises(TraceError):
        trace_midpoints(problem, 64)


@pytest.fixture(scope="module")
def figure1(figure1_problems):
    out = {}
    for name, problem in figure1_problems.items():
        curve = implicitize(problem)
        solve = solve_singular_points(curve, degrees=(2, 2))
        out[name] = (problem, curve, solve, build_trace(problem, curve, solve, resolution=512))
    return out


@pytest.mark.parametrize("name, cusps", [("circle", 4), ("hyperbola", 2)])
def test_real_cusp_counts(figure1, name, cusps):
    _, _, solve, trace = figure1[name]
    assert count_real_cusps(solve) == cusps
    assert len(trace.real_cusps) == cusps
    assert solve.n_cusps == 12 and (12 - cusps) % 2 == 0


@pytest.mark.parametrize("name", ["circle", "hyperbola"])
def test_midpoints_on_curve(figure1, name):
    _, curve, _, trace = figure1[name]
    assert len(trace.midpoint_samples) > 100
    ev = PolyEval(curve.P, UV, normalize=True)
    # display coordinates are half of pi
    assert np.abs(ev(2 * trace.midpoint_samples)).max() < 1e-5


@pytest.mark.parametrize("name", ["circle", "hyperbola"])
def test_renderings_agree(figure1, name):
    _, _, _, trace = figure1[name]
    cell = (trace.window[1] - trace.window[0]) / trace.resolution
    d = distance_to_polylines(trace.midpoint_samples, trace.contour_polylines)
    assert np.mean(d < 3 * cell) >= 0.95
    dc = distance_to_polylines(np.array(trace.real_cusps), trace.contour_polylines)
    assert np.all(dc < 3 * cell)


def test_refinement_keeps_curve(figure1):
    problem, curve, _, _ = figure1["circle"]
    coarse = trace_midpoints(problem, 128)
    fine = trace_midpoints(problem, 256)
    assert len(fine) > len(coarse)
    ev = PolyEval(curve.P, UV, normalize=True)
    assert np.abs(ev(2 * fine)).max() < 1e-5
    # coarse points are on the curve traced by the fine ones
    assert np.quantile(distance_to_polylines(coarse, [fine]), 0.95) < 0.02


def test_deterministic(figure1):
    problem, _, _, _ = figure1["hyperbola"]
    assert np.array_equal(trace_midpoints(problem, 128), trace_midpoints(problem, 128))


def test_default_window():
    pts = np.array([[0.0, 0.0], [1.0, 2.0]])
    assert default_window(pts) == pytest.approx((-0.2, 1.2, -0.4, 2.4))


def test_svg_and_csv(figure1):
    _, _, _, trace = figure1["circle"]
    svg = to_svg(trace, title="circle")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count('class="cusp"') == 4
    assert "<polyline" in svg
    rows = list(csv.reader(io.StringIO(to_csv(np.array([[1 / 3, -2.0]])))))
    assert rows == [["u", "v"], ["0.333333333333333", "-2"]]


def test_real_trace_fields():
    t = RealTrace(np.zeros((0, 2)), [], [], (-1, 1, -1, 1))
    assert t.resolution == 512


def test_xy_hyperbola_outside_gate():
    """xy = 1 fails G3 (axis-parallel asymptotes) but still gives two real cusps."""
    from gsds.scene import Quadruple, X_VARS, Y_VARS, _make_problem, validate_genericity
    H = AffineMap.from_values(["1.1", "0.1", "-0.2", "0.9"])
    X = PlaneCurve.parse("x*y - 1")
    GX, HY = X.renamed(X_VARS), H.pull_back(X.renamed(X_VARS)).renamed(Y_VARS)
    quad = Quadruple(1, 0, 0, 1)
    checks = validate_genericity(GX, HY, quad)
    assert [c.name for c in checks if not c.passed] == ["G3[X]"]
    with pytest.raises(Exception):
        pair_to_quadruple(X, X.renamed(("z", "w")), AffinePair(AffineMap.identity(), H))
    problem = _make_problem(GX, HY, quad, checks, source="affine-pair")
    solve = solve_singular_points(implicitize(problem), degrees=(2, 2))
    assert (solve.n_cusps, solve.n_nodes) == (12, 4)
    assert count_real_cusps(solve) == 2
