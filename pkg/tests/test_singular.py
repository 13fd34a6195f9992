import numpy as np
import pytest

from gsds.eliminate import UV, ImplicitCurve
from gsds.numeric import dedup
from gsds.polycore import parse_poly
from gsds.singular import (CUSP, NODE, OTHER, SingularPoint, classify_local,
                           count_cusps_direct, fiber_count, hidden_variable_candidates,
                           line_section_degree, node_preimages, random_off_curve_points,
                           solve_singular_points)
from gsds.sampling import critical_samples


@pytest.mark.parametrize("text, kind", [
    ("v^2 - u^2", NODE),
    ("v^2 - u^3", CUSP),
    ("v^2 - u^4", OTHER),
    ("u*v + u^3 - v^5", NODE),
    ("(v - u^2)^2 - u^5", OTHER),   # A4: rank-one quadratic part, cubic term along the kernel vanishes
])
def test_classify_local(text, kind):
    assert classify_local(parse_poly(text, UV), (0, 0)) == kind


def test_classify_local_rejects_triple_point():
    with pytest.raises(ValueError):
        classify_local(parse_poly("u^3 - v^3 + u*v^3", UV), (0, 0))


def test_synthetic_node_solve():
    curve = ImplicitCurve(parse_poly("v^2 - u^2", UV), 2)
    rep = solve_singular_points(curve, expected=1)
    assert len(rep.points) == 1
    p = rep.points[0]
    assert p.kind == NODE and p.is_real
    assert abs(p.location[0]) < 1e-10 and abs(p.location[1]) < 1e-10


def test_hidden_variable_candidates_find_cusp():
    # v^2 = u^3 shifted to (1, -2)
    P = parse_poly("(v + 2)^2 - (u - 1)^3 + (u - 1)^4", UV)
    cands = hidden_variable_candidates(P, "u")
    assert np.min(np.abs(cands - np.array([1, -2]))) < 1e-6


def test_conics_counts(conics):
    _, _, solve = conics
    assert len(solve.points) == 16
    assert (solve.n_cusps, solve.n_nodes, solve.n_other) == (12, 4, 0)
    assert solve.diagnostics["residual_ok"] and solve.diagnostics["count_ok"]
    assert all(p.residual < 1e-8 for p in solve.points)


def test_conjugation_symmetry(conics):
    _, _, solve = conics
    pts = np.array([p.location for p in solve.points])
    conj = np.conj(pts)
    both = np.concatenate([pts, conj])
    reps, _ = dedup(both, 1e-7)
    assert len(reps) == len(pts)
    for p in solve.points:
        mirror = min(solve.points, key=lambda q: np.abs(np.array(q.location) - np.conj(p.location)).max())
        assert mirror.kind == p.kind


def test_real_points_flagged(conics):
    _, _, solve = conics
    for p in solve.points:
        real = abs(p.location[0].imag) < 1e-8 and abs(p.location[1].imag) < 1e-8
        assert p.is_real == real


def test_direct_cusp_count_conics(conics):
    problem, _, _ = conics
    assert count_cusps_direct(problem) == 12


def test_node_preimages_conics(conics):
    problem, _, solve = conics
    nodes = [p for p in solve.points if p.kind == NODE]
    assert [node_preimages(problem, p) for p in nodes] == [2, 2, 2, 2]


def test_cusp_and_smooth_points_have_one_preimage(conics):
    problem, _, solve = conics
    cusp = next(p for p in solve.points if p.kind == CUSP)
    with pytest.raises(ValueError):
        node_preimages(problem, cusp)
    assert node_preimages(problem, cusp, require_node=False) == 1
    _, uv = critical_samples(problem, 3, seed=9)
    smooth = SingularPoint(tuple(uv[0]), OTHER, {}, 0.0, False)
    assert node_preimages(problem, smooth, require_node=False) == 1


def test_fiber_counts_conics(conics):
    problem, curve, _ = conics
    pts = random_off_curve_points(curve, 10, seed=1)
    assert [fiber_count(problem, tuple(p), curve=curve) for p in pts] == [4] * 10


def test_fiber_count_on_curve_rejected(conics):
    problem, curve, solve = conics
    with pytest.raises(ValueError):
        fiber_count(problem, solve.points[0].location, curve=curve)


def test_line_section_degree(conics):
    problem, _, _ = conics
    deg, info = line_section_degree(problem, seed=2)
    assert deg == 8


def test_dedup_tamper_breaks_count(conics):
    _, curve, _ = conics
    rep = solve_singular_points(curve, degrees=(2, 2), tol_dedup=10.0)
    assert not rep.diagnostics["count_ok"]


def test_solve_deterministic(conics):
    _, curve, solve = conics
    again = solve_singular_points(curve, degrees=(2, 2))
    assert again.as_dict() == solve.as_dict()


def test_solve_report_dict(conics):
    _, _, solve = conics
    d = solve.as_dict()
    assert d["n_nodes"] + d["n_cusps"] == len(d["points"])
    assert {"starts_used", "dedup_merges", "worst_residual"} <= set(d["diagnostics"])
    assert "timings" not in d
