import json

import numpy as np
import pytest

from gsds.eliminate import (UV, Budget, _contrast, _log2_abs_exact, BudgetExceeded, EliminationError, ImplicitCurve,
                            implicitize, infinity_profile, infinity_structure_matches,
                            remove_extraneous, substitute_fiber)
from gsds.numeric import PolyEval
from gsds.polycore import Poly, gcd, normalize_primitive, parse_poly
from gsds.sampling import critical_samples


def test_substitute_fiber(conics):
    problem, _, _ = conics
    F1, F2, F3 = substitute_fiber(problem)
    assert F2 == problem.g.with_variables(F2.variables)
    at_origin = F1.subs({"z": 0, "w": 0}).with_variables(UV)
    assert at_origin == problem.f.subs({"x": Poly.var("u", UV), "y": Poly.var("v", UV)}).with_variables(UV)
    zw = F1.subs({"u": 0, "v": 0})
    assert zw.degree() == problem.f.degree()
    assert F3.subs({"z": 0, "w": 0}).with_variables(UV).degree() <= problem.h.degree()


def test_degree_conics(conics):
    _, curve, _ = conics
    assert curve.degree == curve.P.degree() == 8


def test_primitive_squarefree(conics):
    _, curve, _ = conics
    P = curve.P
    assert normalize_primitive(P) == P
    assert gcd(P, P.diff("u")).is_constant()


def test_samples_lie_on_curve(conics):
    problem, curve, _ = conics
    _, uv = critical_samples(problem, 30, seed=5)
    assert len(uv) >= 20
    ev = PolyEval(curve.P, UV, normalize=True)
    assert np.max(np.abs(ev(uv))) < 1e-6


def test_extraneous_pieces_recorded(conics):
    _, curve, _ = conics
    prov = curve.provenance
    assert prov["retained"] == [8]
    assert sum(prov["removed"]) + 8 == prov["stages"]["Res_z(R1,R2)[w,z]"]["degree"]


def test_remove_extraneous_drops_spurious_factor(conics):
    problem, curve, _ = conics
    _, uv = critical_samples(problem, 24, seed=3)
    spurious = parse_poly("u - 7/3", UV) ** 2
    out = remove_extraneous(curve.P * spurious, problem, uv)
    assert out == curve.P
    # already clean input is unchanged
    assert remove_extraneous(curve.P, problem, uv) == curve.P


def test_exact_log_abs():
    p = parse_poly("(u - 1/3)^2 + 2*v", UV)
    pt = (0.75 + 0.5j, -1.25 + 0.125j)
    want = abs((pt[0] - 1 / 3) ** 2 + 2 * pt[1])
    assert 2 ** _log2_abs_exact(p, pt) == pytest.approx(want, rel=1e-12)
    assert _log2_abs_exact(parse_poly("u - 1/2", UV), (0.5, 3.0)) == -np.inf


def test_contrast_separates_high_degree_factor(conics):
    """A non-vanishing factor with heavy term cancellation still reads as nonzero."""
    problem, curve, _ = conics
    _, uv = critical_samples(problem, 24, seed=3)
    spurious = parse_poly("(u - 2*v)^30 - 3", UV)
    assert np.all(_contrast(curve.P, uv) < 1e-10)
    assert np.all(_contrast(spurious, uv) > 1e-2)
    assert remove_extraneous(curve.P * spurious ** 2, problem, uv) == curve.P


def test_remove_extraneous_needs_samples(conics):
    problem, curve, _ = conics
    with pytest.raises(EliminationError):
        remove_extraneous(curve.P, problem, np.zeros((0, 2)))


def test_remove_extraneous_none_vanish(conics):
    problem, _, _ = conics
    _, uv = critical_samples(problem, 24, seed=3)
    with pytest.raises(EliminationError):
        remove_extraneous(parse_poly("u^2 + v^2 + 17", UV), problem, uv)


def test_order_independence(conics):
    problem, curve, _ = conics
    other = implicitize(problem, orders=(("z", "w"), ("w", "z")))
    assert other.P == curve.P


def test_infinity_profile_conics(conics):
    problem, curve, _ = conics
    prof = infinity_profile(curve, problem)
    assert [m for _, _, m in prof] == [2, 2, 2, 2]
    assert sum(m for _, _, m in curve.infinity_points) == curve.degree
    assert infinity_structure_matches(curve, problem)


def test_budget_abort(conics):
    problem, _, _ = conics
    with pytest.raises(BudgetExceeded) as err:
        implicitize(problem, budget=Budget(max_terms=5))
    assert "Res_w(F1,F2)" in err.value.provenance


def test_json_roundtrip(conics):
    _, curve, _ = conics
    data = json.loads(json.dumps(curve.as_dict()))
    back = ImplicitCurve.from_dict(data)
    assert back.P == curve.P and back.degree == curve.degree
    assert data["variables"] == ["u", "v"]
    assert "timings" not in data


def test_degree_field_checked():
    with pytest.raises(ValueError):
        ImplicitCurve(parse_poly("u^2 + v^2 - 1", UV), 3)


def test_conic_cubic(conic_cubic):
    problem, curve = conic_cubic
    assert curve.degree == 18
    assert sorted(m for _, _, m in curve.infinity_points) == [2, 2, 2, 6, 6]
    assert infinity_structure_matches(curve, problem)
