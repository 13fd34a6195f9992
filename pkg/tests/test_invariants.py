import itertools

import pytest

from gsds.invariants import (CHI_LABEL_NOTE, Check, InvariantSet, assemble_report,
                             closed_form_checks, curve_euler_characteristic,
                             euler_identity, expected_invariants, genus_chi_identity,
                             infinity_deltas, serre_identity, single_curve_invariants)

GRID = list(itertools.product(range(2, 7), repeat=2))


@pytest.mark.parametrize("d1, d2, want", [
    (2, 2, InvariantSet(8, 12, 4, 1, -8, -12)),
    (2, 3, InvariantSet(18, 36, 60, 7, -30, -90)),
    (3, 3, InvariantSet(36, 108, 360, 37, -108, -468)),
])
def test_expected_invariants(d1, d2, want):
    assert expected_invariants(d1, d2) == want


@pytest.mark.parametrize("d1, d2", [(1, 2), (2, 1), (0, 5), (2.0, 2)])
def test_rejects_low_degree(d1, d2):
    with pytest.raises(ValueError):
        expected_invariants(d1, d2)


def test_chi_relation():
    for d1, d2 in GRID:
        e = expected_invariants(d1, d2)
        assert e.chi_Cprime == e.chi_C - e.nodes


@pytest.mark.parametrize("d1, d2", GRID)
def test_symmetric(d1, d2):
    assert expected_invariants(d1, d2) == expected_invariants(d2, d1)


@pytest.mark.parametrize("d", range(2, 7))
def test_single_curve_formulas(d):
    e = expected_invariants(d, d)
    single = single_curve_invariants(d)
    assert e.degree == single["degree"] == 2 * d * d * (d - 1)
    assert e.genus == single["genus"] == 2 * d * d * (d * d - 3 * d + 2) + 1


@pytest.mark.parametrize("d, chi", [(2, 0), (3, -3), (4, -8)])
def test_curve_euler_characteristic(d, chi):
    assert curve_euler_characteristic(d) == chi


def test_infinity_deltas():
    assert infinity_deltas(2, 2) == (1, 1)
    assert infinity_deltas(2, 3) == (15, 1)
    assert infinity_deltas(3, 3) == (15, 15)


@pytest.mark.parametrize("d1, d2", GRID)
def test_identities_on_grid(d1, d2):
    e = expected_invariants(d1, d2)
    assert euler_identity(d1, d2, e.cusps, e.nodes, e.chi_Cprime).passed
    assert serre_identity(d1, d2, e).passed
    assert genus_chi_identity(d1, d2, e).passed
    assert all(c.passed for c in closed_form_checks(d1, d2))


@pytest.mark.parametrize("d1, d2, lhs, rhs", [
    (2, 2, 4, 4),     # -12 + 4 + 12 = 4 - 0*0
    (2, 3, 6, 6),     # -90 + 60 + 36 = 6 - 0*(-3)
])
def test_euler_values(d1, d2, lhs, rhs):
    e = expected_invariants(d1, d2)
    c = euler_identity(d1, d2, e.cusps, e.nodes, e.chi_Cprime)
    assert (c.lhs, c.rhs) == (lhs, rhs)


@pytest.mark.parametrize("d1, d2, lhs", [(2, 2, 21), (2, 3, 136), (3, 3, 595)])
def test_serre_values(d1, d2, lhs):
    c = serre_identity(d1, d2, expected_invariants(d1, d2))
    assert c.lhs == c.rhs == lhs


@pytest.mark.parametrize("d1, d2, lhs", [(2, 2, 0), (2, 3, -12)])
def test_genus_chi_values(d1, d2, lhs):
    c = genus_chi_identity(d1, d2, expected_invariants(d1, d2))
    assert c.lhs == c.rhs == lhs


def test_report_healthy():
    r = assemble_report(2, 2, degree=8, cusps=12, nodes=4, cusps_direct=12,
                        node_preimages=[2, 2, 2, 2], fiber_counts=[4] * 10,
                        infinity_multiplicities=[2, 2, 2, 2])
    assert r.verdict and r.failed() == []
    d = r.as_dict()
    assert d["verdict"] == "pass"
    assert CHI_LABEL_NOTE in d["notes"]
    assert all(isinstance(c["lhs"], int) and isinstance(c["rhs"], int) for c in d["checks"])


def test_report_tampered_cusps():
    r = assemble_report(2, 2, degree=8, cusps=11, nodes=4)
    assert not r.verdict
    assert {"cusps", "euler[measured]", "serre[measured]"} <= set(r.failed())


def test_report_bad_preimages_and_fibers():
    r = assemble_report(2, 3, node_preimages=[2, 1, 2], fiber_counts=[6, 5],
                        infinity_multiplicities=[6, 6, 2, 2, 2])
    assert set(r.failed()) == {"node_preimages", "fiber_count"}


def test_report_carries_resample_count():
    r = assemble_report(2, 2, degree=8, resample_count=3)
    assert r.as_dict()["resample_count"] == 3


def test_report_infinity_profile():
    ok = assemble_report(2, 3, infinity_multiplicities=[2, 6, 2, 6, 2])
    assert ok.verdict
    bad = assemble_report(2, 3, infinity_multiplicities=[6, 6, 4, 2])
    assert "infinity_points" in bad.failed() and "infinity_profile" in bad.failed()


def test_check_dict():
    assert Check("x", 1, 2).as_dict() == {"name": "x", "lhs": 1, "rhs": 2, "pass": False}
