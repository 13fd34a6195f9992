from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from gsds.eliminate import implicitize
from gsds.scene import AffineMap, AffinePair, PlaneCurve, pair_to_quadruple, sample_problem
from gsds.singular import solve_singular_points

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CIRCLE = "x^2 + y^2 - 1"
# smooth cubic with three distinct points at infinity (passes G1..G3)
CUBIC = "z^3 + 2/3*w^3 - z*w + 1/2*z - w + 1/5"


def curve_pair(fx: str, gy: str):
    return PlaneCurve.parse(fx, ("x", "y")), PlaneCurve.parse(gy, ("z", "w"))


@pytest.fixture(scope="session")
def circle_pair():
    return curve_pair(CIRCLE, CIRCLE)


@pytest.fixture(scope="session")
def conics():
    """Circle x circle with the seed-7 quadruple, eliminated and solved."""
    X, Y = curve_pair(CIRCLE, CIRCLE)
    problem = sample_problem(X, Y, 7)
    curve = implicitize(problem)
    solve = solve_singular_points(curve, degrees=problem.degrees)
    return problem, curve, solve


@pytest.fixture(scope="session")
def conic_cubic():
    X, Y = curve_pair(CIRCLE, CUBIC)
    problem = sample_problem(X, Y, 7)
    curve = implicitize(problem)
    return problem, curve


@pytest.fixture(scope="session")
def conic_cubic_solved(conic_cubic):
    problem, curve = conic_cubic
    solve = solve_singular_points(curve, degrees=problem.degrees, exact_bounds=False)
    return problem, curve, solve


@pytest.fixture(scope="session")
def figure1_problems():
    H = AffineMap.from_values(["1.1", "0.1", "-0.2", "0.9"])
    out = {}
    for name, text in (("circle", CIRCLE), ("hyperbola", "x^2 - y^2 - 1")):
        X = PlaneCurve.parse(text)
        out[name] = pair_to_quadruple(X, X.renamed(("z", "w")), AffinePair(AffineMap.identity(), H))
    return out


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
