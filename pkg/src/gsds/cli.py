"""Command-line entry point: ``gsds invariants|run|eliminate|trace|figure1``.

Exit codes::

    0  success (for ``run``: every check in the invariant report passed)
    1  unexpected internal error
    2  usage error, including curve degree below 2
    3  genericity checks could not be satisfied
    4  elimination failed
    5  measured counts disagree with the closed forms
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .eliminate import (Budget, BudgetExceeded, EliminationError, ImplicitCurve,
                        implicitize, infinity_structure_matches)
from .invariants import Check, assemble_report, expected_invariants
from .polycore import PolyError
from .scene import (X_VARS, Y_VARS, AffineMap, AffinePair, GenericityError, GsdsProblem,
                    PlaneCurve, Quadruple, pair_to_quadruple, problem_from_quadruple,
                    sample_problem)
from .singular import (DEFAULT_DEDUP, DEFAULT_RESIDUAL, DEFAULT_STARTS_FACTOR, NODE,
                       SolveReport, count_cusps_direct, fiber_count, line_section_degree,
                       node_preimages, random_off_curve_points, solve_singular_points)
from .trace import TraceError, build_trace, count_real_cusps, to_csv, to_svg

SCHEMA = 1
EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_GENERICITY, EXIT_ELIMINATION, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5

CIRCLE = "x^2 + y^2 - 1"
HYPERBOLA = "x^2 - y^2 - 1"
FIGURE1_H = ("1.1", "0.1", "-0.2", "0.9")


class UsageError(ValueError):
    pass


# -- JSON with fixed float formatting -------------------------------------------

def _plain(obj: Any) -> Any:
    """Convert numpy scalars, tuples, complex numbers and Fractions to JSON-able values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON: floats at 17 significant digits, keys in insertion order."""
    return _emit(_plain(obj), indent, 0) + "\n"


# -- configuration ----------------------------------------------------------------

@dataclass
class RunConfig:
    X: str
    Y: str
    mode: str = "quadruple-seed"  # or "explicit-affine-pair"
    seed: int = 0
    quad: Optional[Tuple[str, str, str, str]] = None
    G: Optional[Tuple[str, ...]] = None
    H: Optional[Tuple[str, ...]] = None
    tol_dedup: float = DEFAULT_DEDUP
    tol_residual: float = DEFAULT_RESIDUAL
    starts_factor: float = DEFAULT_STARTS_FACTOR
    max_terms: int = 200_000
    max_bits: int = 1_000_000
    time_limit: Optional[float] = None
    fallback: bool = True
    max_solve_degree: int = 18  # larger eliminants skip the singular-point solve
    n_fibers: int = 10
    window: Optional[Tuple[float, float, float, float]] = None
    resolution: int = 512
    out: Optional[str] = None
    formats: List[str] = field(default_factory=lambda: ["json"])

    def validate(self) -> None:
        if self.mode not in ("quadruple-seed", "explicit-affine-pair"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.mode == "explicit-affine-pair" and self.quad is not None:
            raise UsageError("give either a quadruple or an affine pair, not both")
        for name in ("tol_dedup", "tol_residual", "starts_factor", "max_terms", "max_bits",
                     "max_solve_degree", "resolution"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.time_limit is not None and not self.time_limit > 0:
            raise UsageError("time_limit must be positive")
        if self.n_fibers < 0:
            raise UsageError("n_fibers must be non-negative")
        if self.window is not None:
            u0, u1, v0, v1 = self.window
            if not (u0 < u1 and v0 < v1):
                raise UsageError("window must be UMIN UMAX VMIN VMAX with UMIN < UMAX, VMIN < VMAX")

    def as_dict(self) -> Dict[str, Any]:
        # where the files go does not affect the results, so reports stay comparable
        d = asdict(self)
        d.pop("out")
        return d

    @property
    def budget(self) -> Budget:
        return Budget(self.max_terms, self.max_bits, self.time_limit)


def load_curves(config: RunConfig) -> Tuple[PlaneCurve, PlaneCurve]:
    try:
        X = PlaneCurve.parse(config.X, X_VARS)
        Y = PlaneCurve.parse(config.Y, Y_VARS)
    except PolyError as exc:
        raise UsageError(str(exc)) from exc
    return X, Y


def build_problem(config: RunConfig) -> GsdsProblem:
    X, Y = load_curves(config)
    if config.mode == "explicit-affine-pair":
        G = AffineMap.from_values(config.G) if config.G else AffineMap.identity()
        H = AffineMap.from_values(config.H) if config.H else AffineMap.identity()
        return pair_to_quadruple(X, Y, AffinePair(G, H))
    if config.quad is not None:
        quad = Quadruple(*(Fraction(q) for q in config.quad))
        return problem_from_quadruple(X, Y, quad, seed=config.seed)
    return sample_problem(X, Y, config.seed)


def _header(kind: str, config: RunConfig, problem: Optional[GsdsProblem] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {"schema": SCHEMA, "kind": kind, "version": __version__,
                           "seed": config.seed, "config": config.as_dict()}
    if problem is not None:
        out["problem"] = problem.describe()
    return out


# -- pipeline ---------------------------------------------------------------------

@dataclass
class RunResult:
    exit_code: int
    report: Dict[str, Any]
    curve: Optional[Dict[str, Any]] = None
    solve: Optional[Dict[str, Any]] = None


def _fallback(problem: GsdsProblem, config: RunConfig, exc: EliminationError) -> Dict[str, Any]:
    """Checks that need no eliminant: degree by line sections, cusps on ``C``."""
    d1, d2 = problem.degrees
    degree, deg_info = line_section_degree(problem, seed=config.seed)
    cusps = count_cusps_direct(problem, seed=config.seed, tol_dedup=config.tol_dedup)
    report = assemble_report(d1, d2, degree=degree, cusps_direct=cusps,
                             resample_count=problem.retries,
                             notes=["elimination is out of desk-scale reach: " + str(exc),
                                    "degree measured by intersecting C' with a random line; "
                                    "cusps counted directly on C; nodes not verified"])
    out = report.as_dict()
    out["scope"] = "out of desk-scale reach"
    out["elimination"] = {"status": "budget exceeded", "message": str(exc),
                          "provenance": exc.provenance}
    out["line_section"] = deg_info
    return out


def _partial(problem: GsdsProblem, curve: ImplicitCurve, config: RunConfig, head: Dict[str, Any]
             ) -> Tuple[int, Dict[str, Any]]:
    """Eliminant in hand but too large to solve: degree, infinity and direct cusps only."""
    d1, d2 = problem.degrees
    cusps = count_cusps_direct(problem, seed=config.seed, tol_dedup=config.tol_dedup)
    report = assemble_report(
        d1, d2, degree=curve.degree, cusps_direct=cusps,
        infinity_multiplicities=[m for _, _, m in curve.infinity_points],
        resample_count=problem.retries,
        notes=[f"singular-point solve is out of desk-scale reach: eliminant degree "
               f"{curve.degree} exceeds max_solve_degree {config.max_solve_degree}",
               "cusps counted directly on C; nodes not verified"])
    out = {**head, **report.as_dict(), "scope": "out of desk-scale reach",
           "elimination": {"status": "complete", "degree": curve.degree}}
    return (EXIT_OK if report.verdict else EXIT_MISMATCH), out


def run_pipeline(config: RunConfig) -> RunResult:
    """scene, elimination, singular points, cross-checks and the invariant report."""
    config.validate()
    problem = build_problem(config)
    d1, d2 = problem.degrees
    head = _header("invariant_report", config, problem)
    try:
        curve = implicitize(problem, budget=config.budget, seed=config.seed)
    except BudgetExceeded as exc:
        if not config.fallback:
            raise
        report = {**head, **_fallback(problem, config, exc)}
        code = EXIT_OK if report["verdict"] == "pass" else EXIT_MISMATCH
        return RunResult(code, report)

    curve_out = {**_header("implicit_curve", config, problem), **curve.as_dict()}
    if curve.degree > config.max_solve_degree:
        return RunResult(*_partial(problem, curve, config, head), curve=curve_out)

    solve = solve_singular_points(curve, degrees=(d1, d2), tol_residual=config.tol_residual,
                                  tol_dedup=config.tol_dedup,
                                  starts_factor=config.starts_factor, seed=config.seed)
    cusps_direct = count_cusps_direct(problem, seed=config.seed, tol_dedup=config.tol_dedup)
    nodes = [p for p in solve.points if p.kind == NODE]
    preimages = [node_preimages(problem, p, seed=config.seed) for p in nodes]
    fibers = [fiber_count(problem, tuple(pt), curve=curve, seed=config.seed)
              for pt in random_off_curve_points(curve, config.n_fibers, seed=config.seed)]
    report = assemble_report(
        d1, d2, degree=curve.degree, cusps=solve.n_cusps, nodes=solve.n_nodes,
        cusps_direct=cusps_direct, node_preimages=preimages, fiber_counts=fibers,
        infinity_multiplicities=[m for _, _, m in curve.infinity_points],
        resample_count=problem.retries)
    report.checks.append(Check("unclassified_points", solve.n_other, 0))
    report.checks.append(Check("residual_ok", int(bool(solve.diagnostics["residual_ok"])), 1))
    report.checks.append(Check("infinity_structure",
                               int(infinity_structure_matches(curve, problem)), 1))
    out = {**head, **report.as_dict(), "scope": "full",
           "node_preimages": preimages, "fiber_counts": fibers,
           "real_cusps": count_real_cusps(solve)}
    code = EXIT_OK if report.verdict else EXIT_MISMATCH
    return RunResult(code, out,
                     curve=curve_out,
                     solve={**_header("solve_report", config, problem), **solve.as_dict()})


def figure1(resolution: int = 512, out: Optional[str] = None, seed: int = 0
            ) -> Dict[str, Any]:
    """Figure 1 pictures; returns the real cusp counts and writes SVGs if ``out`` is set."""
    H = AffineMap.from_values(FIGURE1_H)
    summary: Dict[str, Any] = {"schema": SCHEMA, "kind": "figure1", "seed": seed,
                               "resolution": resolution, "H": list(FIGURE1_H), "curves": {}}
    for name, text in (("circle", CIRCLE), ("hyperbola", HYPERBOLA)):
        X = PlaneCurve.parse(text, X_VARS)
        problem = pair_to_quadruple(X, X.renamed(Y_VARS), AffinePair(AffineMap.identity(), H))
        curve = implicitize(problem, seed=seed)
        solve = solve_singular_points(curve, degrees=problem.degrees, seed=seed)
        trace = build_trace(problem, curve, solve, resolution=resolution)
        entry = {"f": text, "real_cusps": count_real_cusps(solve),
                 "cusps": solve.n_cusps, "nodes": solve.n_nodes,
                 "cusp_locations": trace.real_cusps, "window": list(trace.window)}
        if out is not None:
            path = Path(out) / f"gsds_{name}.svg"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(to_svg(trace, title=f"GSDS of {text}"))
            entry["svg"] = str(path)
        summary["curves"][name] = entry
    return summary


# -- argument parsing ---------------------------------------------------------------

def _add_curve_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("curves")
    g.add_argument("--X", dest="X", help="polynomial of X in x, y (e.g. 'x^2+y^2-1')")
    g.add_argument("--Y", dest="Y", help="polynomial of Y (defaults to X)")
    g.add_argument("--curves", help="file with one polynomial per line: X, then optionally Y")
    m = p.add_argument_group("position")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--quad", nargs=4, metavar=("A", "B", "C", "D"),
                   help="explicit quadruple instead of a seeded draw")
    m.add_argument("--G", nargs="+", metavar="V", help="affine map G: 4 (linear) or 6 values")
    m.add_argument("--H", nargs="+", metavar="V", help="affine map H: 4 (linear) or 6 values")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    s = p.add_argument_group("solver")
    s.add_argument("--tol-dedup", type=float, default=DEFAULT_DEDUP)
    s.add_argument("--tol-residual", type=float, default=DEFAULT_RESIDUAL)
    s.add_argument("--starts-factor", type=float, default=DEFAULT_STARTS_FACTOR)
    s.add_argument("--max-terms", type=int, default=200_000)
    s.add_argument("--max-bits", type=int, default=1_000_000)
    s.add_argument("--time-limit", type=float, default=None,
                   help="seconds allowed for elimination")
    s.add_argument("--no-fallback", action="store_true",
                   help="exit 4 instead of reporting eliminant-free checks when the budget is hit")
    s.add_argument("--max-solve-degree", type=int, default=18,
                   help="largest eliminant degree handed to the singular-point solver")
    s.add_argument("--fibers", type=int, default=10, help="off-curve points for fiber counts")


def _add_output_args(p: argparse.ArgumentParser, formats: Sequence[str]) -> None:
    o = p.add_argument_group("output")
    o.add_argument("--window", nargs=4, type=float, metavar=("UMIN", "UMAX", "VMIN", "VMAX"))
    o.add_argument("--resolution", type=int, default=512)
    o.add_argument("--out", help="output directory (run, figure1) or file (eliminate, trace)")
    o.add_argument("--format", choices=list(formats), default=formats[0])


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", help="closed-form invariants for degrees d1, d2")
    p.add_argument("d1", type=int)
    p.add_argument("d2", type=int)

    for name, help_, formats in (
            ("run", "full pipeline with invariant report", ("json",)),
            ("eliminate", "eliminate to the implicit curve P(u, v)", ("json",)),
            ("trace", "real picture of the caustic", ("svg", "csv", "json"))):
        p = sub.add_parser(name, help=help_)
        _add_curve_args(p)
        _add_solver_args(p)
        _add_output_args(p, formats)

    p = sub.add_parser("figure1", help="circle and hyperbola pictures with real cusps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out", default=".", help="directory for the two SVG files")
    p.add_argument("--format", choices=["svg"], default="svg")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.curves and (args.X or args.Y):
        raise UsageError("give curves inline (--X/--Y) or by file (--curves), not both")
    if args.curves:
        lines = [ln.strip() for ln in Path(args.curves).read_text().splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not 1 <= len(lines) <= 2:
            raise UsageError("curve file must hold one or two polynomials")
        X, Y = lines[0], lines[-1]
    elif args.X:
        X, Y = args.X, args.Y or args.X
    else:
        raise UsageError("no curve given (use --X or --curves)")
    affine = args.G is not None or args.H is not None
    for name in ("G", "H"):
        vals = getattr(args, name)
        if vals is not None and len(vals) not in (4, 6):
            raise UsageError(f"--{name} takes 4 or 6 values")
    config = RunConfig(
        X=X, Y=Y, mode="explicit-affine-pair" if affine else "quadruple-seed",
        seed=args.seed, quad=tuple(args.quad) if args.quad else None,
        G=tuple(args.G) if args.G else None, H=tuple(args.H) if args.H else None,
        tol_dedup=args.tol_dedup, tol_residual=args.tol_residual,
        starts_factor=args.starts_factor, max_terms=args.max_terms, max_bits=args.max_bits,
        time_limit=args.time_limit, fallback=not args.no_fallback,
        max_solve_degree=args.max_solve_degree, n_fibers=args.fibers,
        window=tuple(args.window) if args.window else None, resolution=args.resolution,
        out=args.out, formats=[args.format])
    config.validate()
    return config


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def cmd_invariants(args) -> int:
    try:
        inv = expected_invariants(args.d1, args.d2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(dumps({"schema": SCHEMA, "kind": "invariants", "d1": args.d1,
                            "d2": args.d2, **inv.as_dict()}))
    return EXIT_OK


def cmd_run(args) -> int:
    config = config_from_args(args)
    result = run_pipeline(config)
    if config.out is not None:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        if result.curve is not None:
            (out / "implicit_curve.json").write_text(dumps(result.curve))
        if result.solve is not None:
            (out / "solve_report.json").write_text(dumps(result.solve))
        (out / "invariant_report.json").write_text(dumps(result.report))
    sys.stdout.write(dumps(result.report))
    if result.exit_code == EXIT_MISMATCH:
        print("count mismatch: " + ", ".join(result.report["failed"]), file=sys.stderr)
    return result.exit_code


def cmd_eliminate(args) -> int:
    config = config_from_args(args)
    problem = build_problem(config)
    curve = implicitize(problem, budget=config.budget, seed=config.seed)
    _write(dumps({**_header("implicit_curve", config, problem), **curve.as_dict()}), config.out)
    return EXIT_OK


def cmd_trace(args) -> int:
    config = config_from_args(args)
    problem = build_problem(config)
    curve = implicitize(problem, budget=config.budget, seed=config.seed)
    solve = solve_singular_points(curve, degrees=problem.degrees, seed=config.seed,
                                  tol_dedup=config.tol_dedup, tol_residual=config.tol_residual,
                                  starts_factor=config.starts_factor)
    trace = build_trace(problem, curve, solve, resolution=config.resolution, window=config.window)
    fmt = config.formats[0]
    if fmt == "svg":
        text = to_svg(trace)
    elif fmt == "csv":
        text = to_csv(trace.midpoint_samples)
    else:
        text = dumps({**_header("trace", config, problem), "window": trace.window,
                      "real_cusps": trace.real_cusps,
                      "midpoint_samples": trace.midpoint_samples,
                      "contour_polylines": trace.contour_polylines})
    _write(text, config.out)
    return EXIT_OK


def cmd_figure1(args) -> int:
    if args.resolution <= 0:
        raise UsageError("resolution must be positive")
    summary = figure1(args.resolution, args.out, args.seed)
    sys.stdout.write(dumps(summary))
    return EXIT_OK


COMMANDS = {"invariants": cmd_invariants, "run": cmd_run, "eliminate": cmd_eliminate,
            "trace": cmd_trace, "figure1": cmd_figure1}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gsds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenericityError as exc:
        print(f"gsds: genericity: {exc} [failed: {', '.join(exc.failed)}]", file=sys.stderr)
        return EXIT_GENERICITY
    except EliminationError as exc:
        print(f"gsds: elimination: {exc}", file=sys.stderr)
        return EXIT_ELIMINATION
    except TraceError as exc:
        print(f"gsds: trace: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
