import json
import shutil
import subprocess
import sys

import pytest

from gsds.cli import RunConfig, UsageError, dumps, main, run_pipeline

CIRCLE = "x^2 + y^2 - 1"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("d1, d2, want", [
    (2, 2, {"degree": 8, "cusps": 12, "nodes": 4, "genus": 1, "chi_C": -8, "chi_Cprime": -12}),
    (2, 3, {"degree": 18, "cusps": 36, "nodes": 60, "genus": 7, "chi_C": -30, "chi_Cprime": -90}),
])
def test_invariants(capsys, d1, d2, want):
    code, out, _ = run(capsys, "invariants", str(d1), str(d2))
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == 1
    assert {k: data[k] for k in want} == want


def test_invariants_low_degree(capsys):
    code, _, err = run(capsys, "invariants", "1", "2")
    assert code == 2 and "degrees" in err


def test_dumps_float_format():
    text = dumps({"a": 0.1, "b": [1, 2.5], "c": {"d": 1 / 3}, "z": 1 + 2j})
    assert '"a": 0.10000000000000001' in text
    assert '"d": 0.33333333333333331' in text
    assert json.loads(text)["z"] == [1.0, 2.0]


@pytest.fixture(scope="module")
def run_dirs(tmp_path_factory):
    """Two identical runs of the circle pair (seed 7) into separate directories."""
    dirs = []
    for k in range(2):
        d = tmp_path_factory.mktemp(f"run{k}")
        code = main(["run", "--X", CIRCLE, "--seed", "7", "--out", str(d)])
        dirs.append((code, d))
    return dirs


def test_run_passes(run_dirs):
    code, d = run_dirs[0]
    assert code == 0
    report = json.loads((d / "invariant_report.json").read_text())
    assert report["verdict"] == "pass" and report["schema"] == 1
    assert report["seed"] == 7 and report["config"]["X"] == CIRCLE
    assert report["computed"] == {"degree": 8, "cusps": 12, "nodes": 4, "cusps_direct": 12}
    assert report["node_preimages"] == [2, 2, 2, 2]
    assert report["fiber_counts"] == [4] * 10
    curve = json.loads((d / "implicit_curve.json").read_text())
    assert curve["degree"] == 8 and curve["kind"] == "implicit_curve"
    solve = json.loads((d / "solve_report.json").read_text())
    assert solve["n_cusps"] == 12 and solve["n_nodes"] == 4


def test_run_byte_identical(run_dirs):
    (_, a), (_, b) = run_dirs
    for name in ("implicit_curve.json", "solve_report.json", "invariant_report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_cuspidal_cubic(capsys):
    code, _, err = run(capsys, "run", "--X", "y^2 - x^3", "--seed", "7")
    assert code == 3 and "G1" in err


def test_run_tampered_dedup(capsys):
    code, out, err = run(capsys, "run", "--X", CIRCLE, "--seed", "7", "--tol-dedup", "10.0")
    assert code == 5
    assert "cusps" in json.loads(out)["failed"]
    assert "count mismatch" in err


def test_run_linear_curve_is_usage_error(capsys):
    code, _, err = run(capsys, "run", "--X", "x + y")
    assert code == 2


def test_run_budget_fallback(capsys):
    code, out, _ = run(capsys, "run", "--X", CIRCLE, "--seed", "7", "--max-terms", "5")
    report = json.loads(out)
    assert code == 0
    assert report["scope"] == "out of desk-scale reach"
    assert report["elimination"]["status"] == "budget exceeded"
    assert report["computed"]["degree"] == 8 and report["computed"]["cusps_direct"] == 12
    assert report["computed"]["nodes"] is None


def test_run_budget_no_fallback(capsys):
    code, _, err = run(capsys, "run", "--X", CIRCLE, "--seed", "7", "--max-terms", "5",
                       "--no-fallback")
    assert code == 4 and "budget" in err


def test_curve_file(tmp_path, capsys):
    f = tmp_path / "curves.txt"
    f.write_text("# circle and ellipse\nx^2 + y^2 - 1\nx^2 + 4*y^2 - 1\n")
    out = tmp_path / "curve.json"
    code, _, _ = run(capsys, "eliminate", "--curves", str(f), "--seed", "3", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["degree"] == 8
    assert data["problem"]["g"] == "z^2 + 4*w^2 - 1"


def test_inline_and_file_conflict(tmp_path, capsys):
    f = tmp_path / "c.txt"
    f.write_text(CIRCLE + "\n")
    code, _, err = run(capsys, "eliminate", "--curves", str(f), "--X", CIRCLE)
    assert code == 2


def test_quad_and_pair_conflict(capsys):
    code, _, err = run(capsys, "eliminate", "--X", CIRCLE, "--quad", "1", "2", "3", "4",
                       "--H", "1.1", "0.1", "-0.2", "0.9")
    assert code == 2


def test_nonpositive_tolerance(capsys):
    code, _, err = run(capsys, "run", "--X", CIRCLE, "--tol-residual", "0")
    assert code == 2 and "tol_residual" in err


def test_explicit_quadruple_identity_fails(capsys):
    code, _, err = run(capsys, "eliminate", "--X", CIRCLE, "--quad", "1", "0", "0", "1")
    assert code == 3 and "G4" in err


@pytest.mark.parametrize("fmt", ["svg", "csv", "json"])
def test_trace_formats(tmp_path, capsys, fmt):
    out = tmp_path / f"trace.{fmt}"
    code, _, _ = run(capsys, "trace", "--X", CIRCLE, "--H", "1.1", "0.1", "-0.2", "0.9",
                     "--resolution", "128", "--format", fmt, "--out", str(out))
    assert code == 0
    text = out.read_text()
    if fmt == "svg":
        assert text.count('class="cusp"') == 4
    elif fmt == "csv":
        assert text.splitlines()[0] == "u,v" and len(text.splitlines()) > 50
    else:
        data = json.loads(text)
        assert len(data["real_cusps"]) == 4 and data["schema"] == 1


def test_trace_window(tmp_path, capsys):
    out = tmp_path / "t.json"
    code, _, _ = run(capsys, "trace", "--X", CIRCLE, "--H", "1.1", "0.1", "-0.2", "0.9",
                     "--resolution", "64", "--window", "-0.5", "0.5", "-0.5", "0.5",
                     "--format", "json", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["window"] == [-0.5, 0.5, -0.5, 0.5]


def test_trace_empty_locus(capsys):
    code, _, err = run(capsys, "trace", "--X", "x^2 + y^2 + 1", "--H", "1.1", "0.1", "-0.2",
                       "0.9", "--resolution", "64")
    assert code == 2 and "real points" in err


def test_figure1_high_resolution(tmp_path, capsys):
    code, out, _ = run(capsys, "figure1", "--resolution", "1024", "--out", str(tmp_path))
    assert code == 0
    data = json.loads(out)
    assert data["curves"]["circle"]["real_cusps"] == 4
    assert data["curves"]["hyperbola"]["real_cusps"] == 2
    assert (tmp_path / "gsds_circle.svg").exists() and (tmp_path / "gsds_hyperbola.svg").exists()


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(X=CIRCLE, Y=CIRCLE, mode="other").validate()
    with pytest.raises(UsageError):
        RunConfig(X=CIRCLE, Y=CIRCLE, window=(1, 0, 0, 1)).validate()


def test_pair_and_sampled_modes_agree():
    """Counts are generic invariants: explicit pair and seeded quadruples give the same."""
    counts = []
    pair = RunConfig(X=CIRCLE, Y=CIRCLE, mode="explicit-affine-pair",
                     H=("1.1", "0.1", "-0.2", "0.9"), n_fibers=2)
    for config in [pair] + [RunConfig(X=CIRCLE, Y=CIRCLE, seed=s, n_fibers=2) for s in (1, 2, 3)]:
        res = run_pipeline(config)
        assert res.exit_code == 0
        c = res.report["computed"]
        counts.append((c["degree"], c["cusps"], c["nodes"]))
    assert set(counts) == {(8, 12, 4)}


@pytest.mark.skipif(shutil.which("gsds") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["gsds", "invariants", "3", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["nodes"] == 360


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "gsds.cli", "invariants", "1", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 2


def test_run_solve_degree_cap(tmp_path, capsys):
    code, out, _ = run(capsys, "run", "--X", CIRCLE, "--seed", "7", "--max-solve-degree", "6",
                       "--out", str(tmp_path))
    report = json.loads(out)
    assert code == 0
    assert report["scope"] == "out of desk-scale reach"
    assert report["computed"] == {"degree": 8, "cusps": None, "nodes": None, "cusps_direct": 12}
    assert "infinity_profile" not in report["failed"]
    assert (tmp_path / "implicit_curve.json").exists()
    assert not (tmp_path / "solve_report.json").exists()
