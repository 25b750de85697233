import json
import os
import pathlib
import subprocess

import pytest

CLI = os.environ.get("DISPERSIM_CLI")
SOURCE = pathlib.Path(os.environ.get("DISPERSIM_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))

pytestmark = pytest.mark.skipif(not CLI, reason="DISPERSIM_CLI not set")

TINY = {
    "base": "paper-5.1",
    "macro": {"nx": 3, "ny": 3, "load_refine": 0},
    "cell": {"n": 12, "holes": [{"type": "ellipse", "center": [0.5, 0.5], "semi_axes": [0.2, 0.15]}]},
    "time": {"T": 0.2, "M": 2},
    "table": {"inner_count": 21, "outer_per_sign": 5},
}


def cli(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=300)


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return path


def test_help_and_usage_errors():
    assert cli("--help").returncode == 0
    assert cli().returncode == 2
    assert cli("frobnicate").returncode == 2
    assert cli("solve", "--no-such-flag").returncode == 2
    assert cli("solve", "--jobs", "-3", "--preset", "paper-5.1").returncode == 2


def test_config_errors_exit_2(tmp_path):
    assert cli("stokes", "--out", tmp_path).returncode == 2
    assert cli("stokes", "--preset", "missing", "--out", tmp_path).returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"macro": ')
    assert cli("solve", "--config", bad, "--out", tmp_path).returncode == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({**TINY, "colour": "blue"}))
    assert cli("solve", "--config", unknown, "--out", tmp_path).returncode == 2


def test_stokes_outputs(tiny, tmp_path):
    out = tmp_path / "s"
    r = cli("stokes", "--config", tiny, "--out", out)
    assert r.returncode == 0, r.stderr
    header = (out / "drift.csv").read_text().splitlines()[0]
    assert header == "x,y,B1,B2"
    vtk = (out / "drift.vtk").read_text()
    assert vtk.startswith("# vtk DataFile Version")
    assert "UNSTRUCTURED_GRID" in vtk
    report = dict(line.split(",", 1) for line in (out / "stokes_report.csv").read_text().splitlines()[1:])
    assert float(report["max_divergence"]) <= 1e-8


def test_table_is_independent_of_jobs(tiny, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli("table", "--config", tiny, "--out", a, "--jobs", "1").returncode == 0
    assert cli("table", "--config", tiny, "--out", b, "--jobs", "3").returncode == 0
    assert (a / "table.csv").read_bytes() == (b / "table.csv").read_bytes()
    lines = (a / "table.csv").read_text().splitlines()
    assert lines[0] == "# dispersim-table v1"
    assert len([line for line in lines if not line.startswith("#")]) == 1 + 21 + 10


def test_solve_outputs_and_overrides(tiny, tmp_path):
    out = tmp_path / "solve"
    r = cli("solve", "--config", tiny, "--out", out)
    assert r.returncode == 0, r.stderr
    summary = dict(line.split(",", 1) for line in (out / "summary.csv").read_text().splitlines()[1:])
    assert summary["scheme"] == "picard"
    assert summary["macro_dofs"] == "16"
    assert len((out / "norms.csv").read_text().splitlines()) == 1 + 3
    r = cli("solve", "--config", tiny, "--out", out, "--scheme", "timestep", "--mode", "direct")
    assert r.returncode == 0, r.stderr
    summary = dict(line.split(",", 1) for line in (out / "summary.csv").read_text().splitlines()[1:])
    assert summary["scheme"] == "timestep"
    assert summary["tensor_mode"] == "direct"
    assert cli("solve", "--config", tiny, "--out", out, "--scheme", "newton").returncode == 2


def test_foreign_table_is_a_runtime_failure_unless_forced(tiny, tmp_path):
    table = tmp_path / "foreign.csv"
    table.write_text("# dispersim-table v1\n# geometry=0000000000000000\np,d11,d12,d21,d22\n0,1,0,0,1\n")
    cfg = tmp_path / "foreign.json"
    cfg.write_text(json.dumps({**TINY, "table": {**TINY["table"], "file": str(table)}}))
    assert cli("solve", "--config", cfg, "--out", tmp_path / "f").returncode == 1
    assert cli("solve", "--config", cfg, "--out", tmp_path / "f", "--force").returncode == 0


def test_mesh_export(tiny, tmp_path):
    out = tmp_path / "m"
    assert cli("mesh-export", "--config", tiny, "--out", out).returncode == 0
    for name in ("macro.mesh2d", "macro.vtk", "cell.mesh2d", "cell.vtk"):
        assert (out / name).stat().st_size > 0


def test_converge_with_small_levels(tmp_path):
    cfg = tmp_path / "study.json"
    cfg.write_text(
        json.dumps(
            {
                **TINY,
                "scheme": "timestep",
                "study": {"axis": "time", "levels": [{"time": {"M": 2}}, {"time": {"M": 4}}, {"time": {"M": 8}}]},
            }
        )
    )
    out = tmp_path / "c"
    r = cli("converge", "--config", cfg, "--out", out)
    assert r.returncode == 0, r.stderr
    assert len((out / "convergence.csv").read_text().splitlines()) == 4
    fit = (out / "convergence_fit.csv").read_text().splitlines()
    assert fit[0] == "axis,slope"
    assert fit[1].startswith("time,")


def test_presets_match_the_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((SOURCE / "docs" / "config.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    presets = sorted((SOURCE / "presets").glob("*.json"))
    assert len(presets) == 6
    for path in presets:
        jsonschema.validate(json.loads(path.read_text()), schema)
