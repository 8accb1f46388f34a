import csv
import json
import os

import pytest

from finsler_audit import cli
from finsler_audit.errors import ConfigError

SMALL = """\
[scenario]
name = small-sphere
description = first mode on a coarse sphere reduction
claims = poincare, heat_phi_first

[chart]
kind = sphere
resolution = 128

[functions]
f = cos-theta

[check poincare]
checker = poincare
f = f
K = 1
tol = 1e-3

[check heat]
checker = heat_diagnostics
u = f
T = 0.2
dt = 1e-3
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return str(path)


def _summary(outdir):
    with open(os.path.join(outdir, "summary.csv")) as fh:
        return list(csv.DictReader(fh))


def test_run_writes_all_artifacts(small_cfg, tmp_path, capsys):
    out = str(tmp_path / "out")
    assert cli.main(["run", small_cfg, "--output", out, "--seed", "3"]) == 0
    rows = _summary(out)
    assert [r["claim"] for r in rows] == ["poincare", "heat_phi_first", "heat_phi_second", "heat_mass"]
    assert all(r["pass"] == "pass" for r in rows)
    doc = json.load(open(os.path.join(out, "report.json")))
    assert doc["schema"] == "finsler-audit/1" and doc["seed"] == 3
    files = doc["scenarios"][0]["files"]
    assert "heat_small-sphere_heat.csv" in files
    assert any(f.startswith("field_small-sphere_heat_") for f in files)
    for f in files:
        assert os.path.exists(os.path.join(out, f))
    assert "small-sphere" in capsys.readouterr().out


def test_run_json_output(small_cfg, tmp_path, capsys):
    assert cli.main(["run", small_cfg, "--output", str(tmp_path / "o"), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["failed"] == 0 and len(doc["reports"]) == 4


def test_same_seed_same_summary(small_cfg, tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    cli.main(["run", small_cfg, "--output", a])
    cli.main(["run", small_cfg, "--output", b])
    assert open(os.path.join(a, "summary.csv"), "rb").read() == open(os.path.join(b, "summary.csv"), "rb").read()


def test_empty_checker_list(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("[scenario]\nname = empty\n\n[chart]\nkind = sphere\nresolution = 64\n")
    out = str(tmp_path / "out")
    assert cli.main(["run", str(path), "--output", out]) == 0
    assert _summary(out) == []


def test_failing_check_sets_exit_status(tmp_path):
    # K above the curvature of the sphere: the checker raises, the batch goes on
    text = SMALL.replace("K = 1\ntol = 1e-3", "K = 3\ntol = 0")
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    out = str(tmp_path / "out")
    assert cli.main(["run", str(path), "--output", out]) == 1
    rows = _summary(out)
    assert rows[0]["pass"] == "fail"
    doc = json.load(open(os.path.join(out, "report.json")))
    assert doc["scenarios"][0]["reports"][0]["details"]["error"] == "HypothesisUnverified"


@pytest.mark.parametrize("edit, needle", [
    (("tol = 1e-3", "tol = 1e-3\nspeed = 3"), ":18: [check poincare] speed: unknown key"),
    (("f = f\nK", "f = g\nK"), ":15: [check poincare] f: unresolved function 'g'"),
    (("kind = sphere", "kind = cube"), ":7: [chart] kind: unknown chart kind 'cube'"),
    (("f = cos-theta", "f = cos-theta wobble=2"), "[functions] f: unknown parameter"),
])
def test_config_errors_name_line_and_key(tmp_path, capsys, edit, needle):
    path = tmp_path / "broken.cfg"
    path.write_text(SMALL.replace(*edit))
    assert cli.main(["run", str(path), "--output", str(tmp_path / "o")]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config(tmp_path):
    with pytest.raises(ConfigError):
        cli.load_scenario(tmp_path / "nope.cfg")


def test_list(capsys):
    assert cli.main(["list"]) == 0
    text = capsys.readouterr().out
    for name in ("flat-torus", "randers-torus", "sphere", "gaussian", "randers-gaussian", "volume-line"):
        assert name in text


def test_list_json(capsys):
    assert cli.main(["list", "--json"]) == 0
    cat = json.loads(capsys.readouterr().out)
    assert len(cat) >= 6
    assert all({"name", "claims", "checks", "expected_runtime_s"} <= set(c) for c in cat)


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["list", "--bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_library_functions():
    sc = cli.load_scenario(cli.bundled_scenarios()[0])
    ctx = cli.build_context(sc)
    a = cli.library_function("random-smooth seed=4 modes=2", ctx, 1)
    b = cli.library_function("random-smooth seed=4 modes=2", ctx, 1)
    c = cli.library_function("random-smooth seed=4 modes=2", ctx, 2)
    assert (a == b).all() and not (a == c).all()
    with pytest.raises(ValueError):
        cli.library_function("nonsense", ctx, 0)


def test_jobs_must_be_positive(small_cfg, tmp_path, capsys):
    assert cli.main(["run", small_cfg, "--jobs", "0", "--output", str(tmp_path)]) == 2


def test_svg_plot(small_cfg, tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "svg"
    assert cli.main(["run", small_cfg, "--output", str(out), "--svg"]) == 0
    svg = out / "heat_small-sphere_heat.svg"
    assert svg.exists() and svg.read_text().lstrip().startswith("<?xml")


def _bundled(name):
    return next(p for p in cli.bundled_scenarios() if os.path.basename(p) == f"{name}.cfg")


def test_bundled_sphere_corrected_row(tmp_path):
    out = str(tmp_path / "sphere")
    assert cli.main(["run", _bundled("sphere"), "--output", out]) == 0
    row = next(r for r in _summary(out) if r["claim"] == "poincare_corrected")
    assert float(row["lhs"]) == pytest.approx(1 / 3, rel=0.01)
    assert float(row["rhs"]) == pytest.approx(1 / 2, rel=0.01)


def test_bundled_gaussian_log_sobolev_rows(tmp_path):
    out = str(tmp_path / "gauss")
    assert cli.main(["run", _bundled("gaussian"), "--output", out]) == 0
    rows = [r for r in _summary(out) if r["claim"] == "log_sobolev"]
    assert len(rows) == 2 and all(abs(float(r["margin"])) < 1e-3 for r in rows)
