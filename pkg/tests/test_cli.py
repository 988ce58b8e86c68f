import csv
import json

import pytest

from chaplab.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, FIELD_COLUMNS, RunConfig, _threads, main
from chaplab.errors import ConfigError


def _config(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(kw))
    return str(p)


def _run(tmp_path, cmd, out="out", argv=(), **kw):
    code = main([cmd, "--config", _config(tmp_path, **kw), "--out", str(tmp_path / out), *argv])
    return code, tmp_path / out


def test_validate_cusp(tmp_path, capsys):
    code, out = _run(tmp_path, "validate", scenario="cusp-tanh")
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"assumption_set": "H", "satisfied": True}
    rep = json.loads((out / "validate.json").read_text())
    assert rep["witnesses"]["alpha0"] == pytest.approx(0.0, abs=1e-12)
    assert rep["witnesses"]["beta0"] == pytest.approx(2.0, abs=1e-12)
    assert rep["violations"] == []


def test_validate_degenerate_reports_violation(tmp_path):
    code, out = _run(tmp_path, "validate", scenario="degenerate-linear")
    assert code == EXIT_OK
    rep = json.loads((out / "validate.json").read_text())
    assert not rep["satisfied"]
    assert [v["condition"] for v in rep["violations"]] == ["H5"]


def test_blowup_point(tmp_path, capsys):
    code, out = _run(tmp_path, "blowup", scenario="point-shape")
    assert code == EXIT_OK
    capsys.readouterr()
    rep = json.loads((out / "blowup.json").read_text())
    assert rep["kind"] == "point-shape"
    assert rep["t0"] == pytest.approx(0.7853981633974483, abs=1e-12)
    assert rep["x0"] == pytest.approx(1.0, abs=1e-12)


def test_field_csv_layout(tmp_path):
    code, out = _run(tmp_path, "field", scenario="cusp-tanh", grid_nt=3, grid_nx=5)
    assert code == EXIT_OK
    with open(out / "field.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == FIELD_COLUMNS + ("status",)
    assert len(rows) == 1 + 3 * 5
    for r in rows[1:]:
        if r[-1] == "ok":
            # %.17g round-trips doubles
            assert all(repr(float(v)) == repr(float("%.17g" % float(v))) for v in r[:-1])


def test_field_is_thread_count_independent(tmp_path):
    kw = dict(scenario="cusp-tanh", grid_nt=4, grid_nx=9)
    _run(tmp_path, "field", "a", ["--threads", "1"], **kw)
    _run(tmp_path, "field", "b", ["--threads", "3"], **kw)
    assert (tmp_path / "a" / "field.csv").read_bytes() == (tmp_path / "b" / "field.csv").read_bytes()


def test_envelope_on_point_is_numeric_error(tmp_path, capsys):
    code, _ = _run(tmp_path, "envelope", scenario="point-shape")
    assert code == EXIT_NUMERIC
    assert "cusp" in capsys.readouterr().err


@pytest.mark.parametrize(
    "kw",
    [
        dict(scenario="cusp-tanh", grid_nt=0),
        dict(scenario="cusp-tanh", grid_nx=2.5),
        dict(scenario="cusp-tanh", quad_tol=-1e-12),
        dict(scenario="cusp-tanh", frobnicate=1),
        dict(scenario="no-such-scenario"),
        dict(scenario="cusp-tanh", contact_deltas=[1e-2, 1e-3]),
        dict(scenario="cusp-tanh", x_range=[1.0, 0.0]),
        dict(scenario="cusp-tanh", command="sigma"),
        dict(grid_nt=3),
    ],
)
def test_bad_configs_exit_2(tmp_path, kw, capsys):
    code, _ = _run(tmp_path, "validate", **kw)
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_malformed_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["validate", "--config", str(p)]) == EXIT_CONFIG


def test_run_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown"):
        RunConfig.from_mapping({"scenario": "cusp-tanh", "tolerance": 1e-3})


def test_threads_env(monkeypatch):
    monkeypatch.delenv("CHAPLAB_THREADS", raising=False)
    assert _threads(None) == 1
    monkeypatch.setenv("CHAPLAB_THREADS", "4")
    assert _threads(None) == 4
    assert _threads(2) == 2
    monkeypatch.setenv("CHAPLAB_THREADS", "many")
    with pytest.raises(ConfigError):
        _threads(None)
    with pytest.raises(ConfigError):
        _threads(0)
