import json

import numpy as np
import pytest

from dkg2d import cli
from dkg2d.report import LemmaReport, loglog_slope, summary_stats


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env-out"))
    return tmp_path


def _cfg(tmp_path, doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_zero_data_simulation(out):
    code = cli.main(["simulate", "--delta", "0", "--n", "16", "--L", "8", "--t-end", "0.5"])
    assert code == cli.EXIT_OK
    d = out / "env-out"
    summ = json.loads((d / "summary.json").read_text())
    assert summ["status"] == "ok" and summ["final"]["charge"] == 0
    assert (d / "psi.snap").exists() and (d / "diagnostics.csv").exists()


def test_blowup_config_reports_guard(out):
    cfg = _cfg(out, {"grid": {"n": 64, "L": 32.0}, "solver": {"t_end": 4.0},
                     "experiment": {"delta": 10.0}})
    code = cli.main(["--config", cfg, "--output", str(out / "o"), "simulate"])
    assert code == cli.EXIT_GUARD
    summ = json.loads((out / "o" / "summary.json").read_text())
    assert summ["status"] == "guard" and summ["guard"]["reason"]


@pytest.mark.parametrize("doc", [{"bogus": 1}, {"grid": {"n": 12}}, {"solver": {"mode": "x"}},
                                 {"experiment": {"nope": 1}}, {"masses": {"m": -1}}])
def test_schema_violations(out, doc):
    assert cli.main(["--config", _cfg(out, doc), "simulate"]) == cli.EXIT_USAGE


def test_malformed_json_and_io(out):
    p = out / "bad.json"
    p.write_text("{not json")
    assert cli.main(["--config", str(p), "simulate"]) == cli.EXIT_USAGE
    assert cli.main(["--config", str(out / "missing.json"), "simulate"]) == cli.EXIT_IO
    assert cli.main(["norms", str(out / "missing.snap")]) == cli.EXIT_IO


def test_usage_errors(out):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["verify", "nonsense"]) == cli.EXIT_USAGE
    assert cli.main(["scatter", "--deltas", "1e-3"]) == cli.EXIT_USAGE
    assert cli.main(["scatter", "--deltas", "1e-3,-2"]) == cli.EXIT_USAGE
    assert cli.main(["--bogus-flag", "simulate"]) == cli.EXIT_USAGE


def test_flags_override_config(out):
    cfg = cli.build_config("simulate", {"grid": {"n": 32}, "seed": 4},
                           {"grid": {"n": 16}, "experiment": {"delta": 0.5}})
    assert cfg["grid"]["n"] == 16 and cfg["seed"] == 4 and cfg["experiment"]["delta"] == 0.5


def test_deterministic_output(out):
    args = ["simulate", "--delta", "0.01", "--n", "16", "--L", "8", "--t-end", "0.5"]
    cli.main(["--output", str(out / "a")] + args)
    cli.main(["--output", str(out / "b")] + args)
    for f in ("summary.json", "diagnostics.csv", "psi.snap"):
        assert (out / "a" / f).read_bytes() == (out / "b" / f).read_bytes()
    meta = json.loads((out / "a" / "summary.meta.json").read_text())
    assert "runtime_s" in meta and "finished" in meta


def test_linear_scatter_and_plots(out):
    code = cli.main(["--output", str(out / "s"), "--plots", "scatter", "--linear",
                     "--n", "16", "--L", "16", "--t-end", "1"])
    assert code == cli.EXIT_OK
    rep = json.loads((out / "s" / "scatter.json").read_text())
    assert max(rep["deviations"]) < 1e-10 and rep["slope"] is None


def test_scatter_slope(out):
    code = cli.main(["--output", str(out / "s"), "--plots", "scatter", "--n", "32", "--L", "32",
                     "--t-end", "2", "--envelope", "3"])
    assert code == cli.EXIT_OK
    assert (out / "s" / "scatter.svg").read_text().startswith("<?xml")


def test_verify_resonance_modes(out):
    small = _cfg(out, {"experiment": {"sample_count": 20000}})
    assert cli.main(["--config", small, "verify", "resonance"]) == cli.EXIT_OK
    assert cli.main(["--config", small, "verify", "resonance", "--M", "0.4"]) == cli.EXIT_FAIL
    assert cli.main(["--config", small, "verify", "resonance", "--M", "0.4",
                     "--negative-control"]) == cli.EXIT_OK
    doc = json.loads((out / "env-out" / "verify-resonance.json").read_text())
    rep = doc["reports"][0]
    assert set(rep) >= {"lemma", "params", "seed", "n", "stats", "pass"}
    assert "runtime_s" not in rep


def test_verify_nullform(out):
    small = _cfg(out, {"experiment": {"sample_count": 2000}})
    assert cli.main(["--config", small, "verify", "nullform"]) == cli.EXIT_OK
    scaled, same = cli.aligned_massless_product(1000)
    assert scaled <= 1e-15 and same <= 1e-15


def test_norms_command(out):
    cli.main(["--output", str(out / "a"), "simulate", "--delta", "0.01", "--n", "16", "--L", "8",
              "--t-end", "2"])
    assert cli.main(["--output", str(out / "n"), "norms", str(out / "a" / "psi.snap")]) == 0
    res = json.loads((out / "n" / "norms-psi.json").read_text())
    assert res["S"] > 0 and res["Z"] >= res["S"]


# ---------------------------------------------------------------- reports

def test_report_json_schema():
    r = LemmaReport("x", {"a": 1}, 3, 4, np.array([1.0, 2.0, 3.0, 4.0]), 4.0, True, {}, 0.5)
    d = json.loads(r.to_json())
    assert d["stats"]["max"] == 4.0 and d["stats"]["min"] == 1.0 and d["pass"] is True
    assert "runtime_s" not in d
    assert "runtime_s" in r.to_dict(include_runtime=True)
    assert r.to_json() == r.to_json()


def test_summary_helpers():
    s = summary_stats([1.0, 2.0, 3.0])
    assert s["median"] == 2.0
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert np.isclose(loglog_slope(x, 3 * x ** 2), 2.0)
