import csv
import json

import numpy as np
import pytest

from lagflow.cli import run


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_unknown_flag_is_usage_error(capsys):
    assert run(["modes", "--bogus"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("lagflow: error=UsageError reason=")
    assert err.count("\n") == 1


def test_missing_subcommand():
    assert run([]) == 2


def test_modes_csv(tmp_path):
    out = tmp_path / "modes.csv"
    assert run(["modes", "--kmax", "3", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 8
    mu01 = [r for r in rows if r["j"] == "0" and r["k"] == "1"][0]
    assert float(mu01["eigenvalue"]) == np.tanh(1.0)
    # 17 significant digits
    assert mu01["eigenvalue"] == format(np.tanh(1.0), ".17g")


def _cauchy_config(tmp_path, f0, g0, lstar=None):
    cfg = {"domain": {"l1": np.pi, "l2": 1.0}, "variant": "neumann", "N": len(f0) - 1, "f0": f0, "g0": g0}
    if lstar is not None:
        cfg["domain"]["lstar"] = lstar
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def test_cauchy_compatible(tmp_path):
    f0 = [0.0, 1.0, 0.5]
    g0 = [0.0, np.tanh(1.0), 0.5 * 2 * np.tanh(2.0)]
    out = tmp_path / "field.json"
    assert run(["cauchy", "--config", str(_cauchy_config(tmp_path, f0, g0)), "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["verdict"] == "CompatibleAtTruncation"
    assert max(abs(c) for c in d["coeffs1"]) < 1e-12


def test_cauchy_divergent_exits_1(tmp_path, capsys):
    f0 = [0.0] + [1.0 / k**2 for k in range(1, 21)]
    out = tmp_path / "field.json"
    assert run(["cauchy", "--config", str(_cauchy_config(tmp_path, f0, [0.0] * 21)), "--out", str(out)]) == 1
    assert "error=ComputationFailed" in capsys.readouterr().err
    assert out.exists()


def test_design(tmp_path):
    target = tmp_path / "t.csv"
    target.write_text("k,a_k\n3,1.0\n")
    out = tmp_path / "control.json"
    assert run(["design", "--target", str(target), "--lstar", "0.5", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["dropped"] == []
    assert run(["design", "--target", str(target), "--lstar", "1.5", "--l2", "1.0"]) == 2


def test_diagnose(tmp_path):
    cfg = _cauchy_config(tmp_path, [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], lstar=0.5)
    out = tmp_path / "diag.csv"
    assert run(["diagnose", "--config", str(cfg), "--out", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["k", "amplification", "clcns_partial_sum"]
    assert len(rows) == 3


def test_disk_control(tmp_path):
    target = tmp_path / "h.csv"
    target.write_text("k_sin_or_cos,k,value\ncos,1,1.0\n")
    out = tmp_path / "control.json"
    res = tmp_path / "res.csv"
    argv = ["disk-control", "--K", "8", "--K-control", "8,16", "--target", str(target), "--out", str(out)]
    assert run(argv + ["--residuals", str(res)]) == 0
    r = [float(x["weighted_residual"]) for x in _rows(res)]
    assert r[1] <= r[0]
    bad = tmp_path / "bad.csv"
    bad.write_text("k_sin_or_cos,k,value\ntan,1,1.0\n")
    assert run(["disk-control", "--K", "8", "--target", str(bad)]) == 2


def test_runge(tmp_path):
    out = tmp_path / "r.json"
    assert run(["runge", "--function", "rational:3", "--poles", "3", "--eps", "1e-12", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["poles"][0]["re"] == 3.0
    assert d["validated_error"] <= 1e-12
    assert run(["runge", "--function", "sin"]) == 2


def test_runge_file_samples(tmp_path):
    z = 0.8 * np.exp(1j * np.linspace(0, 2 * np.pi, 200, endpoint=False))
    z = np.concatenate([z, 0.4 * z])
    w = np.exp(z)
    p = tmp_path / "s.csv"
    p.write_text("x,y,re,im\n" + "".join(f"{a.real:.17g},{a.imag:.17g},{b.real:.17g},{b.imag:.17g}\n" for a, b in zip(z, w)))
    out = tmp_path / "r.json"
    assert run(["runge", "--function", f"file:{p}", "--eps", "1e-8", "--out", str(out)]) == 0


def test_blend(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["blend", "--nodes", "4", "--samples", "101", "--out", str(out)]) == 0
    rows = _rows(out)
    s = [sum(float(r[f"phi_{j}"]) for j in range(1, 5)) for r in rows]
    assert max(abs(x - 1) for x in s) <= 1e-12
    assert run(["blend", "--nodes", "0.2,0.8", "--kappa", "0.1"]) == 2


def test_flow(tmp_path):
    th = 2 * np.pi * np.arange(64) / 64
    curve = tmp_path / "c.csv"
    curve.write_text("x,y\n" + "".join(f"{0.5 * np.cos(t):.17g},{0.5 * np.sin(t):.17g}\n" for t in th))
    outdir = tmp_path / "out"
    argv = ["flow", "--curve", str(curve), "--builtin", "rotation", "--t1", "1.0", "--steps", "100"]
    assert run(argv + ["--snapshots", "4", "--target", str(curve), "--outdir", str(outdir)]) == 0
    assert sorted(p.name for p in outdir.iterdir()) == [f"curve_t{i}.csv" for i in range(5)] + ["metrics.csv"]
    m = _rows(outdir / "metrics.csv")
    assert len(m) == 5 and float(m[0]["distance_to_target"]) == 0.0
    assert run(["flow", "--curve", str(curve)]) == 2


def test_flow_field_json(tmp_path):
    th = 2 * np.pi * np.arange(64) / 64
    curve = tmp_path / "c.csv"
    curve.write_text("x,y\n" + "".join(f"{1.5 + 0.2 * np.cos(t):.17g},{0.5 + 0.2 * np.sin(t):.17g}\n" for t in th))
    field = tmp_path / "f.json"
    field.write_text(json.dumps({"coeffs0": [0, 0.1], "coeffs1": [0, 0], "domain": {"l1": np.pi, "l2": 1.0}}))
    assert run(["flow", "--curve", str(curve), "--field", str(field), "--outdir", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("case", ["mixed", "cauchy", "disk-lambda1", "disk-lambda2", "duality"])
def test_verify_cases(case, capsys):
    assert run(["verify", "--case", case]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(line.startswith("PASS ") for line in lines)


def test_seed_env_override(monkeypatch, capsys):
    monkeypatch.setenv("LAGFLOW_SEED", "5")
    run(["verify", "--case", "duality", "--seed", "1"])
    a = capsys.readouterr().out
    monkeypatch.delenv("LAGFLOW_SEED")
    run(["verify", "--case", "duality", "--seed", "5"])
    assert capsys.readouterr().out == a
