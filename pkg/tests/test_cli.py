import csv
import json
import math

import pytest

from specwave import analytics
from specwave.cli import main

PI2 = math.pi**2

LAPLACE_KEYS = {"c": PI2, "p": 2.0, "delta": 0.0, "T": 1.0}


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_exact_happy_path(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", {**LAPLACE_KEYS, "levels": list(range(1, 9))})
    out = tmp_path / "out"
    assert main(["exact", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "exact.csv")
    assert len(rows) == 8
    first = rows[0]
    assert float(first["gap"]) == pytest.approx(1 / 6 - 1 / PI2, rel=1e-9)
    assert float(first["bound_delta"]) == pytest.approx(1 / (2 * PI2), rel=1e-12)
    assert first["bound_delta_ok"] == "true"
    assert first["bound_inf_ok"] == "true"
    assert first["bound_exp_1_ok"] == "true"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "exact"
    assert "exact.csv" in manifest["outputs"]


@pytest.mark.parametrize(
    "payload",
    [
        {**LAPLACE_KEYS, "levels": []},
        {**LAPLACE_KEYS},
        {"c": 1.0, "p": 2.0, "delta": 0.25, "T": 1.0, "levels": [1]},
        {"c": PI2, "T": 1.0, "levels": [1]},
    ],
)
def test_exact_config_errors_exit_2(tmp_path, payload, capsys):
    cfg = write_config(tmp_path, "cfg.json", payload)
    assert main(["exact", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_exact_boundary_delta_names_invariant(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "cfg.json", {"c": 1.0, "p": 2.0, "delta": 0.25, "T": 1.0, "levels": [1]}
    )
    assert main(["exact", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "delta" in capsys.readouterr().err


def _mc_config(**extra):
    cfg = {
        **LAPLACE_KEYS,
        "levels": [2, 4],
        "num_samples": 4000,
        "seed": 99,
        "reference_level": 64,
        "test_function": "norm_sq",
    }
    cfg.update(extra)
    return cfg


def test_mc_happy_path_and_determinism(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", _mc_config())
    out1, out2, out3 = (tmp_path / n for n in ("o1", "o2", "o3"))
    assert main(["mc", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["mc", "--config", cfg, "--out", str(out2)]) == 0
    assert main(["mc", "--config", cfg, "--out", str(out3), "--threads", "4"]) == 0
    payload = (out1 / "mc.csv").read_bytes()
    assert payload == (out2 / "mc.csv").read_bytes()
    assert payload == (out3 / "mc.csv").read_bytes()
    rows = read_rows(out1 / "mc.csv")
    assert all(r["certified"] == "true" for r in rows)
    assert float(rows[0]["exact_value"]) > 0


def test_mc_rerun_from_manifest(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", _mc_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["mc", "--config", cfg, "--out", str(out1)]) == 0
    manifest = out1 / "manifest.json"
    assert main(["mc", "--config", str(manifest), "--out", str(out2)]) == 0
    assert (out1 / "mc.csv").read_bytes() == (out2 / "mc.csv").read_bytes()


def test_mc_bad_sample_count_exit_2(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", _mc_config(num_samples=1))
    assert main(["mc", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_mc_seed_override_changes_output(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", _mc_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["mc", "--config", cfg, "--out", str(out1), "--seed", "1"]) == 0
    assert main(["mc", "--config", cfg, "--out", str(out2), "--seed", "2"]) == 0
    assert (out1 / "mc.csv").read_bytes() != (out2 / "mc.csv").read_bytes()
    assert json.loads((out1 / "manifest.json").read_text())["seed"] == 1


def test_rates_exact_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        "cfg.json",
        {**LAPLACE_KEYS, "levels": [16, 32, 64, 128, 256], "errors": "exact"},
    )
    out = tmp_path / "out"
    assert main(["rates", "--config", cfg, "--out", str(out), "--plot"]) == 0
    payload = json.loads((out / "rates.json").read_text())
    assert payload["slope_ok"] is True
    assert payload["r_squared"] > 0.999
    assert payload["slope_level"] == pytest.approx(-1.0, abs=0.05)
    assert payload["sandwich"]["c_low"] > 0
    assert (out / "rates.svg").exists()


def test_rates_mc_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        "cfg.json",
        {
            **LAPLACE_KEYS,
            "levels": [4, 8, 16, 32],
            "errors": "mc",
            "num_samples": 4000,
            "seed": 3,
            "reference_level": 512,
            "slope_tolerance": 0.3,
        },
    )
    out = tmp_path / "out"
    assert main(["rates", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "rates.csv")
    assert all(float(r["tolerance"]) > 0 for r in rows)


def test_rates_missing_levels_exit_2(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", {**LAPLACE_KEYS, "errors": "exact"})
    assert main(["rates", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_rates_tight_tolerance_exit_3(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "cfg.json",
        {**LAPLACE_KEYS, "levels": [16, 32, 64], "errors": "exact", "slope_tolerance": 1e-6},
    )
    out = tmp_path / "o"
    assert main(["rates", "--config", cfg, "--out", str(out)]) == 3
    assert "certification failure" in capsys.readouterr().err
    assert (out / "rates.csv").exists()  # reports are still written
    assert (out / "manifest.json").exists()


def _oracle_config(**extra):
    cfg = {
        "c": 1.0,
        "p": 2.0,
        "delta": 0.0,
        "T": 1.0,
        "quadrature_steps": 4096,
        "num_paths": 4000,
        "modes": [1],
        "seed": 5,
    }
    cfg.update(extra)
    return cfg


def test_oracle_happy_path(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", _oracle_config())
    out = tmp_path / "out"
    assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "oracle.csv")
    assert {r["statistic"] for r in rows} == {"var1", "var2", "cov"}
    assert all(r["ok"] == "true" for r in rows)


def test_oracle_single_step_flags_discrepancy(tmp_path):
    # K = 1 is the documented demonstration mode: the bias is far beyond 4 SE
    cfg = write_config(tmp_path, "cfg.json", _oracle_config(quadrature_steps=1))
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_oracle_zero_paths_exit_2(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", _oracle_config(num_paths=0))
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_numeric_fault_exit_4(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise analytics.NumericFaultError("injected")

    monkeypatch.setattr(analytics, "total_second_moment", boom)
    cfg = write_config(tmp_path, "cfg.json", {**LAPLACE_KEYS, "levels": [1]})
    assert main(["exact", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


def test_config_via_eta_key(tmp_path):
    cfg = write_config(
        tmp_path, "cfg.json", {"eta": 0.5, "c": PI2, "T": 1.0, "levels": [1, 2]}
    )
    assert main(["exact", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
