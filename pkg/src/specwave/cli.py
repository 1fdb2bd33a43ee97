"""Command-line entry point: exact tables, Monte Carlo runs, rate fits, oracle checks.

Configs are flat JSON documents; every run writes a manifest that embeds the
effective config, so pointing --config at a manifest reproduces the run.
CSV cells use 17 significant digits ('.' decimal, no separators), enough to
round-trip binary64.

Exit codes: 0 success, 2 configuration/validation error, 3 certification
failure, 4 internal numeric fault.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, analytics, montecarlo, ratefit
from .model import ModelValidationError, SpectralModel
from .sampler import sample_path_oracle_batch
from .streams import RandomStream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CERTIFICATION = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    """Bad or missing configuration."""


class CertificationFailure(RuntimeError):
    """A certified inequality was violated beyond its tolerance."""


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]  # a manifest: rerun from its embedded config
    return data


def _model_from_config(cfg: dict) -> SpectralModel:
    try:
        return SpectralModel.from_dict(cfg)
    except ModelValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _levels_from_config(cfg: dict) -> list[int]:
    levels = cfg.get("levels")
    if not isinstance(levels, list) or not levels:
        raise ConfigError("config key 'levels' must be a non-empty list of integers")
    try:
        out = [int(v) for v in levels]
    except (TypeError, ValueError) as exc:
        raise ConfigError("config key 'levels' must contain integers") from exc
    if any(v < 1 for v in out):
        raise ConfigError("levels must be >= 1")
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: Path, command: str, cfg: dict, outputs: list[str],
                    tolerances: dict, started: str) -> None:
    manifest = {
        "artifact": "specwave",
        "version": __version__,
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed", 0),
        "started": started,
        "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
        "tolerances": tolerances,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_json_report(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_exact(cfg: dict, out_dir: Path) -> int:
    model = _model_from_config(cfg)
    levels = _levels_from_config(cfg)
    header = [
        "N", "lambda_N", "second_moment_N", "gap", "gap_1", "gap_2",
        "bound_delta", "bound_delta_ok", "bound_inf", "bound_inf_ok",
        "exp_lower_1", "bound_exp_1", "bound_exp_1_ok",
        "exp_lower_2", "bound_exp_2", "bound_exp_2_ok",
    ]
    rows = []
    violations = 0
    for N in levels:
        certs = {c.source: c for c in analytics.certify_level(model, N)}
        violations += sum(1 for c in certs.values() if not c.satisfied)
        inf_cert = certs.get("bound_inf")
        row = [
            N,
            float(model.lambda_abs(N)),
            analytics.total_second_moment(model, N),
            certs["bound_delta"].exact_value,
            analytics.gap_exact(model, N, 1),
            analytics.gap_exact(model, N, 2),
            certs["bound_delta"].bound_value,
            certs["bound_delta"].satisfied,
            inf_cert.bound_value if inf_cert else None,
            inf_cert.satisfied if inf_cert else None,
        ]
        for i in (1, 2):
            c = certs[f"bound_exp_{i}"]
            row += [c.exact_value, c.bound_value, c.satisfied]
        rows.append(row)
    _write_csv(out_dir / "exact.csv", header, rows)
    _write_json_report(out_dir / "exact.json", {
        "model": model.to_dict(),
        "rows": [dict(zip(header, row)) for row in rows],
        "violations": violations,
    })
    if violations:
        raise CertificationFailure(f"{violations} analytic bound(s) violated")
    return EXIT_OK


def cmd_mc(cfg: dict, out_dir: Path, threads: int) -> int:
    model = _model_from_config(cfg)
    levels = _levels_from_config(cfg)
    test_function = cfg.get("test_function", "norm_sq")
    if test_function not in montecarlo.TEST_FUNCTIONS:
        raise ConfigError(f"test_function must be one of {montecarlo.TEST_FUNCTIONS}")
    try:
        est_cfg = montecarlo.EstimatorConfig(
            num_samples=int(cfg.get("num_samples", 0)),
            seed=int(cfg.get("seed", 0)),
            reference_level=(int(cfg["reference_level"]) if "reference_level" in cfg else None),
            target_bias_fraction=(float(cfg["target_bias_fraction"])
                                  if "target_bias_fraction" in cfg else None),
            batch_size=int(cfg.get("batch_size", 4096)),
            threads=threads,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if est_cfg.reference_level is None and est_cfg.target_bias_fraction is None:
        raise ConfigError("config needs reference_level or target_bias_fraction")
    header = [
        "N", "lambda_N", "test_function", "mean", "std_error", "num_samples",
        "ci_low_3se", "ci_high_3se", "exact_value", "lower_bound",
        "truncation_bias_bound", "reference_level", "certified",
    ]
    rows = []
    violations = 0
    for N in levels:
        try:
            report = montecarlo.estimate_weak_error_coupled(model, N, test_function, est_cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        est = report.estimate
        certified = est.mean - 3.0 * est.std_error - report.truncation_bias_bound >= report.lower_bound
        if not certified:
            violations += 1
        rows.append([
            N, float(model.lambda_abs(N)), test_function, est.mean, est.std_error, est.n,
            est.mean - 3.0 * est.std_error, est.mean + 3.0 * est.std_error,
            report.exact_value, report.lower_bound, report.truncation_bias_bound,
            report.reference_level, certified,
        ])
    _write_csv(out_dir / "mc.csv", header, rows)
    _write_json_report(out_dir / "mc.json", {
        "model": model.to_dict(),
        "test_function": test_function,
        "num_samples": est_cfg.num_samples,
        "seed": est_cfg.seed,
        "rows": [dict(zip(header, row)) for row in rows],
        "violations": violations,
    })
    if violations:
        raise CertificationFailure(f"{violations} Monte Carlo bound check(s) failed")
    return EXIT_OK


def cmd_rates(cfg: dict, out_dir: Path, threads: int, plot: bool) -> int:
    model = _model_from_config(cfg)
    levels = _levels_from_config(cfg)
    epsilon = float(cfg.get("epsilon", 0.05))
    slope_tolerance = float(cfg.get("slope_tolerance", 0.05))
    source = cfg.get("errors", "exact")
    if source == "exact":
        errors = [analytics.gap_exact(model, N) for N in levels]
        tolerances = None
    elif source == "mc":
        est_cfg = montecarlo.EstimatorConfig(
            num_samples=int(cfg.get("num_samples", 0)),
            seed=int(cfg.get("seed", 0)),
            reference_level=(int(cfg["reference_level"]) if "reference_level" in cfg else None),
            target_bias_fraction=(float(cfg["target_bias_fraction"])
                                  if "target_bias_fraction" in cfg else None),
            batch_size=int(cfg.get("batch_size", 4096)),
            threads=threads,
        )
        errors, tolerances = [], []
        for N in levels:
            report = montecarlo.estimate_weak_error_coupled(model, N, "norm_sq", est_cfg)
            errors.append(report.estimate.mean)
            tolerances.append(3.0 * report.estimate.std_error + report.truncation_bias_bound)
    else:
        raise ConfigError("config key 'errors' must be 'exact' or 'mc'")
    try:
        report = ratefit.certify_sandwich(model, model.eta, levels, errors,
                                          epsilon=epsilon, tolerances=tolerances)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    expected_level_slope = -(model.eta * model.p)
    slope_ok = abs(report.slope_in_level - expected_level_slope) <= slope_tolerance
    header = ["N", "lambda_N", "error", "tolerance", "low_envelope", "high_envelope"]
    rows = []
    for idx, N in enumerate(report.levels):
        lam = report.lambda_values[idx]
        rows.append([
            N, lam, report.errors[idx],
            0.0 if tolerances is None else tolerances[idx],
            report.sandwich.c_low * lam ** (-model.eta),
            report.sandwich.C_high * lam ** (epsilon - model.eta),
        ])
    _write_csv(out_dir / "rates.csv", header, rows)
    payload = {
        "model": model.to_dict(),
        "slope_lambda": report.slope,
        "slope_level": report.slope_in_level,
        "expected_slope_level": expected_level_slope,
        "slope_tolerance": slope_tolerance,
        "slope_ok": slope_ok,
        "intercept": report.intercept,
        "r_squared": report.r_squared,
        "eta_expected": report.eta_expected,
        "sandwich": {
            "c_low": report.sandwich.c_low,
            "C_high": report.sandwich.C_high,
            "epsilon": report.sandwich.epsilon,
            "c_low_halves": list(report.sandwich.c_low_halves),
            "C_high_halves": list(report.sandwich.C_high_halves),
        },
        "rows": [dict(zip(header, row)) for row in rows],
    }
    _write_json_report(out_dir / "rates.json", payload)
    if plot:
        _plot_rates(out_dir / "rates.svg", report, model, epsilon)
    if not slope_ok:
        raise CertificationFailure(
            f"fitted level slope {report.slope_in_level:.6g} deviates from "
            f"{expected_level_slope:.6g} by more than {slope_tolerance}"
        )
    return EXIT_OK


def _plot_rates(path: Path, report: ratefit.RateReport, model: SpectralModel, epsilon: float) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lam = np.asarray(report.lambda_values)
    err = np.asarray(report.errors)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(lam, err, "ko", label="error")
    ax.loglog(lam, report.sandwich.c_low * lam ** (-model.eta), "b--",
              label="lower envelope")
    ax.loglog(lam, report.sandwich.C_high * lam ** (epsilon - model.eta), "r--",
              label="upper envelope")
    ax.set_xlabel("|lambda_N|")
    ax.set_ylabel("error")
    ax.set_title(f"log-log slope {report.slope:.4f} (expected {-model.eta:.4f})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_oracle(cfg: dict, out_dir: Path, threads: int) -> int:
    model = _model_from_config(cfg)
    K = int(cfg.get("quadrature_steps", 0))
    num_paths = int(cfg.get("num_paths", 0))
    if K < 1:
        raise ConfigError("config key 'quadrature_steps' must be >= 1")
    if num_paths < 2:
        raise ConfigError("config key 'num_paths' must be >= 2")
    modes = cfg.get("modes", [1])
    if not isinstance(modes, list) or not modes or any(int(m) < 1 for m in modes):
        raise ConfigError("config key 'modes' must be a non-empty list of indices >= 1")
    modes = [int(m) for m in modes]
    seed = int(cfg.get("seed", 0))
    level = max(modes)
    stream = RandomStream(seed)
    x, y = _oracle_paths(model, level, K, stream, num_paths, threads,
                         int(cfg.get("batch_size", 4096)))
    header = ["mode", "statistic", "empirical", "exact", "std_error", "deviation_se", "ok"]
    rows = []
    violations = 0
    for n in modes:
        mm = analytics.mode_moments(model, n)
        xs = x[:, n - 1]
        ys = y[:, n - 1]
        for name, values, target in (
            ("var1", xs * xs, mm.var1),
            ("var2", ys * ys, mm.var2),
            ("cov", xs * ys, mm.cov),
        ):
            mean = float(np.mean(values))
            se = float(np.std(values, ddof=1) / np.sqrt(num_paths))
            dev = abs(mean - target) / se if se > 0 else np.inf
            ok = dev <= 4.0
            if not ok:
                violations += 1
            rows.append([n, name, mean, target, se, dev, ok])
    _write_csv(out_dir / "oracle.csv", header, rows)
    _write_json_report(out_dir / "oracle.json", {
        "model": model.to_dict(),
        "quadrature_steps": K,
        "num_paths": num_paths,
        "seed": seed,
        "rows": [dict(zip(header, row)) for row in rows],
        "violations": violations,
    })
    if violations:
        raise CertificationFailure(
            f"{violations} oracle statistic(s) deviate by more than 4 standard errors"
        )
    return EXIT_OK


def _oracle_paths(model, level, K, stream, num_paths, threads, batch_size):
    from concurrent.futures import ThreadPoolExecutor

    x = np.empty((num_paths, level))
    y = np.empty((num_paths, level))
    tasks = [(s, min(batch_size, num_paths - s)) for s in range(0, num_paths, batch_size)]

    def work(start: int, count: int) -> None:
        bx, by = sample_path_oracle_batch(model, level, K, stream, start, count)
        x[start : start + count] = bx
        y[start : start + count] = by

    if threads == 1:
        for start, count in tasks:
            work(start, count)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda t: work(*t), tasks))
    return x, y


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specwave",
        description="Exact laws and weak-error certification for spectral "
                    "Galerkin approximations of a stochastic wave equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("exact", "closed-form moment/gap/bound table"),
        ("mc", "coupled Monte Carlo weak-error estimates"),
        ("rates", "log-log rate fit and sandwich certificate"),
        ("oracle", "quadrature oracle vs closed-form moments"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="flat JSON config (or a manifest)")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads (must not change results)")
        if name == "rates":
            cmd.add_argument("--plot", action="store_true", help="write a log-log SVG figure")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = int(args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = {
            "exact": ["exact.csv", "exact.json"],
            "mc": ["mc.csv", "mc.json"],
            "rates": ["rates.csv", "rates.json"],
            "oracle": ["oracle.csv", "oracle.json"],
        }[args.command]
        tolerances = {
            "mc_certification": "mean - 3*std_error - truncation_bias_bound >= lower_bound",
            "oracle_deviation_se": 4.0,
            "rates_slope_tolerance": float(cfg.get("slope_tolerance", 0.05)),
        }
        if getattr(args, "plot", False):
            outputs = outputs + ["rates.svg"]
        code = EXIT_OK
        try:
            if args.command == "exact":
                code = cmd_exact(cfg, out_dir)
            elif args.command == "mc":
                code = cmd_mc(cfg, out_dir, args.threads)
            elif args.command == "rates":
                code = cmd_rates(cfg, out_dir, args.threads, getattr(args, "plot", False))
            else:
                code = cmd_oracle(cfg, out_dir, args.threads)
        except CertificationFailure as exc:
            # certification failures still leave their reports behind
            print(f"certification failure: {exc}", file=sys.stderr)
            code = EXIT_CERTIFICATION
        _write_manifest(out_dir, args.command, cfg, outputs, tolerances, started)
        return code
    except (ConfigError, ModelValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except analytics.NumericFaultError as exc:
        print(f"numeric fault: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
