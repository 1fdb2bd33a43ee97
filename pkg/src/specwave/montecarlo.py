"""Coupled Monte Carlo estimation of weak errors, with certificates in mind.

The reference level M stands in for the untruncated solution; every report
carries an analytic bound on that substitution so certification tests can
add it to the statistical tolerance.  Coupling is exact: the level-N sample
is the coordinate truncation of the level-M sample, so the per-sample
difference only involves modes N+1..M and the estimator variance collapses
accordingly.

Per-sample values are stored and reduced with numpy's pairwise summation
over the full vector, which makes results bit-identical for any worker
count or batch size.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analytics
from .model import SpectralModel, check_level
from .sampler import GalerkinSample, sample_exact_batch
from .streams import RandomStream

TEST_FUNCTIONS = ("norm_sq", "phi_1", "phi_2")


@dataclass(frozen=True)
class EstimatorConfig:
    """Sample budget, seeding, and reference-level policy for one estimator run."""

    num_samples: int
    seed: int
    reference_level: Optional[int] = None
    target_bias_fraction: Optional[float] = None
    stream_id: int = 0
    batch_size: int = 4096
    threads: int = 1

    def __post_init__(self) -> None:
        if self.num_samples < 2:
            raise ValueError(f"num_samples must be >= 2 (got {self.num_samples})")
        if self.reference_level is not None and self.reference_level < 1:
            raise ValueError(f"reference_level must be >= 1 (got {self.reference_level})")
        if self.target_bias_fraction is not None and not (0.0 < self.target_bias_fraction < 1.0):
            raise ValueError(
                f"target_bias_fraction must lie in (0, 1) (got {self.target_bias_fraction})"
            )
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo mean with standard error (sample std / sqrt(n))."""

    mean: float
    std_error: float
    n: int


@dataclass(frozen=True)
class WeakErrorReport:
    level: int
    test_function: str
    estimate: Estimate
    exact_value: Optional[float]
    lower_bound: float
    truncation_bias_bound: float
    reference_level: int


def phi(sample: GalerkinSample, i: int) -> float:
    """exp(-||component i||^2); always in (0, 1]."""
    if i not in (1, 2):
        raise ValueError(f"component must be 1 or 2 (got {i!r})")
    coords = sample.x if i == 1 else sample.y
    return math.exp(-float(np.dot(coords, coords)))


def _check_test_function(test_function: str) -> None:
    if test_function not in TEST_FUNCTIONS:
        raise ValueError(f"test_function must be one of {TEST_FUNCTIONS} (got {test_function!r})")


def choose_reference_level(
    model: SpectralModel, N: int, target_bias_fraction: float, scale: float
) -> int:
    """Smallest M = 2**k * N whose norm-gap tail bound is below fraction*scale.

    The tail bound is the integral majorant of the mode sum beyond M, which
    dominates the squared-norm truncation bias of the reference level.
    """
    N = check_level(N)
    if N < 1:
        raise ValueError("reference-level selection requires N >= 1")
    if not (0.0 < target_bias_fraction < 1.0):
        raise ValueError(f"target_bias_fraction must lie in (0, 1) (got {target_bias_fraction})")
    if not scale > 0.0:
        raise ValueError(f"scale must be positive (got {scale})")
    goal = target_bias_fraction * scale
    M = 2 * N  # minimum doubling
    while norm_truncation_bias_bound(model, M) > goal:
        M *= 2
        if M > 1 << 40:
            raise ValueError("reference level exceeds 2**40; relax target_bias_fraction")
    return M


def norm_truncation_bias_bound(model: SpectralModel, M: int) -> float:
    """Integral upper bound for the squared-norm gap beyond level M."""
    q = model.weight_exponent
    amp = model.mu_scale**2 * model.c ** (2.0 * model.delta - 1.0)
    return model.T * amp * float(M) ** (q + 1.0) / (-q - 1.0)


def phi_truncation_bias_bound(model: SpectralModel, M: int, i: int) -> float:
    """Mean-square Lipschitz bound on the reference-level bias of E phi_i.

    |phi_i(a) - phi_i(b)| <= ||a_i - b_i|| (||a_i|| + ||b_i||); Cauchy-Schwarz
    in the mean and the exact coupling give the bound below.
    """
    tail = analytics.tail_moment_series(model, M, i)
    gap_hi = tail.value + tail.error_bound
    finite = analytics.component_second_moment(model, M, i)
    return math.sqrt(gap_hi) * math.sqrt(2.0 * (finite + (finite + gap_hi)))


def _coupled_batch(model, M, N, test_function, stream, start, count) -> np.ndarray:
    x, y = sample_exact_batch(model, M, stream, start, count)
    if test_function == "norm_sq":
        xt = x[:, N:]
        yt = y[:, N:]
        return np.einsum("ij,ij->i", xt, xt) + np.einsum("ij,ij->i", yt, yt)
    coords = x if test_function == "phi_1" else y
    full = np.einsum("ij,ij->i", coords, coords)
    coarse = np.einsum("ij,ij->i", coords[:, :N], coords[:, :N])
    # truncated minus reference: the sign for which the analytic bound holds
    return np.exp(-coarse) - np.exp(-full)


def _functional_batch(model, M, test_function, stream, start, count) -> np.ndarray:
    x, y = sample_exact_batch(model, M, stream, start, count)
    if test_function == "norm_sq":
        return np.einsum("ij,ij->i", x, x) + np.einsum("ij,ij->i", y, y)
    coords = x if test_function == "phi_1" else y
    return np.exp(-np.einsum("ij,ij->i", coords, coords))


def _run_batches(fill, n: int, batch_size: int, threads: int) -> np.ndarray:
    """Fill a length-n vector batch-wise; values depend only on sample index."""
    values = np.empty(n)
    tasks = [(start, min(batch_size, n - start)) for start in range(0, n, batch_size)]
    if threads == 1:
        for start, count in tasks:
            values[start : start + count] = fill(start, count)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(fill, start, count) for start, count in tasks]
            for (start, count), fut in zip(tasks, futures):
                values[start : start + count] = fut.result()
    return values


def _summarize(values: np.ndarray) -> Estimate:
    n = values.shape[0]
    mean = float(np.sum(values)) / n
    var = float(np.sum((values - mean) ** 2)) / (n - 1)
    return Estimate(mean=mean, std_error=math.sqrt(var / n), n=n)


def estimate_weak_error_coupled(
    model: SpectralModel, N: int, test_function: str, cfg: EstimatorConfig
) -> WeakErrorReport:
    """Coupled estimate of the level-N weak error against reference level M.

    For norm_sq the per-sample value is ||X_M||^2 - ||X_N||^2 (mean equals
    the exact truncated gap); for phi_i it is phi_i(X_N) - phi_i(X_M), the
    orientation in which the analytic lower bound is stated.
    """
    _check_test_function(test_function)
    N = check_level(N)
    if N < 1:
        raise ValueError("weak-error estimation requires N >= 1 (the bounds are stated there)")
    M = _resolve_reference_level(model, N, cfg)
    if N >= M:
        raise ValueError(f"level N = {N} must be below the reference level M = {M}")
    stream = RandomStream(cfg.seed, cfg.stream_id)
    values = _run_batches(
        lambda start, count: _coupled_batch(model, M, N, test_function, stream, start, count),
        cfg.num_samples,
        cfg.batch_size,
        cfg.threads,
    )
    estimate = _summarize(values)
    if test_function == "norm_sq":
        exact = analytics.total_second_moment(model, M) - analytics.total_second_moment(model, N)
        lower = analytics.bound_delta(model, N)
        bias = norm_truncation_bias_bound(model, M)
    else:
        i = 1 if test_function == "phi_1" else 2
        exact = None
        lower = analytics.bound_exp(model, N, i)
        bias = phi_truncation_bias_bound(model, M, i)
    return WeakErrorReport(
        level=N,
        test_function=test_function,
        estimate=estimate,
        exact_value=exact,
        lower_bound=lower,
        truncation_bias_bound=bias,
        reference_level=M,
    )


def _resolve_reference_level(model: SpectralModel, N: int, cfg: EstimatorConfig) -> int:
    if cfg.reference_level is not None:
        return cfg.reference_level
    if cfg.target_bias_fraction is None:
        raise ValueError("config needs reference_level or target_bias_fraction")
    scale = analytics.bound_delta(model, max(N, 1))
    return choose_reference_level(model, max(N, 1), cfg.target_bias_fraction, scale)


def estimate_functional(
    model: SpectralModel, N: int, test_function: str, cfg: EstimatorConfig
) -> Estimate:
    """Plain Monte Carlo estimate of E f(X_N) for one of the test functions."""
    _check_test_function(test_function)
    N = check_level(N)
    stream = RandomStream(cfg.seed, cfg.stream_id)
    values = _run_batches(
        lambda start, count: _functional_batch(model, N, test_function, stream, start, count),
        cfg.num_samples,
        cfg.batch_size,
        cfg.threads,
    )
    return _summarize(values)


def estimate_weak_error_independent(
    model: SpectralModel, N: int, test_function: str, cfg: EstimatorConfig
) -> Estimate:
    """Same difference as the coupled estimator but from independent sample sets.

    Exists to measure the variance reduction bought by the coupling.
    """
    _check_test_function(test_function)
    N = check_level(N)
    M = _resolve_reference_level(model, N, cfg)
    if N >= M:
        raise ValueError(f"level N = {N} must be below the reference level M = {M}")
    fine = RandomStream(cfg.seed, cfg.stream_id)
    coarse = RandomStream(cfg.seed, cfg.stream_id + 1)

    def fill(start: int, count: int) -> np.ndarray:
        f = _functional_batch(model, M, test_function, fine, start, count)
        g = _functional_batch(model, N, test_function, coarse, start, count)
        return f - g if test_function == "norm_sq" else g - f

    values = _run_batches(fill, cfg.num_samples, cfg.batch_size, cfg.threads)
    return _summarize(values)
