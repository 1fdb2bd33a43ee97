"""Exact Gaussian sampling of the truncated solution pair, plus a quadrature oracle.

The terminal-time law at level M is an independent product over modes of
bivariate Gaussians with the closed-form covariance of analytics.py, so it
can be sampled exactly: mode n draws two standard normals addressed by
(stream, sample index, mode) and maps them through the 2x2 Cholesky factor.
Because the addressing is per mode, the sample at level M restricted to its
first N coordinates coincides with the sample drawn at level N from the
same stream; this is the exact projection coupling.

The independent oracle approximates the sine/cosine stochastic integrals of
the mild solution by left-point Riemann sums on a uniform grid, sharing the
same Brownian increments between the two integrands.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytics import moment_arrays
from .model import SpectralModel, check_level
from .streams import (
    STREAM_DOMAIN_EXACT,
    STREAM_DOMAIN_ORACLE,
    RandomStream,
    derive_keys,
    normal_grid,
    sample_keys,
)


@dataclass
class GalerkinSample:
    """Coordinate vectors of the (position, velocity) pair at one level.

    ``x[n-1]`` and ``y[n-1]`` are the mode-n coordinates in the orthonormal
    position and (weighted) velocity bases, so squared norms are plain sums
    of squares.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")

    @property
    def level(self) -> int:
        return self.x.shape[0]

    def norm_sq(self) -> float:
        """Squared norm of the full pair."""
        return float(np.dot(self.x, self.x) + np.dot(self.y, self.y))


def _cholesky_factors(model: SpectralModel, M: int):
    """Lower-triangular 2x2 factors (l11, l21, l22) per mode, vectorized."""
    if M == 0:
        z = np.zeros(0)
        return z, z, z
    var1, var2, cov = moment_arrays(model, np.arange(1, M + 1))
    l11 = np.sqrt(var1)
    with np.errstate(divide="ignore", invalid="ignore"):
        l21 = np.where(var1 > 0.0, cov / np.where(var1 > 0.0, l11, 1.0), 0.0)
    l22 = np.sqrt(np.maximum(var2 - l21 * l21, 0.0))
    return l11, l21, l22


def sample_exact_batch(
    model: SpectralModel,
    M: int,
    stream: RandomStream,
    start_index: int,
    count: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact samples for indices start_index..start_index+count-1.

    Returns (X, Y) of shape (count, M).  Column n-1 of the pair restricted to
    any smaller level reproduces the smaller-level draw bit for bit.
    """
    M = check_level(M)
    l11, l21, l22 = _cholesky_factors(model, M)
    keys = sample_keys(stream.key(STREAM_DOMAIN_EXACT), start_index, count)
    z = normal_grid(keys, 2 * M)  # mode n uses words 2n-2 (z1) and 2n-1 (z2)
    z1 = z[:, 0::2]
    z2 = z[:, 1::2]
    x = l11 * z1
    y = l21 * z1 + l22 * z2
    return x, y


def sample_exact(model: SpectralModel, M: int, stream: RandomStream, index: int = 0) -> GalerkinSample:
    """One exact sample of the level-M pair, fully determined by (stream, index)."""
    x, y = sample_exact_batch(model, M, stream, index, 1)
    return GalerkinSample(x[0], y[0])


def project(sample: GalerkinSample, N: int) -> GalerkinSample:
    """Coordinate truncation to the first N modes (the exact coupling)."""
    N = check_level(N)
    if N > sample.level:
        raise ValueError(f"cannot project level {sample.level} sample onto level {N}")
    return GalerkinSample(sample.x[:N].copy(), sample.y[:N].copy())


def _oracle_weights(model: SpectralModel, M: int, K: int):
    """Integrand values sin/cos(w*(T - s_k)) at left endpoints s_k = k*T/K."""
    n = np.arange(1, M + 1, dtype=float)
    omega = np.sqrt(model.lambda_abs(n))
    s = (np.arange(K, dtype=float) * model.T) / K
    phase = omega[:, None] * (model.T - s)[None, :]
    return np.sin(phase), np.cos(phase), omega


def sample_path_oracle_batch(
    model: SpectralModel,
    M: int,
    K: int,
    stream: RandomStream,
    start_index: int,
    count: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Left-point quadrature approximations for a batch of paths, shape (count, M)."""
    M = check_level(M)
    K = int(K)
    if K < 1:
        raise ValueError(f"quadrature step count must be >= 1 (got {K})")
    w_sin, w_cos, omega = _oracle_weights(model, M, K)
    scale = model.noise_weight(np.arange(1, M + 1, dtype=float)) / omega
    sqrt_dt = np.sqrt(model.T / K)
    keys = sample_keys(stream.key(STREAM_DOMAIN_ORACLE), start_index, count)
    x = np.empty((count, M))
    y = np.empty((count, M))
    for j in range(M):
        mode_keys = derive_keys(keys, j + 1)
        dz = normal_grid(mode_keys, K)  # one Brownian increment per step
        x[:, j] = scale[j] * sqrt_dt * (dz @ w_sin[j])
        y[:, j] = scale[j] * sqrt_dt * (dz @ w_cos[j])
    return x, y


def sample_path_oracle(
    model: SpectralModel, M: int, K: int, stream: RandomStream, index: int = 0
) -> GalerkinSample:
    """One quadrature-oracle sample; converges in law to sample_exact as K grows."""
    x, y = sample_path_oracle_batch(model, M, K, stream, index, 1)
    return GalerkinSample(x[0], y[0])
