"""Empirical convergence orders and the two-sided rate certificate.

Given error values at increasing truncation levels, the certificate pins
constants c_low, C_high with

    c_low * lam_N**(-eta)  <=  error_N  <=  C_high * lam_N**(epsilon - eta)

for every supplied level (lam_N = c * N**p).  Both inequalities hold by
construction; the informative content is that c_low stays away from zero
and C_high stays bounded as the level range grows, which is what the
per-half statistics record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import SpectralModel


@dataclass(frozen=True)
class Sandwich:
    c_low: float
    C_high: float
    epsilon: float
    c_low_halves: tuple[float, float]
    C_high_halves: tuple[float, float]


@dataclass(frozen=True)
class RateReport:
    levels: tuple[int, ...]
    lambda_values: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float  # log-log slope of error against lambda
    intercept: float
    r_squared: float
    eta_expected: float
    sandwich: Sandwich
    level_exponent: float  # p, relating lambda = c * N**p to the level

    @property
    def slope_in_level(self) -> float:
        """Slope of error against the level N (slope in lambda times p)."""
        return self.slope * self.level_exponent


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through (log x, log y); returns (slope, intercept, r^2)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-d arrays with at least 2 points")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log fit requires strictly positive inputs")
    lx = np.log(x)
    ly = np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residuals = ly - (slope * lx + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0  # constant data, fitted exactly by a flat line
    else:
        r_squared = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return float(slope), float(intercept), r_squared


def certify_sandwich(
    model: SpectralModel,
    eta: float,
    levels: Sequence[int],
    errors: Sequence[float],
    epsilon: float = 0.05,
    tolerances: Optional[Sequence[float]] = None,
) -> RateReport:
    """Rate certificate for error values at the given levels.

    ``eta`` must match the model's own decay exponent.  When ``tolerances``
    are given (statistical half-widths per point, e.g. 3*SE plus the
    truncation-bias bound) the certificate uses worst-case interval
    endpoints: the minimum is taken over error - tol and the maximum over
    error + tol, so statistical noise cannot forge a certificate.
    """
    lv = np.asarray(levels, dtype=int)
    err = np.asarray(errors, dtype=float)
    if lv.size == 0:
        raise ValueError("levels must be non-empty")
    if lv.shape != err.shape:
        raise ValueError("levels and errors must have equal length")
    if np.any(np.diff(lv) <= 0):
        raise ValueError("levels must be strictly increasing")
    if np.any(err <= 0.0):
        raise ValueError("errors must be strictly positive")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive (got {epsilon})")
    expected = model.eta
    if not math.isclose(eta, expected, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(
            f"eta = {eta} is inconsistent with the model (expected {expected!r})"
        )
    if tolerances is None:
        tol = np.zeros_like(err)
    else:
        tol = np.asarray(tolerances, dtype=float)
        if tol.shape != err.shape or np.any(tol < 0.0):
            raise ValueError("tolerances must be non-negative and match errors in length")
    err_lo = err - tol
    err_hi = err + tol
    if np.any(err_lo <= 0.0):
        raise ValueError("error minus tolerance must stay positive for a certificate")

    lam = model.lambda_abs(lv)
    low_weights = err_lo * lam**eta
    high_weights = err_hi * lam ** (eta - epsilon)
    half = max(1, lv.size // 2)
    low_a, low_b = low_weights[:half], low_weights[half:]
    high_a, high_b = high_weights[:half], high_weights[half:]
    if low_b.size == 0:  # single point: both halves degenerate to it
        low_b, high_b = low_a, high_a
    sandwich = Sandwich(
        c_low=float(low_weights.min()),
        C_high=float(high_weights.max()),
        epsilon=float(epsilon),
        c_low_halves=(float(low_a.min()), float(low_b.min())),
        C_high_halves=(float(high_a.max()), float(high_b.max())),
    )
    if lv.size >= 2:
        slope, intercept, r2 = fit_loglog(lam, err)
    else:
        slope, intercept, r2 = 0.0, float(np.log(err[0])), 1.0
    return RateReport(
        levels=tuple(int(v) for v in lv),
        lambda_values=tuple(float(v) for v in lam),
        errors=tuple(float(v) for v in err),
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        eta_expected=expected,
        sandwich=sandwich,
        level_exponent=model.p,
    )
