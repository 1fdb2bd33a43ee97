"""Spectral model: eigenvalues, noise weights, horizon, and validation.

The linear operator acts diagonally on the mode basis with eigenvalues
``-c * n**p`` (n = 1, 2, ...) and the additive noise feeds mode n with
weight ``mu_scale * (c * n**p)**delta``.  Square-integrability of the
stochastic convolution requires the trace condition

    sum_n weight(n)**2 / |eigenvalue(n)|  <  infinity,

which for this power-law family is exactly ``p * (2*delta - 1) < -1``,
i.e. ``delta < 1/2 - 1/(2*p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class ModelValidationError(ValueError):
    """A model parameter violates one of the validity conditions."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ModelValidationError(f"{name} must be finite (got {value!r})")
    return value


@dataclass(frozen=True)
class SpectralModel:
    """Immutable tuple (c, p, delta, T) plus an optional constant weight scale.

    All validation inequalities are checked strictly in binary64, with no
    epsilon slack.  Instances are safe to share between threads.
    """

    c: float
    p: float
    delta: float
    T: float
    mu_scale: float = 1.0

    def __post_init__(self) -> None:
        for name in ("c", "p", "delta", "T", "mu_scale"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.c <= 0.0:
            raise ModelValidationError(f"c must be positive (got {self.c})")
        if self.p <= 0.0:
            raise ModelValidationError(f"p must be positive (got {self.p})")
        if self.T <= 0.0:
            raise ModelValidationError(f"T must be positive (got {self.T})")
        if self.mu_scale <= 0.0:
            raise ModelValidationError(f"mu_scale must be positive (got {self.mu_scale})")
        limit = 0.5 - 0.5 / self.p
        if not self.delta < limit:
            raise ModelValidationError(
                f"delta must satisfy delta < 1/2 - 1/(2p) = {limit!r} "
                f"(got delta = {self.delta!r}); the noise trace condition fails"
            )

    # -- derived quantities -------------------------------------------------

    @property
    def weight_exponent(self) -> float:
        """Exponent q = p*(2*delta - 1) of weight(n)**2/|eigenvalue(n)| in n; q < -1."""
        return self.p * (2.0 * self.delta - 1.0)

    @property
    def eta(self) -> float:
        """Decay exponent of the exact norm gap in |eigenvalue|: gap ~ |lambda_N|**(-eta)."""
        return -(self.weight_exponent + 1.0) / self.p

    def eigenvalue(self, n):
        """Eigenvalue of mode n (scalar or array), always negative."""
        return -self.c * np.asarray(n, dtype=float) ** self.p

    def lambda_abs(self, n):
        """|eigenvalue(n)| = c * n**p."""
        return self.c * np.asarray(n, dtype=float) ** self.p

    def noise_weight(self, n):
        """Noise weight of mode n: mu_scale * |eigenvalue(n)|**delta."""
        return self.mu_scale * self.lambda_abs(n) ** self.delta

    def weight_over_lambda(self, n):
        """weight(n)**2 / |eigenvalue(n)| = mu_scale**2 * (c n**p)**(2*delta-1)."""
        return self.mu_scale**2 * self.lambda_abs(n) ** (2.0 * self.delta - 1.0)

    # -- constructors and serialization --------------------------------------

    @classmethod
    def with_constant_weight(cls, c: float, p: float, mu: float, T: float) -> "SpectralModel":
        """Model with constant noise weights |mu_n| = mu.

        Constant weights are the delta = 0 member of the power-law family with
        scale mu; the trace condition then requires p > 1.
        """
        return cls(c=c, p=p, delta=0.0, T=T, mu_scale=mu)

    def to_dict(self) -> dict:
        d = {"c": self.c, "p": self.p, "delta": self.delta, "T": self.T}
        if self.mu_scale != 1.0:
            d["mu_scale"] = self.mu_scale
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralModel":
        """Build from a flat key-value document.

        Exactly one of {p, delta} / {eta} must be present; eta takes the
        mapping p = 1/eta, delta = 1/2 - eta.
        """
        has_eta = "eta" in data
        has_pd = "p" in data or "delta" in data
        if has_eta and has_pd:
            raise ModelValidationError("provide either (p, delta) or eta, not both")
        if not has_eta and not ("p" in data and "delta" in data):
            raise ModelValidationError("model requires keys c, T and either (p, delta) or eta")
        if "c" not in data or "T" not in data:
            raise ModelValidationError("model requires keys c and T")
        scale = float(data.get("mu_scale", 1.0))
        if has_eta:
            m = eta_to_model(float(data["eta"]), float(data["c"]), float(data["T"]))
            return replace(m, mu_scale=scale) if scale != 1.0 else m
        return cls(
            c=float(data["c"]),
            p=float(data["p"]),
            delta=float(data["delta"]),
            T=float(data["T"]),
            mu_scale=scale,
        )


def build_model(c: float, p: float, delta: float, T: float) -> SpectralModel:
    """Validated model with eigenvalue(n) = -c n**p and weight(n) = (c n**p)**delta."""
    return SpectralModel(c=c, p=p, delta=delta, T=T)


def eta_to_model(eta: float, c: float, T: float) -> SpectralModel:
    """Model realizing norm-gap decay |lambda_N|**(-eta): p = 1/eta, delta = 1/2 - eta."""
    eta = _require_finite("eta", eta)
    if eta <= 0.0:
        raise ModelValidationError(f"eta must be positive (got {eta})")
    return build_model(c, 1.0 / eta, 0.5 - eta, T)


def check_mode_index(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"mode index must be >= 1 (got {n})")
    return n


def check_level(N: int) -> int:
    N = int(N)
    if N < 0:
        raise ValueError(f"Galerkin level must be >= 0 (got {N})")
    return N
