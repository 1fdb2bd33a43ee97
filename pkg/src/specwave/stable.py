"""Numerically careful trigonometric kernels for the per-mode moment formulas.

The closed forms need sin/cos of arguments as large as ~1e9 (high modes)
and difference expressions 1 - sin(z)/z, (1 - cos z)/z that cancel for
small z.  Large arguments are reduced modulo 2*pi in double-double
precision before calling libm; small arguments take short Taylor series.
"""
from __future__ import annotations

import numpy as np

# 2*pi split into a rounded head and the exact remainder's rounding;
# the residual beyond the two words is ~(-5.9e-33) and enters only as k*residual.
_TWO_PI_HI = 6.283185307179586
_TWO_PI_LO = 2.4492935982947064e-16
_INV_TWO_PI = 0.15915494309189535
_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitting constant

#: below this |z| the Taylor branches are used
SMALL_ARGUMENT = 1e-4


def _two_prod(a, b):
    """Exact product a*b = (p, err) without fused multiply-add."""
    p = a * b
    aa = a * _SPLIT
    a_hi = aa - (aa - a)
    a_lo = a - a_hi
    bb = b * _SPLIT
    b_hi = bb - (bb - b)
    b_lo = b - b_hi
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


def reduce_two_pi(z):
    """Remainder of z modulo 2*pi in [-pi, pi], accurate for |z| up to ~2**52."""
    z = np.asarray(z, dtype=float)
    k = np.rint(z * _INV_TWO_PI)
    prod, err = _two_prod(k, _TWO_PI_HI)
    return (z - prod) - (err + k * _TWO_PI_LO)


def sin_cos_reduced(z):
    """(sin z, cos z) evaluated after double-double range reduction."""
    r = reduce_two_pi(z)
    return np.sin(r), np.cos(r)


def one_minus_sinc(z):
    """1 - sin(z)/z for z >= 0, stable at both ends.

    Equals 0 at z = 0 and tends to 1 as z grows; always in [0, 2].
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < SMALL_ARGUMENT
    zs = z[small]
    z2 = zs * zs
    out[small] = (z2 / 6.0) * (1.0 - (z2 / 20.0) * (1.0 - (z2 / 42.0) * (1.0 - z2 / 72.0)))
    zl = z[~small]
    r = reduce_two_pi(zl)
    out[~small] = 1.0 - np.sin(r) / zl
    return out if out.ndim else float(out)


def cos_residual(z):
    """(1 - cos z)/z for z >= 0, evaluated as 2*sin(r/2)**2 / z after reduction."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < SMALL_ARGUMENT
    zs = z[small]
    z2 = zs * zs
    out[small] = (zs / 2.0) * (1.0 - (z2 / 12.0) * (1.0 - (z2 / 30.0) * (1.0 - z2 / 56.0)))
    zl = z[~small]
    # 1 - cos z is 2*pi-periodic, so the reduced angle may replace z in it
    half = 0.5 * reduce_two_pi(zl)
    s = np.sin(half)
    out[~small] = 2.0 * s * s / zl
    return out if out.ndim else float(out)
