"""Closed-form integrals of positive-part powers of linear functions.

All solver integrals reduce to moments

    I_k = int_lo^hi (a s + b)_+^r s^k ds,   r > -1, k small,

evaluated exactly. On the sub-interval where ``u = a s + b`` is positive we
parametrize from the end with the larger ``u``:

    u = u_max (1 - z sigma),  sigma in [0, 1],  z = 1 - u_min / u_max in [0, 1]

and need ``m_j = int_0^1 sigma^j (1 - z sigma)^r d sigma``. When ``|r| z`` is
small the binomial series converges fast; otherwise the moments are incomplete
beta functions, which stay accurate for exponents in the thousands.
"""

from __future__ import annotations

from math import comb

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc

_SERIES_Z = 0.5
_FLAT = 1e-14


def sigma_moments(z: float, r: float, jmax: int) -> np.ndarray:
    """``int_0^1 sigma^j (1 - z sigma)^r d sigma`` for ``j = 0..jmax``."""
    out = np.zeros(jmax + 1)
    if z * max(abs(r), 1.0) <= _SERIES_Z:
        # binomial series; terms shrink at least geometrically here
        coef = 1.0
        for i in range(400):
            for j in range(jmax + 1):
                out[j] += coef / (j + i + 1)
            coef *= (r - i) / (i + 1) * (-z)
            if coef == 0.0 or abs(coef) < 1e-18 * abs(out[0]):
                break
        return out
    # substitute w = 1 - z sigma: z^-(j+1) int_(1-z)^1 w^r (1-w)^j dw
    for j in range(jmax + 1):
        out[j] = beta_fn(j + 1.0, r + 1.0) * betainc(j + 1.0, r + 1.0, z) / z ** (j + 1)
    return out


def ppow_moments(slope: float, intercept: float, r: float, lo: float, hi: float, kmax: int = 2) -> np.ndarray:
    """Moments ``int_lo^hi (slope*s + intercept)_+^r s^k ds`` for ``k = 0..kmax``."""
    out = np.zeros(kmax + 1)
    if hi <= lo:
        return out
    ks = np.arange(kmax + 1)
    if slope == 0.0 or abs(slope) * (hi - lo) <= _FLAT * abs(intercept):
        if intercept <= 0.0:
            return out
        return intercept**r * (hi ** (ks + 1) - lo ** (ks + 1)) / (ks + 1)

    root = -intercept / slope
    u_lo = max(slope * lo + intercept, 0.0)
    u_hi = max(slope * hi + intercept, 0.0)
    # pin u to zero at a clipped root; (1 - z)^(r+1) is not negligible for r near -1
    if slope > 0 and root > lo:
        lo, u_lo = root, 0.0
    elif slope < 0 and root < hi:
        hi, u_hi = root, 0.0
    if hi <= lo:
        return out
    if u_lo >= u_hi:
        s0, direction, umax, umin = lo, 1.0, u_lo, u_hi
    else:
        s0, direction, umax, umin = hi, -1.0, u_hi, u_lo
    if umax <= 0.0:
        return out
    h = hi - lo
    z = (umax - umin) / umax
    m = sigma_moments(z, r, kmax)
    scale = h * umax**r
    step = direction * h
    for k in range(kmax + 1):
        acc = 0.0
        for j in range(k + 1):
            acc += comb(k, j) * s0 ** (k - j) * step**j * m[j]
        out[k] = scale * acc
    return out


def positive_part_moment(slope, intercept, r, v_slope, v_intercept, c) -> float:
    """``int_0^c (slope*t + intercept)_+^r (v_slope*t + v_intercept) dt``."""
    m = ppow_moments(slope, intercept, r, 0.0, c, 1)
    return float(v_intercept * m[0] + v_slope * m[1])
