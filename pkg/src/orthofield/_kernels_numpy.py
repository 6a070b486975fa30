"""Pure-numpy twins of the compiled kernels in ``_kernels_numba``.

Same regimes, same recurrences, vectorised over the argument array instead
of looping per element.
"""

import math

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

_BIG = 1e250
_RESCALE = 1e-250


def _series(nu, z):
    x = 0.25 * z * z
    term = np.exp(nu * np.log(0.5 * z) - math.lgamma(nu + 1.0))
    total = term.copy()
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 401):
        term = np.where(active, term * (-x / (k * (k + nu))), 0.0)
        total += term
        active &= ~((np.abs(term) <= 1e-17 * np.abs(total)) | (np.abs(term) < 1e-300))
        if not active.any():
            break
    return total


def _asymptotic(nu, z):
    mu = 4.0 * nu * nu
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    prev = np.full_like(z, 2.0)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 201):
        odd = 2.0 * k - 1.0
        term = term * ((mu - odd * odd) / (8.0 * k * z))
        mag = np.abs(term)
        active &= ~((mag == 0.0) | (mag > prev))
        if not active.any():
            break
        prev = np.where(active, mag, prev)
        t = np.where(active, term, 0.0)
        r = k % 4
        if r == 1:
            q += t
        elif r == 2:
            p -= t
        elif r == 3:
            q -= t
        else:
            p += t
        active &= ~(mag < 1e-17 * (np.abs(p) + np.abs(q)))
    omega = z - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * (p * np.cos(omega) - q * np.sin(omega))


def _neumann_coeff(mu, k):
    if mu == 0.0:
        return 1.0 if k == 0 else 2.0
    if k == 0:
        return math.gamma(mu + 1.0)
    return (mu + 2.0 * k) * math.exp(math.lgamma(mu + k) - math.lgamma(k + 1.0))


def _miller(nu_lo, count, z):
    """Backward recurrence for orders nu_lo .. nu_lo + count - 1; shape (count, z.size)."""
    mu = nu_lo - math.floor(nu_lo)
    top = np.maximum(nu_lo + count - 1, z).max()
    start = top + 25.0 + 10.0 * top ** (1.0 / 3.0)
    n_top = int((start - mu) / 2.0) * 2 + 2
    lo_idx = int(round(nu_lo - mu))
    stop_idx = min(lo_idx, 0)
    out = np.zeros((count, z.size))
    jp1 = np.zeros_like(z)
    j = np.full_like(z, 1e-300)
    s = np.zeros_like(z)
    idx = n_top
    while True:
        if idx >= 0 and idx % 2 == 0:
            s += _neumann_coeff(mu, idx // 2) * j
        pos = idx - lo_idx
        if 0 <= pos < count:
            out[pos] = j
        if idx == stop_idx:
            break
        order = mu + idx
        jm1 = (2.0 * order / z) * j - jp1
        jp1 = j
        j = jm1
        idx -= 1
        big = np.abs(j) > _BIG
        if big.any():
            f = np.where(big, _RESCALE, 1.0)
            j *= f
            jp1 *= f
            s *= f
            out *= f
    target = 1.0 if mu == 0.0 else np.exp(mu * np.log(0.5 * z))
    return out * (target / s)


def _at_zero(order):
    if order == 0.0:
        return 1.0
    return 0.0 if order > 0.0 else math.inf


def jv_array(nu, z):
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.full(flat.size, np.nan)
    if nu < -0.5:
        return out.reshape(z.shape)
    zero = flat == 0.0
    out[zero] = _at_zero(nu)
    pos = flat > 0.0
    ser = pos & ((flat <= 8.0) | (flat * flat <= 4.0 * (nu + 1.0)))
    asy = pos & ~ser & (flat >= 25.0 + 0.5 * nu * nu)
    mil = pos & ~ser & ~asy
    if ser.any():
        out[ser] = _series(nu, flat[ser])
    if asy.any():
        out[asy] = _asymptotic(nu, flat[asy])
    if mil.any():
        out[mil] = _miller(nu, 1, flat[mil])[0]
    return out.reshape(z.shape)


def bessel_table(nu_lo, count, z):
    z = np.asarray(z, dtype=float)
    out = np.empty((count, z.size))
    zero = z == 0.0
    for i in range(count):
        out[i, zero] = _at_zero(nu_lo + i)
    if (~zero).any():
        out[:, ~zero] = _miller(nu_lo, count, z[~zero])
    return out


def exp_cov_matrix(x, y, sigma2, alpha):
    return sigma2 * np.exp(-alpha * cdist(x, y))


def exp_cov_symmetric(x, sigma2, alpha):
    # the diagonal of squareform is exactly 0, so it carries sigma2 exactly
    return sigma2 * np.exp(-alpha * squareform(pdist(x)))


def hankel_matrix(nu, r, r_weights, kappa):
    arg = np.outer(kappa, r)
    return r_weights[None, :] * np.sqrt(arg) * jv_array(nu, arg)
