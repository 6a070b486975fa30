"""Compiled inner loops.  Every function here has a twin in ``_kernels_numpy``
with identical semantics; ``_accel`` picks one at import time."""

import math

import numpy as np
from numba import njit

_BIG = 1e250
_RESCALE = 1e-250
_PI = math.pi


@njit(cache=True)
def series_regime(nu, z):
    return z <= 8.0 or z * z <= 4.0 * (nu + 1.0)


@njit(cache=True)
def asymptotic_regime(nu, z):
    return z >= 25.0 + 0.5 * nu * nu


@njit(cache=True)
def miller_start(nu_top, z):
    top = max(nu_top, z)
    return top + 25.0 + 10.0 * top ** (1.0 / 3.0)


@njit(cache=True)
def _jv_series(nu, z):
    x = 0.25 * z * z
    term = math.exp(nu * math.log(0.5 * z) - math.lgamma(nu + 1.0))
    total = term
    k = 0
    while k < 400:
        k += 1
        term *= -x / (k * (k + nu))
        total += term
        if abs(term) <= 1e-17 * abs(total) or abs(term) < 1e-300:
            break
    return total


@njit(cache=True)
def _jv_asymptotic(nu, z):
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    prev = 2.0
    k = 0
    while k < 200:
        k += 1
        odd = 2.0 * k - 1.0
        term *= (mu - odd * odd) / (8.0 * k * z)
        mag = abs(term)
        if mag == 0.0 or mag > prev:
            break
        prev = mag
        r = k % 4
        if r == 1:
            q += term
        elif r == 2:
            p -= term
        elif r == 3:
            q -= term
        else:
            p += term
        if mag < 1e-17 * (abs(p) + abs(q)):
            break
    omega = z - (0.5 * nu + 0.25) * _PI
    return math.sqrt(2.0 / (_PI * z)) * (p * math.cos(omega) - q * math.sin(omega))


@njit(cache=True)
def _neumann_coeff(mu, k):
    # weight of J_{mu+2k} in the normalisation sum for (z/2)^mu
    if mu == 0.0:
        return 1.0 if k == 0 else 2.0
    if k == 0:
        return math.gamma(mu + 1.0)
    return (mu + 2.0 * k) * math.exp(math.lgamma(mu + k) - math.lgamma(k + 1.0))


@njit(cache=True)
def _miller_fill(nu_lo, count, z, out):
    """Backward recurrence; writes J_{nu_lo + i}(z), i < count, into ``out``."""
    mu = nu_lo - math.floor(nu_lo)
    start = miller_start(nu_lo + count - 1, z)
    n_top = int((start - mu) / 2.0) * 2 + 2
    for i in range(count):
        out[i] = 0.0
    jp1 = 0.0
    j = 1e-300
    s = 0.0
    lo_idx = int(round(nu_lo - mu))  # order nu_lo == mu + lo_idx, lo_idx >= -1
    stop_idx = min(lo_idx, 0)  # normalisation needs every even order down to mu
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
        if abs(j) > _BIG:
            j *= _RESCALE
            jp1 *= _RESCALE
            s *= _RESCALE
            for i in range(count):
                out[i] *= _RESCALE
    target = 1.0 if mu == 0.0 else math.exp(mu * math.log(0.5 * z))
    scale = target / s
    for i in range(count):
        out[i] *= scale


@njit(cache=True)
def jv_scalar(nu, z):
    if z < 0.0 or nu < -0.5:
        return math.nan
    if z == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0:
            return 0.0
        return math.inf
    if series_regime(nu, z):
        return _jv_series(nu, z)
    if asymptotic_regime(nu, z):
        return _jv_asymptotic(nu, z)
    buf = np.empty(1)
    _miller_fill(nu, 1, z, buf)
    return buf[0]


@njit(cache=True)
def jv_array(nu, z):
    flat = z.ravel()
    out = np.empty(flat.size)
    for i in range(flat.size):
        out[i] = jv_scalar(nu, flat[i])
    return out.reshape(z.shape)


@njit(cache=True)
def bessel_table(nu_lo, count, z):
    """Rows are orders nu_lo, nu_lo + 1, ...; columns follow ``z``."""
    n = z.size
    out = np.empty((count, n))
    buf = np.empty(count)
    for k in range(n):
        zk = z[k]
        if zk == 0.0:
            for i in range(count):
                order = nu_lo + i
                out[i, k] = 1.0 if order == 0.0 else (0.0 if order > 0.0 else math.inf)
            continue
        _miller_fill(nu_lo, count, zk, buf)
        for i in range(count):
            out[i, k] = buf[i]
    return out


@njit(cache=True)
def exp_cov_matrix(x, y, sigma2, alpha):
    n, d = x.shape
    m = y.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - y[j, k]
                acc += diff * diff
            out[i, j] = sigma2 * math.exp(-alpha * math.sqrt(acc))
    return out


@njit(cache=True)
def exp_cov_symmetric(x, sigma2, alpha):
    n, d = x.shape
    out = np.empty((n, n))
    for i in range(n):
        out[i, i] = sigma2
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
            v = sigma2 * math.exp(-alpha * math.sqrt(acc))
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True)
def hankel_matrix(nu, r, r_weights, kappa):
    n_out = kappa.size
    n_in = r.size
    out = np.empty((n_out, n_in))
    for i in range(n_out):
        for j in range(n_in):
            arg = r[j] * kappa[i]
            out[i, j] = r_weights[j] * math.sqrt(arg) * jv_scalar(nu, arg)
    return out
