"""Special functions: Bessel J of real order, harmonic counts, real spherical
harmonics on the circle and the 2-sphere, and matching surface quadrature."""

from dataclasses import dataclass
from math import comb, gamma, pi, sqrt

import numpy as np
from scipy.optimize import minimize_scalar

from . import _accel
from .errors import DomainError, UnsupportedDimensionError

__all__ = [
    "BesselOrder",
    "HarmonicIndex",
    "bessel_j",
    "bessel_j_table",
    "gamma",
    "harmonic_basis",
    "harmonic_count",
    "spherical_harmonic",
    "sphere_rule",
    "sqrtz_bessel_bounded",
]


@dataclass(frozen=True)
class BesselOrder:
    nu: float

    def __post_init__(self):
        if not self.nu >= -0.5:
            raise DomainError(f"Bessel order must be >= -1/2, got {self.nu!r}")
        object.__setattr__(self, "nu", float(self.nu))


@dataclass(frozen=True)
class HarmonicIndex:
    degree: int
    index: int
    dim: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise UnsupportedDimensionError(f"spherical harmonics implemented for d in {{2, 3}}, got {self.dim}")
        if self.degree < 0:
            raise DomainError("degree must be non-negative")
        h = harmonic_count(self.degree, self.dim)
        if not 1 <= self.index <= h:
            raise DomainError(f"index must lie in [1, {h}], got {self.index}")


def harmonic_count(m, d):
    """Dimension of the space of degree-``m`` spherical harmonics in R^d."""
    if m < 0 or d < 1:
        raise DomainError("need m >= 0 and d >= 1")
    if m == 0:
        return 1
    if m == 1:
        return d
    return comb(d + m - 1, m) - comb(d + m - 3, m - 2)


def _order(nu):
    return nu.nu if isinstance(nu, BesselOrder) else BesselOrder(nu).nu


def bessel_j(nu, z):
    """Bessel function of the first kind ``J_nu(z)`` for ``nu >= -1/2``, ``z >= 0``."""
    nu = _order(nu)
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("bessel_j needs z >= 0")
    out = _accel.jv_array(nu, np.ascontiguousarray(arr.reshape(-1)))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def bessel_j_table(nu_lo, count, z):
    """``J_{nu_lo + k}(z)`` for ``k < count``; shape ``(count,) + z.shape``."""
    nu_lo = _order(nu_lo)
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0):
        raise DomainError("bessel_j_table needs z >= 0")
    flat = np.ascontiguousarray(arr.reshape(-1))
    return _accel.bessel_table(nu_lo, int(count), flat).reshape((count,) + arr.shape)


def sqrtz_bessel_bounded(nu, z_max=1e4, n_grid=20000):
    """Estimate ``sup_z sqrt(z) |J_nu(z)|`` over (0, z_max].

    Scans a log-spaced grid, then polishes the five best grid points with a
    bounded scalar search between their neighbours.
    """
    nu = _order(nu)
    z = np.geomspace(1e-8, z_max, n_grid)
    vals = np.sqrt(z) * np.abs(bessel_j(nu, z))
    best = float(vals.max())
    for i in np.argsort(vals)[-5:]:
        lo, hi = z[max(i - 1, 0)], z[min(i + 1, n_grid - 1)]
        res = minimize_scalar(
            lambda t: -sqrt(t) * abs(bessel_j(nu, t)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * hi},
        )
        best = max(best, -float(res.fun))
    return best


def _check_dim(d):
    if d not in (2, 3):
        raise UnsupportedDimensionError(f"spherical harmonics implemented for d in {{2, 3}}, got {d}")


def _unit_points(theta, d):
    pts = np.asarray(theta, dtype=float)
    if pts.shape[-1] != d:
        raise DomainError(f"points must have trailing dimension {d}")
    norms = np.linalg.norm(pts, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise DomainError("points must lie on the unit sphere (tolerance 1e-12)")
    return pts


def _legendre_normalised(m_max, t):
    """Orthonormal associated Legendre values ``p[l, mu]`` on S^2 (no Condon-Shortley phase)."""
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    p = np.zeros((m_max + 1, m_max + 1) + t.shape)
    p[0, 0] = sqrt(1.0 / (4.0 * pi))
    for mu in range(1, m_max + 1):
        p[mu, mu] = p[mu - 1, mu - 1] * sqrt((2 * mu + 1) / (2.0 * mu)) * s
    for mu in range(0, m_max):
        p[mu + 1, mu] = sqrt(2 * mu + 3) * t * p[mu, mu]
    for mu in range(0, m_max + 1):
        for l in range(mu + 2, m_max + 1):
            a_l = sqrt((4 * l * l - 1) / (l * l - mu * mu))
            a_prev = sqrt((4 * (l - 1) ** 2 - 1) / ((l - 1) ** 2 - mu * mu))
            p[l, mu] = a_l * (t * p[l - 1, mu] - p[l - 2, mu] / a_prev)
    return p


def harmonic_basis(m, d, theta):
    """All ``h(m, d)`` real harmonics of degree ``m`` at the given unit vectors.

    Returns shape ``(h(m, d),) + theta.shape[:-1]``; row ``l - 1`` is ``S_m^l``.
    For d = 2 the order is (cos, sin); for d = 3 row ``l - 1`` carries azimuthal
    order ``l - m - 1``, negative orders being the sine branch.
    """
    _check_dim(d)
    pts = _unit_points(theta, d)
    phi = np.arctan2(pts[..., 1], pts[..., 0])
    if d == 2:
        if m == 0:
            return np.full((1,) + phi.shape, 1.0 / sqrt(2.0 * pi))
        return np.stack([np.cos(m * phi), np.sin(m * phi)]) / sqrt(pi)
    p = _legendre_normalised(m, np.clip(pts[..., 2], -1.0, 1.0))
    rows = []
    for mu in range(-m, m + 1):
        if mu == 0:
            rows.append(p[m, 0])
        elif mu > 0:
            rows.append(sqrt(2.0) * p[m, mu] * np.cos(mu * phi))
        else:
            rows.append(sqrt(2.0) * p[m, -mu] * np.sin(-mu * phi))
    return np.stack(rows)


def spherical_harmonic(idx, theta):
    """Value of ``S_m^l`` at unit vector(s) ``theta`` (trailing axis = coordinates)."""
    basis = harmonic_basis(idx.degree, idx.dim, theta)
    value = basis[idx.index - 1]
    return float(value) if np.ndim(value) == 0 else value


def sphere_rule(d, n):
    """Quadrature on S^{d-1}: returns (unit points of shape (N, d), weights).

    d = 2: ``n``-point trapezoid on the circle, exact for trigonometric
    polynomials of degree < n.  d = 3: ``n``-point Gauss-Legendre in cos(polar)
    times a ``2n``-point trapezoid in azimuth, exact for harmonics of degree < 2n.
    """
    _check_dim(d)
    if d == 2:
        ang = 2.0 * pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(n, 2.0 * pi / n)
    t, wt = np.polynomial.legendre.leggauss(n)
    n_phi = 2 * n
    ang = 2.0 * pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - t * t)
    pts = np.stack(
        [st[:, None] * np.cos(ang)[None, :], st[:, None] * np.sin(ang)[None, :], np.repeat(t[:, None], n_phi, 1)],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.repeat(wt, n_phi) * (2.0 * pi / n_phi)
    # renormalise so points sit on the sphere to rounding
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts, weights
