"""Exponential covariance family and its isotropic spectral density.

The kernel is ``phi(tau) = sigma2 * exp(-alpha * tau)``.  With the Fourier
convention ``k(x) = int exp(i <lam, x>) f(lam) dlam`` its radial spectral
density in dimension ``d`` is

    g(kappa) = sigma2 * Gamma((d+1)/2) * alpha * pi**(-(d+1)/2)
               * (alpha**2 + kappa**2) ** (-(d+1)/2),

which for d = 1 reduces to ``sigma2 * alpha / (pi * (alpha**2 + kappa**2))``.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _accel
from .errors import DomainError
from .quadrature import adaptive_gauss_legendre


@dataclass(frozen=True)
class Theta:
    sigma2: float
    alpha: float

    def __post_init__(self):
        for name in ("sigma2", "alpha"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "alpha", float(self.alpha))

    def as_tuple(self):
        return (self.sigma2, self.alpha)


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise DomainError(f"dimension must be a positive integer, got {dim!r}")
    return int(dim)


@dataclass(frozen=True)
class CovarianceModel:
    theta: Theta
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dim", _check_dim(self.dim))

    def __call__(self, tau):
        return kernel_eval(self, tau)

    def matrix(self, x, y=None):
        """Covariance matrix ``[phi(|x_i - y_j|)]`` for point arrays of shape (n, d)."""
        x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
        if y is None:
            return _accel.exp_cov_symmetric(x, self.theta.sigma2, self.theta.alpha)
        y = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
        return _accel.exp_cov_matrix(x, y, self.theta.sigma2, self.theta.alpha)

    def spectral_density(self):
        return RadialSpectralDensity(self.theta, self.dim)


@dataclass(frozen=True)
class RadialSpectralDensity:
    theta: Theta
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dim", _check_dim(self.dim))

    @property
    def prefactor(self):
        d = self.dim
        return (
            self.theta.sigma2
            * math.gamma(0.5 * (d + 1))
            * self.theta.alpha
            * math.pi ** (-0.5 * (d + 1))
        )

    def __call__(self, kappa):
        return spectral_eval(self, kappa)


def _nonneg(value, name):
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative")
    return arr


def _scalar_or_array(arr):
    return float(arr) if arr.ndim == 0 else arr


def kernel_eval(model, tau):
    """``sigma2 * exp(-alpha * tau)``; accepts scalars or arrays of distances."""
    tau = _nonneg(tau, "tau")
    th = model.theta
    return _scalar_or_array(th.sigma2 * np.exp(-th.alpha * tau))


def spectral_eval(density, kappa):
    kappa = _nonneg(kappa, "kappa")
    a = density.theta.alpha
    # hypot keeps huge frequencies from overflowing before the power underflows
    value = density.prefactor * np.hypot(a, kappa) ** (-(density.dim + 1.0))
    return _scalar_or_array(value)


def sphere_area(dim):
    """Surface area of the unit sphere in R^dim."""
    return 2.0 * math.pi ** (0.5 * dim) / math.gamma(0.5 * dim)


def radial_measure_cdf(density, b, tol=1e-13):
    """Spectral mass of the open ball of radius ``b``.

    Integrates ``area(S^{d-1}) * kappa**(d-1) * g(kappa)`` after the change of
    variables ``kappa = alpha * tan(t)``, which maps [0, inf) onto [0, pi/2)
    and leaves a bounded smooth integrand, so ``b = inf`` needs no tail cut.
    """
    b = float(_nonneg(b, "b"))
    if b == 0.0:
        return 0.0
    a = density.theta.alpha
    d = density.dim
    area = sphere_area(d)
    upper = 0.5 * math.pi if math.isinf(b) else math.atan(b / a)

    def integrand(t):
        kappa = a * np.tan(t)
        jac = a / np.cos(t) ** 2
        return area * kappa ** (d - 1) * spectral_eval(density, kappa) * jac

    return adaptive_gauss_legendre(integrand, 0.0, upper, tol=tol)
