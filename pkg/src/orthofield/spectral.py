"""Spectral diagnostics for isotropic covariance pairs.

Covers the Bessel/spherical-harmonic expansion of an isotropic covariance,
projections of a covariance difference onto pairs of harmonics, discrete
Hankel transforms in one and two variables, and truncated square-integrability
checks used as divergence witnesses.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import _accel
from .errors import DegenerateCoordinateError, DomainError, UnsupportedDimensionError
from .kernels import CovarianceModel, sphere_area, spectral_eval
from .quadrature import adaptive_gauss_legendre, geometric_uniform_edges, panel_rule
from .specfun import bessel_j, bessel_j_table, harmonic_basis, sphere_rule


def expansion_constant(d):
    """Squared normalising constant ``2**(d-1) * Gamma(d/2) * pi**(d/2)``."""
    return 2.0 ** (d - 1) * math.gamma(0.5 * d) * math.pi ** (0.5 * d)


@dataclass(frozen=True)
class ExpansionConfig:
    max_degree: int = 40
    kappa_max: float = 40.0
    panels: int = 128
    dim: int = 2
    panel_order: int = 16
    angular_nodes: int = 64

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise UnsupportedDimensionError(f"expansion implemented for d in {{2, 3}}, got {self.dim}")
        if self.max_degree < 0:
            raise DomainError("max_degree must be >= 0")
        if not self.kappa_max > 0:
            raise DomainError("kappa_max must be positive")
        if self.panels < 8:
            raise DomainError("need at least 8 frequency panels")

    @classmethod
    def for_model(cls, model, max_degree=40, kappa_factor=40.0, **kw):
        """Frequency cut-off scaled to the model's inverse length scale."""
        return cls(max_degree=max_degree, kappa_max=kappa_factor * model.theta.alpha, dim=model.dim, **kw)

    def frequency_rule(self):
        edges = np.linspace(0.0, self.kappa_max, self.panels + 1)
        return panel_rule(edges, self.panel_order)


def _polar(points, d, name):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != d:
        raise DomainError(f"{name} must have {d} coordinates")
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r == 0.0):
        raise DegenerateCoordinateError(f"{name} at the origin has no polar decomposition")
    return r, pts / r[:, None]


def _radial_factors(nu0, count, kappa, r):
    """``J_{nu0+m}(kappa r) / (kappa r)**nu0`` for m < count; shape (count, len(r), len(kappa))."""
    z = np.outer(r, kappa)
    tab = bessel_j_table(nu0, count, z)
    if nu0:
        tab = tab / z[None] ** nu0
    return tab


def expansion_partial_sums(model, cfg, x, y):
    """Cumulative partial sums over degree 0..M of the harmonic expansion.

    ``x`` and ``y`` are matched arrays of points (n, d) or single points.
    Returns shape (M + 1, n), or (M + 1,) for single points.
    """
    d = cfg.dim
    if model.dim != d:
        raise DomainError("model and config dimensions differ")
    single = np.ndim(x) == 1
    rx, ux = _polar(x, d, "x")
    ry, uy = _polar(y, d, "y")
    if rx.shape != ry.shape:
        raise DomainError("x and y must hold the same number of points")
    kappa, w = cfg.frequency_rule()
    dens = model.spectral_density()
    phi_w = sphere_area(d) * kappa ** (d - 1) * spectral_eval(dens, kappa) * w
    nu0 = 0.5 * (d - 2)
    count = cfg.max_degree + 1
    fx = _radial_factors(nu0, count, kappa, rx)
    fy = _radial_factors(nu0, count, kappa, ry)
    radial = np.einsum("mnk,mnk,k->mn", fx, fy, phi_w)
    angular = np.empty_like(radial)
    for m in range(count):
        angular[m] = np.sum(harmonic_basis(m, d, ux) * harmonic_basis(m, d, uy), axis=0)
    sums = expansion_constant(d) * np.cumsum(angular * radial, axis=0)
    return sums[:, 0] if single else sums


def isotropic_expansion(model, cfg, x, y):
    """Degree-``cfg.max_degree`` truncation of the expansion of ``c(x, y)``."""
    sums = expansion_partial_sums(model, cfg, x, y)
    last = sums[-1]
    return float(last) if np.ndim(last) == 0 else last


@dataclass(frozen=True)
class SphereProjection:
    indices: tuple
    r1: np.ndarray
    r2: np.ndarray
    values: np.ndarray


def _check_pair(model1, model2, d):
    if model1.dim != d or model2.dim != d:
        raise DomainError("model dimensions must match the config dimension")


def sphere_project_delta(model1, model2, idx, r1, r2, cfg):
    """Integral of ``(c1 - c2)(x, y) S_m^l(theta_x) S_i^j(theta_y)`` over both spheres
    at fixed radii ``r1``, ``r2``; ``idx = (m, l, i, j)``."""
    d = cfg.dim
    _check_pair(model1, model2, d)
    if r1 < 0 or r2 < 0:
        raise DomainError("radii must be non-negative")
    m, l, i, j = idx
    if model1 == model2:
        return 0.0
    pts, w = sphere_rule(d, cfg.angular_nodes)
    sx = harmonic_basis(m, d, pts)[l - 1] * w
    sy = harmonic_basis(i, d, pts)[j - 1] * w
    diff = model1.matrix(r1 * pts, r2 * pts) - model2.matrix(r1 * pts, r2 * pts)
    return float(sx @ diff @ sy)


def projected_delta_spectral(model1, model2, m, r1, r2, cfg):
    """Diagonal (m = i, l = j) projection through the frequency integral
    ``(2 pi)**d * int J(k r1) J(k r2) / (k r1 k r2)**nu0 * k**(d-1) (g1 - g2) dk``.

    Accepts radius arrays; returns the matrix over ``r1 x r2``.
    """
    d = cfg.dim
    _check_pair(model1, model2, d)
    r1 = np.atleast_1d(np.asarray(r1, dtype=float))
    r2 = np.atleast_1d(np.asarray(r2, dtype=float))
    if np.any(r1 <= 0) or np.any(r2 <= 0):
        raise DegenerateCoordinateError("radii must be positive")
    kappa, w = cfg.frequency_rule()
    dg = spectral_eval(model1.spectral_density(), kappa) - spectral_eval(model2.spectral_density(), kappa)
    nu = m + 0.5 * (d - 2)
    nu0 = 0.5 * (d - 2)
    a = bessel_j(nu, np.outer(r1, kappa))
    b = bessel_j(nu, np.outer(r2, kappa))
    if nu0:
        a = a / np.outer(r1, kappa) ** nu0
        b = b / np.outer(r2, kappa) ** nu0
    out = (2.0 * math.pi) ** d * (a * (kappa ** (d - 1) * dg * w)) @ b.T
    return out


def sphere_projection_grid(model1, model2, idx, r1, r2, cfg):
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    vals = np.array([[sphere_project_delta(model1, model2, idx, a, b, cfg) for b in r2] for a in r1])
    return SphereProjection(tuple(idx), r1, r2, vals)


def scaled_projection(model1, model2, m, r1, r2, cfg):
    """``r1**((d-1)/2) r2**((d-1)/2)`` times the spectral-route diagonal projection."""
    d = cfg.dim
    delta = projected_delta_spectral(model1, model2, m, r1, r2, cfg)
    s = 0.5 * (d - 1)
    return np.asarray(r1)[:, None] ** s * delta * np.asarray(r2)[None, :] ** s


@dataclass(frozen=True)
class HankelPlan:
    """Discrete Hankel transform of order ``order`` between two panel grids.

    Both grids use Gauss-Legendre panels, refined geometrically toward the
    origin and uniform beyond; axis points r = 0 are never nodes.
    """

    order: float
    r_max: float = 24.0
    n_r: int = 512
    kappa_max: float = 24.0
    n_kappa: int = 512
    panel_order: int = 16

    def __post_init__(self):
        if not self.order >= -0.5:
            raise DomainError(f"Hankel order must be >= -1/2, got {self.order!r}")
        if not (self.r_max > 0 and self.kappa_max > 0):
            raise DomainError("grid extents must be positive")
        for n in (self.n_r, self.n_kappa):
            if n % self.panel_order or n // self.panel_order < 3:
                raise DomainError("node counts must be multiples of panel_order with >= 3 panels")

    @staticmethod
    def _grid(upper, n, order):
        return panel_rule(geometric_uniform_edges(upper, n // order), order)

    @cached_property
    def _r_rule(self):
        return self._grid(self.r_max, self.n_r, self.panel_order)

    @cached_property
    def _k_rule(self):
        return self._grid(self.kappa_max, self.n_kappa, self.panel_order)

    @property
    def r(self):
        return self._r_rule[0]

    @property
    def r_weights(self):
        return self._r_rule[1]

    @property
    def kappa(self):
        return self._k_rule[0]

    @property
    def kappa_weights(self):
        return self._k_rule[1]

    @cached_property
    def matrix(self):
        return _accel.hankel_matrix(float(self.order), self.r, self.r_weights, self.kappa)

    def inverse(self):
        """Plan mapping the frequency grid back onto the radial grid."""
        return HankelPlan(self.order, self.kappa_max, self.n_kappa, self.r_max, self.n_r, self.panel_order)


def _finite_norm(values, weights, name):
    values = np.asarray(values, dtype=float)
    norm = np.sum(weights * values**2) if values.ndim == 1 else None
    if not np.all(np.isfinite(values)) or (norm is not None and not np.isfinite(norm)):
        raise DomainError(f"{name} must be finite on the grid")
    return values


def hankel_1d(plan, f):
    """``g(kappa) = int f(r) sqrt(r kappa) J_nu(r kappa) dr`` on the plan's grids.

    ``f`` holds samples at ``plan.r`` (or is a callable evaluated there).
    """
    values = f(plan.r) if callable(f) else f
    values = _finite_norm(values, plan.r_weights, "f")
    if values.shape[0] != plan.n_r:
        raise DomainError(f"expected {plan.n_r} samples, got {values.shape[0]}")
    return plan.matrix @ values


def hankel_2d(plan1, plan2, F):
    """Separable two-variable transform: ``hankel_1d`` along each axis of ``F``."""
    values = F(plan1.r[:, None], plan2.r[None, :]) if callable(F) else F
    values = np.asarray(values, dtype=float)
    if values.shape != (plan1.n_r, plan2.n_r):
        raise DomainError(f"expected shape {(plan1.n_r, plan2.n_r)}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DomainError("F must be finite on the grid")
    return plan1.matrix @ values @ plan2.matrix.T


def l2_norm_sq(values, weights):
    return float(np.sum(weights * np.abs(values) ** 2))


@dataclass(frozen=True)
class RatioIntegralReport:
    radii: np.ndarray
    l2_mass: np.ndarray
    ratio_integral: np.ndarray
    verdict: str
    growth: dict = field(default_factory=dict)


def _growth(values):
    if len(values) < 3 or values[-3] <= 0:
        return math.inf if len(values) >= 3 and values[-1] > 0 else 0.0
    return float(values[-1] / values[-3])


def equivalence_ratio_integral(model1, model2, extension, plan1, plan2=None, radii=None, threshold=4.0, floor=1e-14):
    """Truncated square-integrability diagnostics for an extension of the
    scaled covariance difference.

    For each truncation radius R the extension is restricted to [0, R]^2 and
    two quantities are recorded: its squared L2 mass and
    ``int int |H(kappa, iota)|**2 / (g1(kappa) g2(iota))`` where H is its
    two-variable Hankel transform.  The verdict is ``"diverges"`` when either
    sequence grows by at least ``threshold`` across the last two doublings.
    """
    plan2 = plan1 if plan2 is None else plan2
    g1 = spectral_eval(model1.spectral_density(), plan1.kappa)
    g2 = spectral_eval(model2.spectral_density(), plan2.kappa)
    if np.any(g1 <= 0) or np.any(g2 <= 0):
        raise DomainError("spectral densities must be positive on the frequency grid")
    ext = extension(plan1.r[:, None], plan2.r[None, :]) if callable(extension) else np.asarray(extension, float)
    if radii is None:
        top = min(plan1.r_max, plan2.r_max)
        radii = top / 2.0 ** np.arange(4, -1, -1)
    radii = np.asarray(radii, dtype=float)
    w_r = np.outer(plan1.r_weights, plan2.r_weights)
    w_k = np.outer(plan1.kappa_weights, plan2.kappa_weights) / np.outer(g1, g2)
    mass = np.empty(radii.size)
    ratio = np.empty(radii.size)
    for n, R in enumerate(radii):
        cut = ext * np.outer(plan1.r <= R, plan2.r <= R)
        mass[n] = float(np.sum(w_r * cut**2))
        h = hankel_2d(plan1, plan2, cut)
        ratio[n] = float(np.sum(w_k * h**2))
    growth = {"l2_mass": _growth(mass), "ratio_integral": _growth(ratio)}
    grows = any(g >= threshold for g in growth.values())
    verdict = "diverges" if grows and max(mass[-1], ratio[-1]) > floor else "converges"
    return RatioIntegralReport(radii, mass, ratio, verdict, growth)


def delta_square_mass(model1, model2, R):
    """``V(R) * int_{R^d} |k1 - k2|^2(u) du`` with V(R) the volume of [-R, R]^d.

    Since the inner integral does not depend on the outer variable, this is
    the squared L2 mass of the stationary difference over the box in one
    variable and all of R^d in the other.
    """
    if not R > 0:
        raise DomainError("R must be positive")
    if model1.dim != model2.dim:
        raise DomainError("models must share a dimension")
    d = model1.dim
    if model1 == model2:
        return 0.0
    t1, t2 = model1.theta, model2.theta
    tau_max = 80.0 / min(t1.alpha, t2.alpha)

    def integrand(tau):
        diff = t1.sigma2 * np.exp(-t1.alpha * tau) - t2.sigma2 * np.exp(-t2.alpha * tau)
        return tau ** (d - 1) * diff * diff

    # sphere_area(1) == 2 covers both half-lines
    inner = sphere_area(d) * adaptive_gauss_legendre(integrand, 0.0, tau_max, tol=1e-13)
    return (2.0 * R) ** d * inner
