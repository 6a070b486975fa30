"""Exact Gaussian likelihood on finite designs.

Every quantity indexed by a prefix size n (likelihood, likelihood ratio,
variance estimate) is read off one Cholesky factor of the full design: the
leading n x n block of that factor is the factor of the n-point covariance,
and the forward solve for the first n observations is the prefix of the full
forward solve.
"""

from dataclasses import dataclass, field
import csv
import math

import numpy as np
from scipy.linalg import lapack, solve_triangular
from scipy.optimize import minimize

from .errors import ConvergenceError, DomainError, IndefiniteMatrixError
from .kernels import CovarianceModel, Theta
from .sampling import PointSet


LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class GaussianDesign:
    points: PointSet
    theta: Theta
    cov: np.ndarray
    chol: np.ndarray
    logdet: float

    @property
    def n(self):
        return len(self.points)


def _cholesky(mat):
    factor, info = lapack.dpotrf(mat, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise IndefiniteMatrixError(
            f"covariance matrix is not positive definite (pivot {info} <= 0); "
            "check for near-duplicate points",
            {"pivot": int(info), "n": mat.shape[0]},
        )
    if info < 0:
        raise ValueError(f"dpotrf rejected argument {-info}")
    return factor


def build_design(ps, theta):
    """Covariance matrix, lower Cholesky factor and log-determinant for ``ps``."""
    pts = ps.points if isinstance(ps, PointSet) else np.asarray(ps, float)
    if not isinstance(ps, PointSet):
        ps = PointSet(pts)
    cov = CovarianceModel(theta, ps.dim).matrix(ps.points)
    chol = _cholesky(cov)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return GaussianDesign(ps, theta, cov, chol, logdet)


def simulate_field(design, seed, size=None):
    """Zero-mean draw ``L z`` with ``z`` standard normal; ``size`` stacks replicates."""
    rng = np.random.default_rng(seed)
    if size is None:
        return design.chol @ rng.standard_normal(design.n)
    return (design.chol @ rng.standard_normal((design.n, size))).T


def _as_obs(y, n):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != n:
        raise DomainError(f"observation length {y.shape[-1]} does not match design size {n}")
    return y


def _whiten(chol, y):
    """Forward solve ``L z = y`` for one vector or a (reps, n) stack."""
    return solve_triangular(chol, y.T, lower=True, check_finite=False).T


def log_likelihood(design, y):
    """Log density of ``y`` under N(0, Sigma); vectorised over leading axes."""
    y = _as_obs(y, design.n)
    z = _whiten(design.chol, y)
    return -0.5 * (design.n * LOG_2PI + design.logdet) - 0.5 * np.sum(z * z, axis=-1)


def _check_prefixes(prefixes, n_total):
    pre = np.asarray(prefixes, dtype=int)
    if pre.ndim != 1 or pre.size == 0 or pre.min() < 1 or pre.max() > n_total:
        raise DomainError(f"prefixes must lie in [1, {n_total}]")
    return pre


def prefix_log_likelihoods(design, y, prefixes):
    """``log p_n`` for every requested prefix size n; shape (..., len(prefixes))."""
    y = _as_obs(y, design.n)
    pre = _check_prefixes(prefixes, design.n)
    z = _whiten(design.chol, y)
    quad = np.cumsum(z * z, axis=-1)[..., pre - 1]
    half_logdet = np.cumsum(np.log(np.diag(design.chol)))[pre - 1]
    return -0.5 * pre * LOG_2PI - half_logdet - 0.5 * quad


@dataclass(frozen=True, eq=False)
class RatioTrace:
    """``log_phi[..., t, k]`` is log phi_n for ``thetas[t]`` and ``prefixes[k]``;
    a leading axis, when present, indexes replicates."""

    theta0: Theta
    thetas: tuple
    prefixes: np.ndarray
    log_phi: np.ndarray

    @property
    def phi(self):
        return np.exp(self.log_phi)

    def rows(self):
        lp = self.log_phi if self.log_phi.ndim == 3 else self.log_phi[None]
        for rep in range(lp.shape[0]):
            for t, th in enumerate(self.thetas):
                for k, n in enumerate(self.prefixes):
                    yield rep, int(n), th.sigma2, th.alpha, float(lp[rep, t, k])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "n", "sigma2", "alpha", "log_phi"])
            for row in self.rows():
                w.writerow([row[0], row[1], repr(row[2]), repr(row[3]), repr(row[4])])


def likelihood_ratio_trace(ps, theta0, thetas, y, prefixes):
    """log phi_n(theta) = log p_n(theta) - log p_n(theta0) along nested prefixes.

    Equal parameters share one computation, so phi_n(theta0) is exactly 1.
    """
    pre = _check_prefixes(prefixes, len(ps))
    y = _as_obs(y, len(ps))
    cache = {}

    def lp(theta):
        key = theta.as_tuple()
        if key not in cache:
            try:
                design = build_design(ps, theta)
            except IndefiniteMatrixError as exc:
                pivot = exc.diagnostics.get("pivot")
                bad = int(pre[np.searchsorted(pre, pivot)]) if pivot <= pre[-1] else None
                exc.diagnostics["prefix"] = bad
                raise
            cache[key] = prefix_log_likelihoods(design, y, pre)
        return cache[key]

    base = lp(theta0)
    stacked = np.stack([lp(th) - base for th in thetas], axis=-2)
    return RatioTrace(theta0, tuple(thetas), pre, stacked)


@dataclass(frozen=True)
class Box:
    sigma2: tuple
    alpha: tuple

    def __post_init__(self):
        for name in ("sigma2", "alpha"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise DomainError(f"box bounds for {name} must satisfy 0 < lo <= hi < inf")
            object.__setattr__(self, name, (lo, hi))

    def contains(self, theta):
        return (
            self.sigma2[0] <= theta.sigma2 <= self.sigma2[1]
            and self.alpha[0] <= theta.alpha <= self.alpha[1]
        )

    def log_bounds(self):
        return [tuple(np.log(self.sigma2)), tuple(np.log(self.alpha))]

    def center(self):
        return Theta(math.sqrt(self.sigma2[0] * self.sigma2[1]), math.sqrt(self.alpha[0] * self.alpha[1]))


@dataclass(frozen=True, eq=False)
class MlFit:
    mode: str
    box: Box
    prefixes: np.ndarray
    estimates: np.ndarray  # (len(prefixes), 2): sigma2, alpha
    clamped: np.ndarray
    trace: list = field(default_factory=list)

    def theta(self, k=-1):
        return Theta(*self.estimates[k])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "sigma2_hat", "alpha_hat", "clamped"])
            for n, (s2, a), c in zip(self.prefixes, self.estimates, self.clamped):
                w.writerow([int(n), repr(float(s2)), repr(float(a)), int(c)])


def sigma2_closed_form(ps, y, alpha0, prefixes):
    """Unconstrained ``y' R(alpha0)^{-1} y / n`` for each prefix; vectorised over replicates."""
    pre = _check_prefixes(prefixes, len(ps))
    y = _as_obs(y, len(ps))
    design = build_design(ps, Theta(1.0, alpha0))
    z = _whiten(design.chol, y)
    return np.cumsum(z * z, axis=-1)[..., pre - 1] / pre


def _neg_loglik(log_params, ps_n, y_n, cache):
    s2, a = np.exp(log_params)
    if a not in cache:
        d = build_design(ps_n, Theta(1.0, a))
        z = _whiten(d.chol, y_n)
        cache.clear()
        cache[a] = (d.logdet, float(z @ z))
    logdet_r, q = cache[a]
    n = len(y_n)
    return 0.5 * (n * LOG_2PI + n * math.log(s2) + logdet_r + q / s2)


def _inward_simplex(x0, lo, hi):
    """Initial simplex stepping a tenth of the box width from ``x0`` toward the centre.

    scipy's default simplex is relative to ``x0`` and collapses onto a box corner
    once the bounds clip it.
    """
    step = 0.1 * (hi - lo)
    sign = np.where(x0 > 0.5 * (lo + hi), -1.0, 1.0)
    simplex = np.repeat(x0[None, :], x0.size + 1, axis=0)
    simplex[1:] += np.diag(sign * step)
    return simplex


def _fit_joint(ps_n, y_n, box, freeze_alpha, alpha0, maxiter):
    cache = {}
    if freeze_alpha:
        bounds = [tuple(np.log(box.sigma2))]
        fun = lambda u: _neg_loglik(np.array([u[0], math.log(alpha0)]), ps_n, y_n, cache)
    else:
        bounds = box.log_bounds()
        fun = lambda u: _neg_loglik(u, ps_n, y_n, cache)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    if np.any(hi <= lo):
        raise DomainError("joint search needs a sigma2 interval of positive width")
    runs = []
    for x0 in (lo, hi, 0.5 * (lo + hi)):
        res = minimize(
            fun,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "maxiter": maxiter,
                "xatol": 1e-8,
                "fatol": 1e-10,
                "adaptive": True,
                "initial_simplex": _inward_simplex(x0, lo, hi),
            },
        )
        runs.append(res)
    runs.sort(key=lambda r: (float(r.fun), tuple(np.asarray(r.x, float))))
    best = runs[0]
    x = np.exp(best.x)
    est = np.array([x[0], alpha0]) if freeze_alpha else x
    info = {"nfev": int(sum(r.nfev for r in runs)), "success": bool(best.success), "neg_loglik": float(best.fun)}
    if not best.success:
        raise ConvergenceError(
            f"Nelder-Mead did not converge within {maxiter} iterations",
            best=Theta(*est),
            diagnostics=info,
        )
    return est, info


def ml_estimate(ps, y, box, mode="sigma2_only", alpha0=None, prefixes=None, freeze_alpha=False, maxiter=2000):
    """Maximum-likelihood estimates over ``box`` for each prefix size.

    ``sigma2_only`` uses the closed form with ``alpha0`` known, projected onto
    the sigma2 interval.  ``joint`` runs bounded Nelder-Mead in
    (log sigma2, log alpha) from the two box corners and the centre, keeping
    the lowest objective (ties: smallest parameters); ``freeze_alpha`` holds
    alpha at ``alpha0`` and searches sigma2 alone.
    """
    if mode not in ("sigma2_only", "joint"):
        raise DomainError(f"unknown mode {mode!r}")
    y = _as_obs(y, len(ps))
    pre = _check_prefixes([len(ps)] if prefixes is None else prefixes, len(ps))
    if (mode == "sigma2_only" or freeze_alpha) and alpha0 is None:
        raise DomainError("alpha0 is required when alpha is not estimated")
    trace = []
    if mode == "sigma2_only":
        raw = sigma2_closed_form(ps, y, alpha0, pre)
        s2 = np.clip(raw, *box.sigma2)
        est = np.column_stack([s2, np.full(pre.size, float(alpha0))])
        clamped = raw != s2
        trace = [{"n": int(n), "sigma2_raw": float(r)} for n, r in zip(pre, raw)]
        return MlFit(mode, box, pre, est, clamped, trace)
    if box.alpha[0] == box.alpha[1]:
        freeze_alpha, alpha0 = True, box.alpha[0]
    est = np.empty((pre.size, 2))
    for k, n in enumerate(pre):
        est[k], info = _fit_joint(ps.prefix(int(n)), y[: int(n)], box, freeze_alpha, alpha0, maxiter)
        trace.append({"n": int(n), **info})
    lo = np.array([box.sigma2[0], box.alpha[0]])
    hi = np.array([box.sigma2[1], box.alpha[1]])
    clamped = np.any(np.isclose(est, lo, rtol=1e-7) | np.isclose(est, hi, rtol=1e-7), axis=1)
    return MlFit(mode, box, pre, est, clamped, trace)


@dataclass(frozen=True)
class ConcavityReport:
    coords: str
    grid: tuple
    counts: dict  # direction -> (violations, interior triples)

    @property
    def violations(self):
        return sum(v for v, _ in self.counts.values())

    @property
    def total(self):
        return sum(t for _, t in self.counts.values())

    @property
    def fraction(self):
        return self.violations / self.total if self.total else 0.0


_COORDS = {
    "natural": (lambda v: v, lambda u: u),
    "precision": (lambda v: 1.0 / v, lambda u: 1.0 / u),
    "log": (np.log, np.exp),
}


def _axis_grid(bounds, k, coords):
    fwd, inv = _COORDS[coords]
    a, b = sorted((fwd(bounds[0]), fwd(bounds[1])))
    u = np.linspace(a, b, k)
    return u, inv(u)


def _midpoint_violations(F, rtol):
    scale = max(float(np.max(np.abs(F))), 1.0)
    tol = rtol * scale

    def count(a, mid, b):
        bad = mid < 0.5 * (a + b) - tol
        return int(bad.sum()), int(bad.size)

    if F.ndim == 1:
        return {"sigma2": count(F[:-2], F[1:-1], F[2:])}
    return {
        "sigma2": count(F[:-2, :], F[1:-1, :], F[2:, :]),
        "alpha": count(F[:, :-2], F[:, 1:-1], F[:, 2:]),
        "diagonal": count(F[:-2, :-2], F[1:-1, 1:-1], F[2:, 2:]),
        "antidiagonal": count(F[:-2, 2:], F[1:-1, 1:-1], F[2:, :-2]),
    }


def log_concavity_probe(ps, y, box, grid_k, theta0=None, coords="natural", objective=None, rtol=1e-10):
    """Midpoint-concavity audit of ``theta -> log phi_n(theta)`` on a regular grid.

    The grid is uniform in the chosen coordinates (``natural``, ``precision``
    = 1/sigma2, or ``log``).  A degenerate alpha interval gives a 1-D probe in
    sigma2.  ``objective(u, v)`` (or ``objective(u)`` in 1-D), evaluated in grid
    coordinates, replaces the log-likelihood ratio.
    """
    if grid_k < 3:
        raise DomainError("grid_k must be >= 3")
    if coords not in _COORDS:
        raise DomainError(f"unknown coordinates {coords!r}")
    one_d = box.alpha[0] == box.alpha[1]
    u, s2 = _axis_grid(box.sigma2, grid_k, coords)
    if one_d:
        alpha = box.alpha[0]
        if objective is not None:
            F = np.array([objective(x) for x in u], dtype=float)
        else:
            theta0 = theta0 or Theta(s2[grid_k // 2], alpha)
            design = build_design(ps, Theta(1.0, alpha))
            z = _whiten(design.chol, _as_obs(y, len(ps)))
            n, q = len(ps), float(z @ z)
            lp = lambda v: -0.5 * (n * LOG_2PI + n * math.log(v) + design.logdet + q / v)
            F = np.array([lp(v) for v in s2]) - (lp(theta0.sigma2) if theta0.alpha == alpha else 0.0)
        return ConcavityReport(coords, (grid_k,), _midpoint_violations(F, rtol))
    v, al = _axis_grid(box.alpha, grid_k, "log" if coords == "log" else "natural")
    if objective is not None:
        F = np.array([[objective(a, b) for b in v] for a in u], dtype=float)
    else:
        theta0 = theta0 or box.center()
        base = float(log_likelihood(build_design(ps, theta0), y))
        F = np.empty((grid_k, grid_k))
        for j, a in enumerate(al):
            design = build_design(ps, Theta(1.0, a))
            z = _whiten(design.chol, _as_obs(y, len(ps)))
            n, q = len(ps), float(z @ z)
            F[:, j] = -0.5 * (n * LOG_2PI + n * np.log(s2) + design.logdet + q / s2) - base
    return ConcavityReport(coords, (grid_k, grid_k), _midpoint_violations(F, rtol))
