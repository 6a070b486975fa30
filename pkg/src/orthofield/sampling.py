"""Sampling designs: lattices, bounded random clouds and Brownian paths."""

from dataclasses import dataclass
import csv

import numpy as np
from scipy.spatial import cKDTree

from .errors import DesignSizeError, DomainError, EmptyDomainError

MERGE_TOL = 1e-9
DISTINCT_TOL = 1e-12
MAX_POINTS = 200_000

PROVENANCES = ("grid", "cloud", "bounded", "brownian", "file")


def merge_close(points, tol=MERGE_TOL):
    """Drop every point closer than ``tol`` to an earlier one (order preserved)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return points
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return points
    keep = np.ones(len(points), dtype=bool)
    # pairs come back with i < j; drop the later member
    for i, j in pairs[np.argsort(pairs[:, 0], kind="stable")]:
        if keep[i]:
            keep[j] = False
    return points[keep]


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered finite design in R^d.  Order defines prefixes downstream."""

    points: np.ndarray
    provenance: str = "cloud"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DomainError("points must be an (n, d) array")
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        if len(pts) > 1 and cKDTree(pts).query_pairs(DISTINCT_TOL):
            raise DomainError("points must be pairwise distinct")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def radii(self):
        return np.linalg.norm(self.points, axis=1)

    def prefix(self, n):
        return PointSet(self.points[:n], self.provenance)

    def permuted(self, perm):
        return PointSet(self.points[np.asarray(perm)], self.provenance)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{k}" for k in range(self.dim)])
            writer.writerows(self.points.tolist())

    @classmethod
    def from_csv(cls, path, provenance="file"):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data, provenance)


@dataclass(frozen=True)
class RadiiSet:
    radii: np.ndarray
    r_max: float
    max_gap: float


@dataclass(frozen=True, eq=False)
class BrownianPath:
    dim: int
    step: float
    horizon: float
    seed: int
    positions: np.ndarray

    @property
    def times(self):
        return self.step * np.arange(len(self.positions))

    def to_pointset(self, merge_tol=MERGE_TOL):
        """Path positions after time 0 (origin dropped), close revisits merged."""
        return PointSet(merge_close(self.positions[1:], merge_tol), "brownian")


def make_grid(d, extent, spacing, max_points=MAX_POINTS):
    """Lattice points of [-extent, extent]^d with the given spacing, origin removed.

    Points are listed in row-major order.
    """
    if not (extent > 0 and 0 < spacing <= extent):
        raise DomainError("need extent > 0 and 0 < spacing <= extent")
    per_axis = int(np.floor(extent / spacing + 1e-9))
    axis = spacing * np.arange(-per_axis, per_axis + 1)
    count = len(axis) ** d - 1
    if count > max_points:
        raise DesignSizeError(f"grid would hold {count} points (cap {max_points})")
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    mesh = mesh[np.any(mesh != 0.0, axis=1)]
    return PointSet(mesh, "grid")


def make_bounded_cloud(d, radius, n, seed):
    """``n`` i.i.d. uniform points in the ball of given radius, origin excluded."""
    if not (radius > 0 and n >= 1):
        raise DomainError("need radius > 0 and n >= 1")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal((n, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    # radial CDF of the uniform ball is (r / R)^d; 1 - U keeps r > 0
    r = radius * (1.0 - rng.random(n)) ** (1.0 / d)
    return PointSet(merge_close(direction * r[:, None]), "bounded")


def sample_brownian(d, step, horizon, seed):
    """Brownian path on the time grid ``k * step`` up to ``horizon``, starting at 0."""
    if not (step > 0 and horizon >= step):
        raise DomainError("need step > 0 and horizon >= step")
    n_steps = int(np.floor(horizon / step + 1e-9))
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal((n_steps, d)) * np.sqrt(step)
    positions = np.vstack([np.zeros((1, d)), np.cumsum(inc, axis=0)])
    return BrownianPath(d, float(step), float(horizon), seed, positions)


def radii_coverage(ps, r_max):
    """Sorted radii in [0, r_max] and the largest uncovered gap.

    Gaps include the stretch from 0 to the smallest radius and from the
    largest radius up to ``r_max``.
    """
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    pts = ps.points if isinstance(ps, PointSet) else np.asarray(ps)
    r = np.sort(np.linalg.norm(pts, axis=1))
    r = r[r <= r_max]
    if r.size == 0:
        raise EmptyDomainError(f"no point within radius {r_max}")
    gaps = np.diff(np.concatenate([[0.0], r, [r_max]]))
    return RadiiSet(r, float(r_max), float(gaps.max()))
