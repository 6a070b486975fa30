"""Monte Carlo experiments and numerical validation suites.

Every run writes CSV tables plus ``summary.json`` into its run directory.
Verdicts are derived from the aggregate tables only, so
``recompute_flags(run_dir)`` reproduces them from disk.

Seed scheme: replicate ``r`` of arm ``a`` draws stream ``s`` (0 = design,
1 = field) from ``SeedSequence(seed, spawn_key=(a, r, s))``.  Replicates are
therefore independent of execution order and worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
import logging
import math
from pathlib import Path
import time

import numpy as np
from scipy.special import eval_genlaguerre

from . import _accel
from .config import ExperimentConfig
from .errors import DesignSizeError, DomainError, NumericalError
from .gaussml import Box, build_design, likelihood_ratio_trace, ml_estimate, simulate_field
from .io import read_table, write_json, write_table
from .kernels import CovarianceModel, Theta
from .sampling import PointSet, make_bounded_cloud, make_grid, sample_brownian
from .spectral import ExpansionConfig, HankelPlan, expansion_partial_sums, hankel_1d, l2_norm_sq

log = logging.getLogger(__name__)

SEED_SCHEME = "numpy.random.SeedSequence(seed, spawn_key=(arm, replicate, stream)); stream 0 = design, 1 = field"
DESIGN_STREAM, FIELD_STREAM = 0, 1
QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass
class RunSummary:
    kind: str
    config_hash: str
    seed: int
    stats: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self):
        return all(v is not False for v in self.flags.values())

    @property
    def exit_code(self):
        return 0 if self.passed else 2

    def to_dict(self):
        return {
            "kind": self.kind,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "seed_scheme": SEED_SCHEME,
            "backend": _accel.BACKEND,
            "stats": self.stats,
            "flags": self.flags,
            "passed": self.passed,
            "artifacts": self.artifacts,
            "notes": self.notes,
            "wall_clock_s": self.wall_clock,
        }


def replicate_seed(seed, arm, replicate, stream):
    return np.random.SeedSequence(seed, spawn_key=(arm, replicate, stream))


def _theta_key(theta):
    return f"sigma2={theta.sigma2:g},alpha={theta.alpha:g}"


def make_design(spec, d, n_max, seed):
    """PointSet for one replicate; random designs are trimmed to ``n_max`` points."""
    kind = spec["type"]
    if kind == "grid":
        return make_grid(d, spec["extent"], spec["spacing"])
    if kind == "file":
        ps = PointSet.from_csv(spec["path"])
        if ps.dim != d:
            raise DomainError(f"design file has dimension {ps.dim}, expected {d}")
        return ps
    n = spec.get("n", n_max)
    if kind == "bounded":
        ps = make_bounded_cloud(d, spec["radius"], n, seed)
    else:
        step = spec.get("step", 1.0)
        # a little headroom in case the separation filter merges revisits
        ps = sample_brownian(d, step, step * (n + 16), seed).to_pointset()
    if len(ps) < n:
        raise DesignSizeError(f"{kind} design kept {len(ps)} of {n} points after merging")
    return ps.prefix(n)


def _map(fn, items, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _finish(cfg, summary, out_dir, start):
    summary.wall_clock = time.perf_counter() - start
    write_json(Path(out_dir) / "summary.json", summary.to_dict())
    return summary


def _quantile_rows(values, prefixes, label):
    """values: (reps, n_prefix) -> rows of label + n + summary statistics."""
    rows = []
    qs = np.quantile(values, QUANTILES, axis=0)
    for k, n in enumerate(prefixes):
        rows.append([*label, int(n), *qs[:, k], float(np.mean(values[:, k]))])
    return rows


# orthogonality


def _ortho_replicate(cfg, rep):
    theta0 = Theta(*cfg.theta0)
    thetas = [Theta(*t) for t in cfg.thetas]
    ps = make_design(cfg.design, cfg.d, cfg.n_max, replicate_seed(cfg.seed, 0, rep, DESIGN_STREAM))
    design = build_design(ps.prefix(cfg.n_max), theta0)
    y = simulate_field(design, replicate_seed(cfg.seed, 0, rep, FIELD_STREAM))
    return likelihood_ratio_trace(design.points, theta0, thetas, y, cfg.prefixes).log_phi


def _ortho_fixed_design(cfg):
    """Deterministic designs: one factorisation per theta shared by all replicates."""
    theta0 = Theta(*cfg.theta0)
    thetas = [Theta(*t) for t in cfg.thetas]
    ps = make_design(cfg.design, cfg.d, cfg.n_max, None).prefix(cfg.n_max)
    design = build_design(ps, theta0)
    y = np.stack([simulate_field(design, replicate_seed(cfg.seed, 0, r, FIELD_STREAM)) for r in range(cfg.replicates)])
    return likelihood_ratio_trace(ps, theta0, thetas, y, cfg.prefixes).log_phi


def run_orthogonality(cfg, out_dir):
    start = time.perf_counter()
    out_dir = Path(out_dir)
    if cfg.design["type"] in ("grid", "file"):
        log_phi = _ortho_fixed_design(cfg)
    else:
        log_phi = np.stack(_map(partial(_ortho_replicate, cfg), range(cfg.replicates), cfg.workers))
    thetas = [Theta(*t) for t in cfg.thetas]
    pre = cfg.prefixes
    raw = [
        [r, int(n), th.sigma2, th.alpha, log_phi[r, t, k]]
        for r in range(cfg.replicates)
        for t, th in enumerate(thetas)
        for k, n in enumerate(pre)
    ]
    write_table(out_dir / "log_phi.csv", ["replicate", "n", "sigma2", "alpha", "log_phi"], raw)
    rows = []
    for t, th in enumerate(thetas):
        rows += _quantile_rows(log_phi[:, t, :], pre, [th.sigma2, th.alpha])
    write_table(out_dir / "log_phi_quantiles.csv", _QUANT_HEADER, rows)
    summary = RunSummary("orthogonality", cfg.hash(), cfg.seed)
    summary.artifacts = ["log_phi.csv", "log_phi_quantiles.csv"]
    summary.flags, summary.stats = _ortho_verdict(read_table(out_dir / "log_phi_quantiles.csv"), cfg)
    summary.stats["design"] = cfg.design
    return _finish(cfg, summary, out_dir, start)


_QUANT_HEADER = ["sigma2", "alpha", "n", "q10", "q25", "median", "q75", "q90", "mean"]


def _ortho_verdict(rows, cfg):
    theta0 = tuple(float(v) for v in cfg.theta0)
    groups = {}
    for r in rows:
        groups.setdefault((r["sigma2"], r["alpha"]), []).append(r)
    flags, medians = {}, {}
    for key, group in groups.items():
        label = _theta_key(Theta(*key))
        medians[label] = {int(r["n"]): r["median"] for r in group}
        if key == theta0:
            # control arm: the ratio cancels exactly, so every quantile is 0
            flags[f"control[{label}]"] = all(r[q] == 0.0 for r in group for q in ("q10", "median", "q90"))
        else:
            last = max(group, key=lambda r: r["n"])
            flags[f"decay[{label}]"] = bool(last["median"] < cfg.thresholds["log_phi"])
    return flags, {"median_log_phi": medians}


# consistency and bounded contrast


def _estimate_replicate(cfg, arm, spec, rep):
    theta0 = Theta(*cfg.theta0)
    ps = make_design(spec, cfg.d, cfg.n_max, replicate_seed(cfg.seed, arm, rep, DESIGN_STREAM))
    design = build_design(ps, theta0)
    y = simulate_field(design, replicate_seed(cfg.seed, arm, rep, FIELD_STREAM))
    box = Box(tuple(cfg.box["sigma2"]), tuple(cfg.box["alpha"]))
    fit = ml_estimate(ps, y, box, mode=cfg.mode, alpha0=theta0.alpha, prefixes=cfg.prefixes)
    return fit.estimates[:, 0], fit.clamped


def _estimate_arm(cfg, arm, spec):
    out = _map(partial(_estimate_replicate, cfg, arm, spec), range(cfg.replicates), cfg.workers)
    return np.stack([o[0] for o in out]), np.stack([o[1] for o in out])


_EST_HEADER = ["replicate", "n", "sigma2_hat", "clamped"]
_STAT_HEADER = ["n", "replicates", "rmse", "median", "q25", "q75", "iqr", "clamped_fraction"]


def _write_estimates(path, est, clamped, prefixes):
    rows = [
        [r, int(n), est[r, k], bool(clamped[r, k])]
        for r in range(est.shape[0])
        for k, n in enumerate(prefixes)
    ]
    write_table(path, _EST_HEADER, rows)


def _write_stats(path, est, clamped, prefixes, sigma2_0):
    reps = est.shape[0]
    rmse = np.sqrt(np.mean((est - sigma2_0) ** 2, axis=0))
    q25, med, q75 = np.quantile(est, (0.25, 0.5, 0.75), axis=0)
    iqr = q75 - q25 if reps > 1 else np.full(len(prefixes), np.nan)
    rows = [
        [int(n), reps, rmse[k], med[k], q25[k], q75[k], iqr[k], float(np.mean(clamped[:, k]))]
        for k, n in enumerate(prefixes)
    ]
    write_table(path, _STAT_HEADER, rows)


def rate_per_quadrupling(n1, v1, n2, v2):
    """Ratio ``v2 / v1`` rescaled to a fourfold increase of n."""
    if n2 == n1 or v1 <= 0:
        return math.nan
    return (v2 / v1) ** (math.log(4.0) / math.log(n2 / n1))


def _consistency_verdict(rows, cfg):
    th = cfg.thresholds
    limit = th["rmse_ratio"] * (1.0 + th["rmse_slack"])
    rates = []
    for a, b in zip(rows, rows[1:]):
        rate = rate_per_quadrupling(a["n"], a["rmse"], b["n"], b["rmse"])
        if not math.isnan(rate):
            rates.append(rate)
    stats = {
        "rmse": {int(r["n"]): r["rmse"] for r in rows},
        "rmse_rate_per_quadrupling": rates,
        "clamped_fraction": {int(r["n"]): r["clamped_fraction"] for r in rows},
    }
    flags = {"rmse_halving": all(r <= limit for r in rates) if rates else None}
    return flags, stats


def run_consistency(cfg, out_dir):
    start = time.perf_counter()
    out_dir = Path(out_dir)
    est, clamped = _estimate_arm(cfg, 0, cfg.design)
    _write_estimates(out_dir / "estimates.csv", est, clamped, cfg.prefixes)
    _write_stats(out_dir / "stats.csv", est, clamped, cfg.prefixes, cfg.theta0[0])
    summary = RunSummary("consistency", cfg.hash(), cfg.seed)
    summary.artifacts = ["estimates.csv", "stats.csv"]
    summary.flags, summary.stats = _consistency_verdict(read_table(out_dir / "stats.csv"), cfg)
    if np.any(clamped):
        summary.notes.append("some estimates were clamped to the sigma2 box; see clamped_fraction")
    return _finish(cfg, summary, out_dir, start)


def _iqr_ratio(rows):
    first, last = rows[0]["iqr"], rows[-1]["iqr"]
    if math.isnan(first) or math.isnan(last) or first <= 0:
        return math.nan
    return last / first


def _contrast_verdict(bounded_rows, brownian_rows, cfg):
    floor = cfg.thresholds["iqr_floor"]
    rb, rw = _iqr_ratio(bounded_rows), _iqr_ratio(brownian_rows)
    stats = {
        "iqr_bounded": {int(r["n"]): r["iqr"] for r in bounded_rows},
        "iqr_brownian": {int(r["n"]): r["iqr"] for r in brownian_rows},
        "iqr_ratio_bounded": rb,
        "iqr_ratio_brownian": rw,
    }
    flags = {
        "bounded_iqr_persists": None if math.isnan(rb) else bool(rb > floor),
        "brownian_iqr_shrinks": None if math.isnan(rw) else bool(rw < floor),
    }
    return flags, stats


def run_bounded_contrast(cfg, out_dir):
    start = time.perf_counter()
    out_dir = Path(out_dir)
    summary = RunSummary("bounded_contrast", cfg.hash(), cfg.seed)
    for arm, name, spec in ((0, "bounded", cfg.design), (1, "brownian", cfg.contrast_design)):
        est, clamped = _estimate_arm(cfg, arm, spec)
        _write_estimates(out_dir / f"{name}_estimates.csv", est, clamped, cfg.prefixes)
        _write_stats(out_dir / f"{name}_stats.csv", est, clamped, cfg.prefixes, cfg.theta0[0])
        summary.artifacts += [f"{name}_estimates.csv", f"{name}_stats.csv"]
    summary.flags, summary.stats = _contrast_verdict(
        read_table(out_dir / "bounded_stats.csv"), read_table(out_dir / "brownian_stats.csv"), cfg
    )
    if cfg.replicates < 2:
        summary.notes.append("IQR not computable with a single replicate")
    return _finish(cfg, summary, out_dir, start)


# validation suites

DEFAULT_EXPANSION_CASES = ({"name": "d2-default", "d": 2, "theta": [1.0, 1.0], "pairs": 20},)


def _random_points(rng, d, count, r_lo, r_hi):
    u = rng.standard_normal((count, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * rng.uniform(r_lo, r_hi, count)[:, None]


def expansion_case(case, seed):
    """Partial-sum errors at the requested degree for random point pairs."""
    d = int(case.get("d", 2))
    theta = Theta(*case.get("theta", (1.0, 1.0)))
    model = CovarianceModel(theta, d)
    cfg = ExpansionConfig.for_model(
        model,
        max_degree=int(case.get("max_degree", 40)),
        kappa_factor=float(case.get("kappa_factor", 40.0)),
        panels=int(case.get("panels", 128)),
    )
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(case.get("seed", 0)),)))
    r_lo, r_hi = case.get("radii", (0.2, 3.0))
    count = int(case.get("pairs", 20))
    x = _random_points(rng, d, count, r_lo, r_hi)
    y = _random_points(rng, d, count, r_lo, r_hi)
    approx = expansion_partial_sums(model, cfg, x, y)[-1]
    exact = model(np.linalg.norm(x - y, axis=1))
    return x, y, approx, exact


def _hankel_function(case):
    kind = case["function"]
    nu = float(case.get("nu", 0.0))
    if kind == "gaussian":
        f = lambda r: r ** (nu + 0.5) * np.exp(-0.5 * r * r)
        return nu, f, f
    if kind == "laguerre_gaussian":
        n = int(case.get("degree", 1))
        f = lambda r: r ** (nu + 0.5) * eval_genlaguerre(n, nu, r * r) * np.exp(-0.5 * r * r)
        return nu, f, lambda k: (-1) ** n * f(k)
    if kind == "sonine":
        mu = float(case.get("mu", 4.0))
        return nu, lambda r: np.where(r < 1.0, r ** (nu + 0.5) * np.clip(1.0 - r * r, 0.0, None) ** mu, 0.0), None
    if kind == "exp_sine":
        return 0.5, lambda r: np.exp(-r), lambda k: math.sqrt(2.0 / math.pi) * k / (1.0 + k * k)
    raise DomainError(f"unknown Hankel test function {kind!r}")


DEFAULT_HANKEL_CASES = (
    {"name": "gaussian-0", "function": "gaussian", "nu": 0.0},
    {"name": "gaussian-half", "function": "gaussian", "nu": 0.5},
    {"name": "laguerre-1-1", "function": "laguerre_gaussian", "nu": 1.0, "degree": 1},
    {"name": "sonine-0-4", "function": "sonine", "nu": 0.0, "mu": 4.0},
    {"name": "sonine-2-6", "function": "sonine", "nu": 2.0, "mu": 6.0},
    {"name": "exp-sine-pair", "function": "exp_sine", "r_max": 30.0, "kappa_max": 12.0, "checks": ["closed_form"]},
)


def hankel_case(case):
    """Reciprocity, Parseval and closed-form errors for one test function."""
    nu, f, closed = _hankel_function(case)
    plan = HankelPlan(
        nu,
        r_max=float(case.get("r_max", 24.0)),
        n_r=int(case.get("n_r", 512)),
        kappa_max=float(case.get("kappa_max", 24.0)),
        n_kappa=int(case.get("n_kappa", 512)),
    )
    checks = case.get("checks", ["reciprocity", "parseval", "closed_form"])
    fv = f(plan.r)
    g = hankel_1d(plan, fv)
    norm_f = l2_norm_sq(fv, plan.r_weights)
    out = {"reciprocity": math.nan, "parseval": math.nan, "closed_form": math.nan}
    if "reciprocity" in checks:
        back = hankel_1d(plan.inverse(), g)
        out["reciprocity"] = math.sqrt(l2_norm_sq(back - fv, plan.r_weights) / norm_f)
    if "parseval" in checks:
        out["parseval"] = abs(norm_f - l2_norm_sq(g, plan.kappa_weights)) / norm_f
    if "closed_form" in checks and closed is not None:
        exact = closed(plan.kappa)
        out["closed_form"] = float(np.max(np.abs(g - exact)) / np.max(np.abs(exact)))
    return out


def run_validation_suites(cfg, out_dir):
    start = time.perf_counter()
    out_dir = Path(out_dir)
    summary = RunSummary(cfg.kind, cfg.hash(), cfg.seed)
    th = cfg.thresholds
    if cfg.kind == "expansion_check":
        cases = DEFAULT_EXPANSION_CASES if cfg.cases is None else cfg.cases
        rows, worst = [], {}
        for i, case in enumerate(cases):
            name = case.get("name", f"case{i}")
            try:
                x, y, approx, exact = expansion_case(case, cfg.seed)
            except (DomainError, NumericalError) as exc:
                raise type(exc)(f"expansion case {name!r}: {exc}") from exc
            err = np.abs(approx - exact)
            worst[name] = float(err.max())
            for p in range(len(err)):
                rows.append([name, p, np.linalg.norm(x[p]), np.linalg.norm(y[p]), exact[p], approx[p], err[p]])
        write_table(out_dir / "expansion_errors.csv", ["case", "pair", "r_x", "r_y", "exact", "partial_sum", "abs_error"], rows)
        summary.artifacts = ["expansion_errors.csv"]
        summary.flags, summary.stats = _expansion_verdict(read_table(out_dir / "expansion_errors.csv"), th)
    elif cfg.kind == "hankel_check":
        cases = DEFAULT_HANKEL_CASES if cfg.cases is None else cfg.cases
        rows = []
        for i, case in enumerate(cases):
            name = case.get("name", f"case{i}")
            try:
                res = hankel_case(case)
            except (DomainError, NumericalError, KeyError) as exc:
                raise DomainError(f"hankel case {name!r}: {exc}") from exc
            rows.append([name, res["reciprocity"], res["parseval"], res["closed_form"]])
        write_table(out_dir / "hankel_errors.csv", ["case", "reciprocity", "parseval", "closed_form"], rows)
        summary.artifacts = ["hankel_errors.csv"]
        summary.flags, summary.stats = _hankel_verdict(read_table(out_dir / "hankel_errors.csv"), th)
    else:
        raise DomainError(f"{cfg.kind!r} is not a validation suite")
    return _finish(cfg, summary, out_dir, start)


def _expansion_verdict(rows, th):
    worst = {}
    for r in rows:
        worst[r["case"]] = max(worst.get(r["case"], 0.0), r["abs_error"])
    flags = {f"expansion[{k}]": v < th["expansion_tol"] for k, v in worst.items()}
    return flags, {"max_abs_error": worst}


def _hankel_verdict(rows, th):
    flags, stats = {}, {}
    limits = {"reciprocity": th["reciprocity_tol"], "parseval": th["parseval_tol"], "closed_form": th["closed_form_tol"]}
    for r in rows:
        stats[r["case"]] = {k: r[k] for k in limits}
        for k, tol in limits.items():
            if not math.isnan(r[k]):
                flags[f"{k}[{r['case']}]"] = r[k] < tol
    return flags, stats


RUNNERS = {
    "orthogonality": run_orthogonality,
    "consistency": run_consistency,
    "bounded_contrast": run_bounded_contrast,
    "expansion_check": run_validation_suites,
    "hankel_check": run_validation_suites,
}


def run(cfg, out_dir=None):
    out_dir = Path(out_dir or cfg.output_dir)
    log.info("running %s (config %s) into %s", cfg.kind, cfg.hash()[:12], out_dir)
    return RUNNERS[cfg.kind](cfg, out_dir)


def recompute_flags(run_dir, cfg):
    """Re-derive the verdicts of a finished run from its CSV tables."""
    run_dir = Path(run_dir)
    if cfg.kind == "orthogonality":
        return _ortho_verdict(read_table(run_dir / "log_phi_quantiles.csv"), cfg)[0]
    if cfg.kind == "consistency":
        return _consistency_verdict(read_table(run_dir / "stats.csv"), cfg)[0]
    if cfg.kind == "bounded_contrast":
        return _contrast_verdict(
            read_table(run_dir / "bounded_stats.csv"), read_table(run_dir / "brownian_stats.csv"), cfg
        )[0]
    if cfg.kind == "expansion_check":
        return _expansion_verdict(read_table(run_dir / "expansion_errors.csv"), cfg.thresholds)[0]
    return _hankel_verdict(read_table(run_dir / "hankel_errors.csv"), cfg.thresholds)[0]
