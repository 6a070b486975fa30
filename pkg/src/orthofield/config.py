"""Experiment configuration: schema, defaults and cross-field validation.

Configs are JSON or YAML mappings.  The schema below is the documented
contract; ``load_config`` applies defaults, validates, and checks that the
design can supply every requested prefix before any simulation starts.
"""

from dataclasses import asdict, dataclass, field, replace
import json
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .errors import ConfigError
from .io import config_hash

KINDS = ("orthogonality", "consistency", "bounded_contrast", "expansion_check", "hankel_check")

_pair = {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2}

_design = {
    "type": "object",
    "properties": {
        "type": {"enum": ["grid", "brownian", "bounded", "file"]},
        "extent": {"type": "number", "exclusiveMinimum": 0},
        "spacing": {"type": "number", "exclusiveMinimum": 0},
        "step": {"type": "number", "exclusiveMinimum": 0},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "n": {"type": "integer", "minimum": 1},
        "path": {"type": "string"},
    },
    "required": ["type"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "d": {"type": "integer", "minimum": 1, "maximum": 3},
        "theta0": _pair,
        "thetas": {"type": "array", "items": _pair},
        "design": _design,
        "contrast_design": _design,
        "replicates": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "prefixes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "mode": {"enum": ["sigma2_only", "joint"]},
        "box": {
            "type": "object",
            "properties": {"sigma2": _pair, "alpha": _pair},
            "additionalProperties": False,
        },
        "thresholds": {
            "type": "object",
            "properties": {
                "log_phi": {"type": "number"},
                "rmse_ratio": {"type": "number", "exclusiveMinimum": 0},
                "rmse_slack": {"type": "number", "minimum": 0},
                "iqr_floor": {"type": "number", "exclusiveMinimum": 0},
                "expansion_tol": {"type": "number", "exclusiveMinimum": 0},
                "reciprocity_tol": {"type": "number", "exclusiveMinimum": 0},
                "parseval_tol": {"type": "number", "exclusiveMinimum": 0},
                "closed_form_tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "cases": {"type": "array", "items": {"type": "object"}},
        "workers": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

DEFAULT_THRESHOLDS = {
    "log_phi": -10.0,
    "rmse_ratio": 0.5,
    "rmse_slack": 0.25,
    "iqr_floor": 0.5,
    "expansion_tol": 1e-3,
    "reciprocity_tol": 1e-3,
    "parseval_tol": 1e-4,
    "closed_form_tol": 1e-4,
}

DEFAULT_BOX = {"sigma2": [1e-3, 1e3], "alpha": [1e-3, 1e3]}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    d: int = 1
    theta0: tuple = (1.0, 1.0)
    thetas: tuple = ()
    design: dict = field(default_factory=lambda: {"type": "brownian", "step": 1.0})
    contrast_design: dict = field(default_factory=lambda: {"type": "brownian", "step": 1.0})
    replicates: int = 100
    seed: int = 0
    prefixes: tuple = (50, 200, 800)
    mode: str = "sigma2_only"
    box: dict = field(default_factory=lambda: dict(DEFAULT_BOX))
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    cases: tuple = None
    workers: int = 1
    output_dir: str = "runs"

    def to_dict(self):
        out = asdict(self)
        for key in ("theta0", "thetas", "prefixes", "cases"):
            if out[key] is not None:
                out[key] = json.loads(json.dumps(out[key]))
        return out

    def hash(self):
        """sha256 of the canonical JSON form, excluding where outputs go."""
        data = self.to_dict()
        data.pop("output_dir")
        data.pop("workers")
        return config_hash(data)

    @property
    def n_max(self):
        return max(self.prefixes)


def grid_size(d, extent, spacing):
    per_axis = int(np.floor(extent / spacing + 1e-9))
    return (2 * per_axis + 1) ** d - 1


def _design_size(design, d, name):
    kind = design["type"]
    if kind == "grid":
        for key in ("extent", "spacing"):
            if key not in design:
                raise ConfigError(f"{name}: grid design needs '{key}'")
        if design["spacing"] > design["extent"]:
            raise ConfigError(f"{name}: grid spacing exceeds extent")
        return grid_size(d, design["extent"], design["spacing"])
    if kind == "file":
        if "path" not in design:
            raise ConfigError(f"{name}: file design needs 'path'")
        path = Path(design["path"])
        if not path.is_file():
            raise ConfigError(f"{name}: design file {path} not found")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != d:
            raise ConfigError(f"{name}: design file has {data.shape[1]} coordinates, config says d={d}")
        return len(data)
    if kind == "bounded" and "radius" not in design:
        raise ConfigError(f"{name}: bounded design needs 'radius'")
    # random designs are generated with exactly n points
    return design.get("n")


def validate(cfg):
    """Cross-field checks that the schema cannot express."""
    pre = list(cfg.prefixes)
    if any(b < a for a, b in zip(pre, pre[1:])):
        raise ConfigError("prefix schedule must be non-decreasing")
    if cfg.kind in ("expansion_check", "hankel_check"):
        return cfg
    box = cfg.box
    for key in ("sigma2", "alpha"):
        lo, hi = box[key]
        if lo > hi:
            raise ConfigError(f"box bounds for {key} are reversed")
    designs = [("design", cfg.design)]
    if cfg.kind == "bounded_contrast":
        designs.append(("contrast_design", cfg.contrast_design))
        if cfg.design["type"] != "bounded":
            raise ConfigError("bounded_contrast needs a bounded design")
    for name, design in designs:
        size = _design_size(design, cfg.d, name)
        if size is not None and size < cfg.n_max:
            raise ConfigError(f"{name} supplies {size} points but prefixes need {cfg.n_max}")
    if cfg.kind == "orthogonality":
        if not cfg.thetas:
            raise ConfigError("orthogonality needs at least one comparison theta")
        if all(tuple(t) == tuple(cfg.theta0) for t in cfg.thetas):
            raise ConfigError("orthogonality needs a comparison theta different from theta0")
    if cfg.kind == "consistency" and cfg.mode != "sigma2_only":
        raise ConfigError("consistency runs estimate sigma2 with alpha known (mode sigma2_only)")
    return cfg


def from_mapping(data, **overrides):
    data = dict(data)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from None
    kw = dict(data)
    kw["thresholds"] = {**DEFAULT_THRESHOLDS, **data.get("thresholds", {})}
    kw["box"] = {**DEFAULT_BOX, **data.get("box", {})}
    for key in ("theta0", "prefixes"):
        if key in kw:
            kw[key] = tuple(kw[key])
    if "thetas" in kw:
        kw["thetas"] = tuple(tuple(t) for t in kw["thetas"])
    if "cases" in kw:
        kw["cases"] = tuple(kw["cases"])
    return validate(ExperimentConfig(**kw))


def load_config(path, **overrides):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return from_mapping(data, **overrides)


def with_overrides(cfg, **kw):
    return validate(replace(cfg, **{k: v for k, v in kw.items() if v is not None}))
