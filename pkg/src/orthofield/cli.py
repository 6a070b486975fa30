"""Command-line entry point: ``orthofield <subcommand> --config PATH``."""

import argparse
import logging
from pathlib import Path
import sys

from .config import load_config
from .errors import ConfigError, OrthofieldError
from .experiments import DESIGN_STREAM, make_design, replicate_seed, run

SUBCOMMANDS = {
    "orthogonality": "orthogonality",
    "consistency": "consistency",
    "bounded-contrast": "bounded_contrast",
    "expansion-check": "expansion_check",
    "hankel-check": "hankel_check",
    "dump-design": None,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="orthofield", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path, help="run directory (default: config output_dir)")
    return parser


def _dump_design(cfg, out_dir):
    ps = make_design(cfg.design, cfg.d, cfg.n_max, replicate_seed(cfg.seed, 0, 0, DESIGN_STREAM))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "design.csv"
    ps.to_csv(path)
    print(f"wrote {len(ps)} points ({ps.provenance}, d={ps.dim}) to {path}")
    return 0


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors are execution errors; exit code 2 is reserved for failed flags
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        kind = SUBCOMMANDS[args.command]
        cfg = load_config(args.config, seed=args.seed)
        if kind is not None and cfg.kind != kind:
            raise ConfigError(f"subcommand {args.command} does not match config kind {cfg.kind!r}")
        out_dir = Path(args.out or cfg.output_dir)
        if kind is None:
            return _dump_design(cfg, out_dir)
        summary = run(cfg, out_dir)
    except (OrthofieldError, OSError) as exc:
        print(f"orthofield: error: {exc}", file=sys.stderr)
        return 1
    for name, value in summary.flags.items():
        print(f"{name}: {'pass' if value else ('n/a' if value is None else 'FAIL')}")
    print(f"summary written to {out_dir / 'summary.json'}")
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
