"""Command line interface: ``dgch run|converge|preset``."""
import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, parse_config, preset_config, serialize_config
from .io import write_convergence_report
from .model import PRESET_NAMES
from .runner import convergence_study, default_output_dir, run_to_directory
from .solver import StepFailure


def _load(path):
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def cmd_run(args):
    cfg = _load(args.config)
    out = Path(args.out) if args.out else None
    result = run_to_directory(cfg, out)
    s = result.series
    print(f"t={s.times[-1]:.6g} energy={s.energy[-1]:.10g} mass={s.mass[-1]:.10g}")
    return 0


def cmd_converge(args):
    cfg = _load(args.config)
    rows = convergence_study(cfg, args.levels)
    out = Path(args.out or cfg.out_dir or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    path = write_convergence_report(rows, out / "convergence.csv")
    for label, dof, err, order in rows:
        print(f"{label:>8} {dof:>7d} {err:.4e} {'-' if order is None else f'{order:.2f}'}")
    print(f"report written to {path}")
    return 0


def cmd_preset(args):
    if args.show:
        print(serialize_config(preset_config(args.show)), end="")
    else:
        for name in PRESET_NAMES:
            print(name)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="dgch", description="SIPG/AVF Cahn-Hilliard solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: $DGCH_OUTPUT_DIR or ./dgch-output)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("converge", help="mesh-refinement study against the exact solution")
    p.add_argument("--config", required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("preset", help="list presets or print one as a config file")
    p.add_argument("--list", action="store_true")
    p.add_argument("--show", metavar="NAME", choices=PRESET_NAMES)
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StepFailure as exc:
        print(f"step failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
