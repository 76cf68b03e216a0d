"""Command line entry point.

    sgbutterfly simulate --config run.cfg [--out rows.csv] [--format csv|json]
    sgbutterfly fig3|fig4|fig5 [--out table.csv]
    sgbutterfly validate [--seed N] [--cases N]

Exit codes: 0 success, 1 config error, 2 physics or validation failure.
"""

import argparse
import sys

from .model import SimulationError
from . import sweeps

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2

FIGURES = {"fig3": sweeps.fig3_table, "fig4": sweeps.fig4_table, "fig5": sweeps.fig5_table}


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _simulate(args):
    try:
        with open(args.config) as fh:
            cfg = sweeps.parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except sweeps.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        columns, rows = sweeps.run_config(cfg)
    except SimulationError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    writer = sweeps.to_json if args.format == "json" else sweeps.to_csv
    _emit(writer(columns, rows), args.out)
    return EXIT_OK


def _figure(args):
    columns, rows = FIGURES[args.command]()
    _emit(sweeps.to_csv(columns, rows), args.out)
    return EXIT_OK


def _validate(args):
    if args.cases < 1:
        print("config error: --cases must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    errors = sweeps.validate(cases=args.cases, seed=args.seed)
    for name, value in errors.items():
        print(f"{name:18s} {value:.3e}")
    ok = sweeps.validation_passed(errors)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_PHYSICS


def build_parser():
    parser = argparse.ArgumentParser(prog="sgbutterfly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a config file (optionally a sweep)")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.set_defaults(func=_simulate)

    for name in FIGURES:
        fig = sub.add_parser(name, help=f"emit the {name} table as CSV")
        fig.add_argument("--out")
        fig.set_defaults(func=_figure)

    val = sub.add_parser("validate", help="closed form vs RK4 oracle on random segments")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--cases", type=int, default=1000)
    val.set_defaults(func=_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
