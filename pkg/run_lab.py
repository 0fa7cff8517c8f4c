"""
Command line entry for the strain G-equation lab

Reads a JSON experiment config (the golden periodic config when none is given), applies
flag overrides and runs one subcommand. Exit status is 0 when every verdict passes,
1 when any check fails and 2 for a config error.

    python run_lab.py validate --config golden.json
    python run_lab.py strain-curve --m 0.6 --n 0.8 --c-min 0 --c-max 2 --c-steps 21
    python run_lab.py simulate --grid 256 --T 4 --c 0.2
"""

import argparse
import logging
import sys

import numpy as np

from assembly.commands import COMMANDS, run_subcommand
from assembly.config import ConfigError, ExperimentConfig

logger = logging.getLogger("run_lab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run_lab", description="Strain G-equation lab")
    parser.add_argument("command", choices=list(COMMANDS), help="subcommand to run")
    parser.add_argument("--config", help="JSON experiment config, Default: golden periodic config")
    parser.add_argument("--output-dir", help="artifact directory")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    slope = parser.add_argument_group("slope and Markstein grid")
    slope.add_argument("--m", type=float, help="horizontal slope component")
    slope.add_argument("--n", type=float, help="vertical slope component")
    slope.add_argument("--c-min", type=float)
    slope.add_argument("--c-max", type=float)
    slope.add_argument("--c-steps", type=int)
    slope.add_argument("--c", type=float, help="single Markstein number, replaces the grid")
    slope.add_argument("--window", type=float, help="averaging window L")

    disc = parser.add_argument_group("discount solver")
    disc.add_argument("--delta", type=float, action="append", help="discount rate, repeat for a list")
    disc.add_argument("--grid-step", type=float)
    disc.add_argument("--domain", type=float)
    disc.add_argument("--theta-override", type=float)

    sim = parser.add_argument_group("front simulation")
    sim.add_argument("--grid", type=int, help="cells per side")
    sim.add_argument("--T", type=float, help="simulated time")
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Replace config values with the flags that were given"""
    c_list = None
    if args.c is not None:
        c_list = (args.c,)
    elif any(val is not None for val in (args.c_min, args.c_max, args.c_steps)):
        c_min = config.c_list[0] if args.c_min is None else args.c_min
        c_max = config.c_list[-1] if args.c_max is None else args.c_max
        steps = len(config.c_list) if args.c_steps is None else args.c_steps
        if steps < 1 or c_max < c_min:
            raise ConfigError("c_grid: need c_steps ≥ 1 and c_max ≥ c_min")
        c_list = tuple(float(c) for c in np.linspace(c_min, c_max, steps))

    return config.override(
        m=args.m,
        n=args.n,
        c_list=c_list,
        window=args.window,
        deltas=tuple(args.delta) if args.delta else None,
        grid_step=args.grid_step,
        domain=args.domain,
        theta_override=args.theta_override,
        sim_grid=args.grid,
        sim_T=args.T,
        output_dir=args.output_dir,
    )


def main(argv: list | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig.golden()
        config = apply_overrides(config, args)
        paths, status = run_subcommand(args.command, config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    for path in paths:
        print(f"wrote {path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
