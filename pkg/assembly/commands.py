"""Lab Subcommands

Each subcommand reads an ExperimentConfig, writes its CSV and JSON artifacts into the
output directory and returns the written paths with an exit status. Rerunning a
subcommand on the same config overwrites the same files with the same bytes.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from assembly.config import ConfigError, ExperimentConfig
from assembly.validate import FAIL, PASS, SKIP, run_validate
from field.shear import sample_field, sample_table
from front.frontsim import FrontState, evolve, flow_height
from hamilton.hamiltonian import StrainHamiltonian, hamiltonian_surface
from homog.discount import vanishing_discount_estimate
from homog.effective import EffectiveHamiltonian
from strain.curve import check_lipschitz, max_increase, oriented_pair, strain_curve
from strain.quench import UndefinedThresholdError, quench_threshold
from strain.theorem import main_theorem_check

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(df: pd.DataFrame, path: Path) -> Path:
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def _write_json(data: dict, path: Path) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote {path}")
    return path


def _oriented(config: ExperimentConfig, name: str):
    """Realization, oriented pair and slope n, the subcommand needs m ≠ 0"""
    if config.m == 0:
        raise ConfigError(f"slope.m: {name} needs m ≠ 0, the m = 0 slope has h ≡ 1")
    real = sample_field(config.field)
    pair, n = oriented_pair(real, config.m, config.n)
    return real, pair, n


def cmd_effective(config: ExperimentConfig) -> tuple[list, int]:
    """H̄(p, c) over the p grid and the P± branch table, one block per Markstein number"""
    real, pair, n = _oriented(config, "effective")
    window = config.window or real.default_window
    curves, tables = [], []
    for c in config.c_list:
        eff = EffectiveHamiltonian(StrainHamiltonian(config.m, c, pair), window, **config.eff_kw)
        curve = eff.curve_frame(config.p_ray)
        curve.insert(0, "c", c)
        table = eff.book.to_frame()
        table.insert(0, "c", c)
        curves.append(curve)
        tables.append(table)
        logger.info(f"c = {c}: H* = {eff.h_star:.10f}, flat piece [{eff.p_bar[0]:.10f}, {eff.p_bar[1]:.10f}]")

    out = _out_dir(config)
    paths = [
        _write_csv(pd.concat(curves, ignore_index=True), out / "effective.csv"),
        _write_csv(pd.concat(tables, ignore_index=True), out / "branches.csv"),
    ]
    return paths, 0


def cmd_strain_curve(config: ExperimentConfig) -> tuple[list, int]:
    """h(c) over the config grid with a verdict file for the curve properties"""
    real, pair, n = _oriented(config, "strain-curve")
    if config.n == 0:
        raise ConfigError("slope.n: strain-curve needs n ≠ 0, the n = 0 slope has h ≡ H̄*")
    window = config.window or real.default_window
    curve = strain_curve(real, config.m, config.n, config.c_list, window, **config.eff_kw)
    report = main_theorem_check(real, config.m, config.n, config.c_list, window, **config.eff_kw)
    print(curve)

    try:
        c_bar = quench_threshold(pair.stats(window), config.m, n)
    except UndefinedThresholdError:
        c_bar = None

    verdicts = {
        "lipschitz": {"value": check_lipschitz(curve), "status": PASS} if len(curve) > 1 else {"status": SKIP},
        "monotone": {"value": max_increase(curve), "status": PASS} if len(curve) > 1 else {"status": SKIP},
        "sandwich": {"status": PASS if report.sandwich_ok else FAIL},
        "strict_reduction": {"status": PASS if report.strict_ok else FAIL, "reduces": report.reduces},
        "quench": {"c_bar": c_bar, "c_star": curve.c_star},
    }
    if len(curve) > 1:
        verdicts["lipschitz"]["status"] = PASS if verdicts["lipschitz"]["value"] <= 1.05 else FAIL
        verdicts["monotone"]["status"] = PASS if verdicts["monotone"]["value"] <= 1e-3 else FAIL
    if c_bar and curve.c_star is not None:
        verdicts["quench"]["ratio"] = curve.c_star / c_bar

    out = _out_dir(config)
    paths = [
        _write_csv(curve.to_frame(), out / "strain_curve.csv"),
        _write_json({"h_star": curve.h_star, "s_norm": curve.s_norm, "window": window, "checks": verdicts}, out / "strain_verdicts.json"),
    ]
    failed = any(v.get("status") == FAIL for v in verdicts.values())
    return paths, 1 if failed else 0


def cmd_discount(config: ExperimentConfig) -> tuple[list, int]:
    """Vanishing discount estimates of H̄(n, c), extrapolated rows carry δ = 0"""
    real, pair, n = _oriented(config, "discount")
    window = config.window or real.default_window
    rows = []
    for c in config.c_list:
        h = StrainHamiltonian(config.m, c, pair)
        est, limit = vanishing_discount_estimate(h, n, config.deltas, config.grid_step, config.domain, config.theta_override, window)
        rows += [{"c": c, "delta": delta, "estimate": value} for delta, value in est]
        rows.append({"c": c, "delta": 0.0, "estimate": limit})
        logger.info(f"c = {c}: discount limit {limit:.10f}")

    out = _out_dir(config)
    return [_write_csv(pd.DataFrame(rows), out / "discount.csv")], 0


def cmd_simulate(config: ExperimentConfig) -> tuple[list, int]:
    """Front simulation at the first config Markstein number"""
    real = sample_field(config.field)
    c = config.c_list[0]
    state = FrontState.linear(config.m, config.n, config.sim_grid, flow_height(real))
    final, book = evolve(state, real, c, config.sim_T, config.sim_cfl)
    speed = book.extrapolated_speed()
    print(f"Front speed {speed:.8f} at c = {c} on a {config.sim_grid} x {config.sim_grid} grid")

    out = _out_dir(config)
    bin_path, head_path = final.write(out / "front")
    return [_write_csv(book.to_frame(), out / "speed.csv"), bin_path, head_path], 0


def cmd_validate(config: ExperimentConfig) -> tuple[list, int]:
    """Full invariant suite, manifest.json plus timings.json"""
    manifest = run_validate(config)
    print(manifest)
    paths = manifest.write(_out_dir(config))
    return list(paths), manifest.exit_code


def cmd_dump_field(config: ExperimentConfig) -> tuple[list, int]:
    """Sampled (x, v, v') over the window, 32 samples per shortest wavelength"""
    real = sample_field(config.field)
    window = config.window or real.default_window
    samples = max(2001, int(np.ceil(window * 32 * real.fmax)) + 1)
    out = _out_dir(config)
    return [_write_csv(sample_table(real, window, samples), out / "field.csv")], 0


def cmd_dump_hamiltonian(config: ExperimentConfig) -> tuple[list, int]:
    """H(p, x) on the p grid over one shortest wavelength, first config Markstein number"""
    real, pair, n = _oriented(config, "dump-hamiltonian")
    h = StrainHamiltonian(config.m, config.c_list[0], pair)
    x_ray = np.linspace(0, 1 / real.fmin, 129)
    out = _out_dir(config)
    return [_write_csv(hamiltonian_surface(h, config.p_ray, x_ray), out / "hamiltonian.csv")], 0


COMMANDS = {
    "effective": cmd_effective,
    "strain-curve": cmd_strain_curve,
    "discount": cmd_discount,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "dump-field": cmd_dump_field,
    "dump-hamiltonian": cmd_dump_hamiltonian,
}


def run_subcommand(name: str, config: ExperimentConfig) -> tuple[list, int]:
    """Run a Subcommand

    Args:
        name (str): One of the COMMANDS keys
        config (ExperimentConfig): Validated configuration

    Returns:
        paths (list): Artifact files written
        status (int): 0 when every verdict passed, 1 otherwise
    """
    if name not in COMMANDS:
        raise ValueError(f"Subcommand {name} not recognized, choose from {list(COMMANDS)}")
    logger.info(f"Running {name} with config {config.config_hash()[:12]}")
    return COMMANDS[name](config)
