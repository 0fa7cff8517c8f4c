"""Experiment Configuration

A single JSON file describes an experiment. Keys:

    field       {model, amplitudes, frequencies, seed, phases}     required
    slope       {m, n}                                               required
    c_grid      {c_min, c_max, c_steps} or c_list                    Markstein numbers
    mu_grid     {gap, span, count}                                   branch table levels
    p_grid      {p_min, p_max, count}                                effective table slopes
    window      averaging window L, null for 2000 / smallest frequency
    points_per_unit   starting quadrature density, null for 64 per unit frequency
    discount    {deltas, grid_step, domain, theta_override}
    simulate    {grid, T, cfl}
    output_dir  directory for CSV and JSON artifacts
    seeds       random phase seeds for the multi seed checks
"""

import dataclasses
import hashlib
import json
import logging
import math
from pathlib import Path

import numpy as np

from field.shear import FieldSpec, InvalidSpecError

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

TOP_KEYS = ("field", "slope", "c_grid", "c_list", "mu_grid", "p_grid", "window", "points_per_unit", "discount", "simulate", "output_dir", "seeds")
SECTION_KEYS = {
    "slope": ("m", "n"),
    "c_grid": ("c_min", "c_max", "c_steps"),
    "mu_grid": ("gap", "span", "count"),
    "p_grid": ("p_min", "p_max", "count"),
    "discount": ("deltas", "grid_step", "domain", "theta_override"),
    "simulate": ("grid", "T", "cfl"),
}


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration"""


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    field: FieldSpec
    m: float
    n: float
    c_list: tuple = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    mu_gap: float = 1e-3
    mu_span: float = 5.0
    mu_count: int = 24
    p_min: float = -3.0
    p_max: float = 3.0
    p_count: int = 25
    window: float | None = None
    points_per_unit: float | None = None
    deltas: tuple = (0.02, 0.01, 0.005)
    grid_step: float = 1e-3
    domain: float | None = None
    theta_override: float | None = None
    sim_grid: int = 128
    sim_T: float = 4.0
    sim_cfl: float = 0.4
    output_dir: str = "results"
    seeds: tuple = (0, 1, 2)

    def __post_init__(self):
        m, n = float(self.m), float(self.n)
        norm = math.hypot(m, n)
        if norm == 0:
            raise ConfigError("slope: (m, n) cannot be the zero vector")
        if abs(norm * norm - 1) > 1e-6:
            logger.warning(f"Slope ({m}, {n}) has m² + n² = {norm * norm:.6g}, normalizing")
            m, n = m / norm, n / norm
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)

        if len(self.c_list) == 0:
            raise ConfigError("c_grid: Markstein grid is empty")
        if any(c < 0 for c in self.c_list) or list(self.c_list) != sorted(self.c_list):
            raise ConfigError("c_grid: Markstein numbers must be non negative and sorted")
        if len(self.deltas) == 0 or any(d <= 0 for d in self.deltas):
            raise ConfigError("discount.deltas: need a nonempty list of positive rates")
        if list(self.deltas) != sorted(self.deltas, reverse=True) or len(set(self.deltas)) != len(self.deltas):
            raise ConfigError("discount.deltas: rates must be strictly decreasing")
        if len(self.seeds) == 0 or len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds: need a nonempty list of distinct seeds")
        if self.p_count < 2 or self.mu_count < 2:
            raise ConfigError("p_grid.count and mu_grid.count must be at least 2")
        if self.window is not None and self.window <= 0:
            raise ConfigError("window: must be positive")
        if self.sim_grid < 8:
            raise ConfigError("simulate.grid: need at least 8 cells per side")

    @classmethod
    def golden(cls):
        """Golden Periodic Configuration

        v = 0.5·cos(2πx) with unit slope (0.6, 0.8), which keeps h(0) strictly above
        the flat value 0.9.
        """
        return cls(FieldSpec.golden(), 0.6, 0.8, window=10.0)

    @classmethod
    def from_dict(cls, data: dict):
        """Build a Config from Parsed JSON

        Args:
            data (dict): Parsed config, see the module docstring for the keys

        Returns:
            config (ExperimentConfig): Validated configuration
        """
        if not isinstance(data, dict):
            raise ConfigError("Config root must be a JSON object")
        for key in data:
            if key not in TOP_KEYS:
                raise ConfigError(f"{key}: unknown config key")
        for key, allowed in SECTION_KEYS.items():
            section = data.get(key, {})
            if not isinstance(section, dict):
                raise ConfigError(f"{key}: expected an object")
            for sub in section:
                if sub not in allowed:
                    raise ConfigError(f"{key}.{sub}: unknown config key")

        for key in ("field", "slope"):
            if key not in data:
                raise ConfigError(f"{key}: required key is missing")

        try:
            spec = FieldSpec.from_dict(data["field"])
        except (InvalidSpecError, TypeError) as err:
            raise ConfigError(f"field: {err}") from err

        kw = dict()
        slope = data["slope"]
        for key in ("m", "n"):
            if key not in slope:
                raise ConfigError(f"slope.{key}: required key is missing")
            kw[key] = _number(slope[key], f"slope.{key}")

        if "c_list" in data:
            kw["c_list"] = tuple(_number(c, "c_list") for c in data["c_list"])
        elif "c_grid" in data:
            grid = data["c_grid"]
            c_min = _number(grid.get("c_min", 0.0), "c_grid.c_min")
            c_max = _number(grid.get("c_max", 1.0), "c_grid.c_max")
            steps = int(_number(grid.get("c_steps", 11), "c_grid.c_steps"))
            if steps < 1 or c_max < c_min:
                raise ConfigError("c_grid: need c_steps ≥ 1 and c_max ≥ c_min")
            kw["c_list"] = tuple(float(c) for c in np.linspace(c_min, c_max, steps))

        mapping = {
            ("mu_grid", "gap"): "mu_gap",
            ("mu_grid", "span"): "mu_span",
            ("mu_grid", "count"): "mu_count",
            ("p_grid", "p_min"): "p_min",
            ("p_grid", "p_max"): "p_max",
            ("p_grid", "count"): "p_count",
            ("discount", "grid_step"): "grid_step",
            ("discount", "domain"): "domain",
            ("discount", "theta_override"): "theta_override",
            ("simulate", "grid"): "sim_grid",
            ("simulate", "T"): "sim_T",
            ("simulate", "cfl"): "sim_cfl",
        }
        for (section, key), name in mapping.items():
            if key in data.get(section, {}):
                val = data[section][key]
                kw[name] = None if val is None else _number(val, f"{section}.{key}")
        for name in ("mu_count", "p_count", "sim_grid"):
            if name in kw:
                kw[name] = int(kw[name])

        if "deltas" in data.get("discount", {}):
            kw["deltas"] = tuple(_number(d, "discount.deltas") for d in data["discount"]["deltas"])
        for key in ("window", "points_per_unit"):
            if data.get(key) is not None:
                kw[key] = _number(data[key], key)
        if "output_dir" in data:
            kw["output_dir"] = str(data["output_dir"])
        if "seeds" in data:
            kw["seeds"] = tuple(int(_number(s, "seeds")) for s in data["seeds"])

        return cls(spec, **kw)

    @classmethod
    def from_file(cls, path: str | Path):
        """Read a Config File

        Args:
            path (str): JSON file path

        Returns:
            config (ExperimentConfig): Validated configuration
        """
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as err:
            raise ConfigError(f"{path}: cannot read config, {err.strerror}") from err
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from err
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        """Canonical JSON keys, inverse of from_dict"""
        return {
            "field": self.field.to_dict(),
            "slope": {"m": self.m, "n": self.n},
            "c_list": list(self.c_list),
            "mu_grid": {"gap": self.mu_gap, "span": self.mu_span, "count": self.mu_count},
            "p_grid": {"p_min": self.p_min, "p_max": self.p_max, "count": self.p_count},
            "window": self.window,
            "points_per_unit": self.points_per_unit,
            "discount": {
                "deltas": list(self.deltas),
                "grid_step": self.grid_step,
                "domain": self.domain,
                "theta_override": self.theta_override,
            },
            "simulate": {"grid": self.sim_grid, "T": self.sim_T, "cfl": self.sim_cfl},
            "output_dir": self.output_dir,
            "seeds": list(self.seeds),
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, output_dir left out"""
        data = {key: val for key, val in self.to_dict().items() if key != "output_dir"}
        text = json.dumps(data, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()

    def override(self, **changes):
        """Copy with flag overrides applied, None values are ignored"""
        changes = {key: val for key, val in changes.items() if val is not None}
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as err:
            raise ConfigError(f"Invalid override: {err}") from err

    @property
    def eff_kw(self) -> dict:
        """EffectiveHamiltonian settings"""
        return {"gap": self.mu_gap, "span": self.mu_span, "count": self.mu_count, "pts_per_unit": self.points_per_unit}

    @property
    def p_ray(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.p_count)


def _number(val, key: str) -> float:
    """Finite float from a config value, ConfigError naming the key otherwise"""
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key}: expected a number, received {val!r}")
    if not math.isfinite(val):
        raise ConfigError(f"{key}: must be finite")
    return float(val)
