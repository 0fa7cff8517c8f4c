"""Strain G-Equation Front Simulation

Level set G(x, y, t) under the shear flow V = (v(y), 0),

    G_t + v(y)·G_x + |DG| + c·v'(y)·G_x·G_y/|DG| = 0

started from the linear profile G₀ = m·x + n·y. The grid stores the periodic part
w = G - G₀, which the flow and the strain term keep periodic since both depend on y
alone. Time stepping is forward Euler on a Lax-Friedrichs numerical Hamiltonian, and the
flame speed is the late time slope of -mean(w).
"""

import json
import logging
import math
from pathlib import Path

import numpy as np

from field.shear import RANDOM_PHASE, FieldRealization
from front.speedbook import SpeedBook

logger = logging.getLogger(__name__)

GRAD_EPS = 1e-8  # |DG| below this switches the strain term off
MAX_CFL = 0.4


class CFLError(ValueError):
    """Time step would break the monotone CFL restriction"""


def strain_term(gx, gy, v_prime, c: float) -> np.ndarray:
    """Strain Term c·v'·gx·gy/|DG|

    Args:
        gx (float): G_x, scalar or array
        gy (float): G_y, scalar or array
        v_prime (float): Shear derivative v'(y)
        c (float): Markstein number

    Returns:
        term (float): Zero wherever |DG| < 1e-8
    """
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    norm = np.hypot(gx, gy)
    flat = norm < GRAD_EPS
    if flat.any():
        logger.debug(f"Strain term switched off at {int(flat.sum())} degenerate gradients")
    with np.errstate(divide="ignore", invalid="ignore"):
        term = c * v_prime * gx * gy / norm
    return np.where(flat, 0.0, term)


class FrontState:
    def __init__(self, w: np.ndarray, m: float, n: float, dx: float, dy: float, t: float = 0.0) -> None:
        """Level Set Grid with Slope Periodic Boundaries

        Args:
            w (np array): Periodic part G - G₀, shape (ny, nx), rows along y
            m (float): Slope along x
            n (float): Slope along y
            dx (float): Grid step along x
            dy (float): Grid step along y
            t (float): Time

        Returns:
            Self
        """
        self.w = np.array(w, dtype=float)
        self.m = m
        self.n = n
        self.dx = dx
        self.dy = dy
        self.t = t

    def __repr__(self) -> str:
        ny, nx = self.w.shape
        return f"FrontState: {nx} x {ny} grid at t = {self.t:.4f}, slope ({self.m}, {self.n})"

    @classmethod
    def linear(cls, m: float, n: float, grid: int, height: float = 1.0):
        """Linear Level Set G₀ = m·x + n·y on a Square grid × grid Mesh

        Args:
            m (float): Slope along x
            n (float): Slope along y
            grid (int): Cells per side
            height (float): Side length, a multiple of the flow period
        """
        step = height / grid
        return cls(np.zeros((grid, grid)), m, n, step, step)

    @property
    def x_ray(self) -> np.ndarray:
        return np.arange(self.w.shape[1]) * self.dx

    @property
    def y_ray(self) -> np.ndarray:
        return np.arange(self.w.shape[0]) * self.dy

    @property
    def G(self) -> np.ndarray:
        """Full level set m·x + n·y + w"""
        xx, yy = np.meshgrid(self.x_ray, self.y_ray)
        return self.m * xx + self.n * yy + self.w

    @property
    def mean_shift(self) -> float:
        """-mean(G - G₀)"""
        return float(-self.w.mean())

    def write(self, path: str | Path) -> tuple[Path, Path]:
        """Write G as a Flat Binary Grid with a JSON Header

        Args:
            path (str): Output stem, .bin and .json are appended

        Returns:
            bin_path (Path): Little endian float64 values, row major, rows along y
            head_path (Path): Header with nx, ny, dx, dy, t
        """
        path = Path(path)
        bin_path = path.with_suffix(".bin")
        head_path = path.with_suffix(".json")
        ny, nx = self.w.shape
        self.G.astype("<f8").tofile(bin_path)
        header = {"nx": nx, "ny": ny, "dx": self.dx, "dy": self.dy, "t": self.t, "dtype": "<f8", "order": "C"}
        head_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
        return bin_path, head_path


def wave_speed(real: FieldRealization, c: float) -> float:
    """Bound on the numerical Hamiltonian slopes, ‖v‖ + 1 + c·‖v'‖"""
    return real.amp_sum + 1 + c * real.slope_sum


def flow_height(real: FieldRealization) -> float:
    """Domain height matching the flow period, unit for the zero field"""
    if real.spec.model == RANDOM_PHASE:
        raise ValueError("Front simulation needs a periodic flow, random phase fields are not domain periodic")
    return real.period or 1.0


def _lf_hamiltonian(w: np.ndarray, state: FrontState, v_col: np.ndarray, dv_col: np.ndarray, c: float, alpha: float) -> np.ndarray:
    """Lax-Friedrichs numerical Hamiltonian on the periodic grid"""
    px_up = state.m + (np.roll(w, -1, axis=1) - w) / state.dx
    px_dn = state.m + (w - np.roll(w, 1, axis=1)) / state.dx
    qy_up = state.n + (np.roll(w, -1, axis=0) - w) / state.dy
    qy_dn = state.n + (w - np.roll(w, 1, axis=0)) / state.dy

    gx = 0.5 * (px_up + px_dn)
    gy = 0.5 * (qy_up + qy_dn)
    ham = v_col * gx + np.hypot(gx, gy) + strain_term(gx, gy, dv_col, c)
    return ham - 0.5 * alpha * (px_up - px_dn) - 0.5 * alpha * (qy_up - qy_dn)


def evolve(
    state: FrontState,
    real: FieldRealization,
    c: float,
    T: float,
    cfl: float = MAX_CFL,
    record_every: int = 10,
) -> tuple[FrontState, SpeedBook]:
    """Advance the Front and Measure its Speed

    Args:
        state (FrontState): Starting grid, its slope (m, n) sets G₀
        real (FieldRealization): Periodic shear flow, v depends on y
        c (float): Markstein number
        T (float): Duration
        cfl (float): CFL number, at most 0.4
        record_every (int): Steps between SpeedBook entries

    Returns:
        state (FrontState): Grid at time t + T, the input is left untouched
        book (SpeedBook): Mean shift history, book.extrapolated_speed() is the flame speed
    """
    if not 0 < cfl <= MAX_CFL:
        raise CFLError(f"CFL number {cfl} outside (0, {MAX_CFL}], the scheme would not be monotone")
    if T <= 0:
        raise ValueError(f"Duration T = {T} must be positive")

    alpha = wave_speed(real, c)
    dt_max = cfl * min(state.dx, state.dy) / alpha
    steps = max(int(math.ceil(T / dt_max)), 1)
    dt = T / steps

    y_ray = state.y_ray[:, None]
    v_col = real.v(y_ray)
    dv_col = real.v_prime(y_ray)

    w = state.w.copy()
    t0 = state.t
    book = SpeedBook(t0, float(-w.mean()))
    logger.debug(f"Evolving {state} for T = {T} in {steps} steps of {dt:.3e}, α = {alpha:.4f}")

    for step in range(1, steps + 1):
        w = w - dt * _lf_hamiltonian(w, state, v_col, dv_col, c, alpha)
        if step % record_every == 0 or step == steps:
            book.append(t0 + step * dt, float(-w.mean()))

    new = FrontState(w, state.m, state.n, state.dx, state.dy, t0 + T)
    if not book.is_stable():
        logger.warning(f"Front speed not settled over the last third of the run, T = {T} may be short")
    return new, book


def simulate_speed(real: FieldRealization, m: float, n: float, c: float, grid: int = 128, T: float = 4.0, cfl: float = MAX_CFL) -> float:
    """Flame speed of a fresh linear front on a grid × grid mesh"""
    state = FrontState.linear(m, n, grid, flow_height(real))
    new, book = evolve(state, real, c, T, cfl)
    return book.extrapolated_speed()


def measure_strain_reduction(
    real: FieldRealization, m: float, n: float, c_pair: tuple[float, float], grid: int = 128, T: float = 4.0
) -> tuple[float, float]:
    """Front Speeds at Two Markstein Numbers

    Args:
        real (FieldRealization): Periodic shear flow
        m (float): Slope along x
        n (float): Slope along y
        c_pair (tuple): (c₁, c₂) with c₁ ≤ c₂
        grid (int): Cells per side
        T (float): Duration

    Returns:
        speed_1 (float): Flame speed at c₁
        speed_2 (float): Flame speed at c₂
    """
    c1, c2 = c_pair
    if c1 > c2:
        raise ValueError(f"Markstein pair ({c1}, {c2}) must be ordered")
    speed_1 = simulate_speed(real, m, n, c1, grid, T)
    speed_2 = speed_1 if c2 == c1 else simulate_speed(real, m, n, c2, grid, T)
    logger.debug(f"Front speeds {speed_1:.6f} at c = {c1} and {speed_2:.6f} at c = {c2}")
    return speed_1, speed_2
