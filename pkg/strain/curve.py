"""Strain Curves

For a unit slope (m, n) and shear flow v the two dimensional effective Hamiltonian
reduces to the one dimensional one, h(c) = H̄(n, c) with k = m·v and s = m·v'. The curve
is non increasing, ‖s‖ Lipschitz, strictly decreasing while above the flat value and
eventually equal to it once c is large enough.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from field.shear import FieldPair, FieldRealization
from hamilton.hamiltonian import StrainHamiltonian
from homog.effective import EffectiveHamiltonian, worker_count

logger = logging.getLogger(__name__)


def unit_slope(m: float, n: float) -> tuple[float, float]:
    """Normalize (m, n) onto the unit circle, warning when it was off by more than 1e-6"""
    norm = math.hypot(m, n)
    if norm == 0:
        raise ValueError("Slope (m, n) cannot be the zero vector")
    if abs(norm * norm - 1) > 1e-6:
        logger.warning(f"Slope ({m}, {n}) has m² + n² = {norm * norm:.6g}, normalizing")
        return m / norm, n / norm
    return m, n


def oriented_pair(real: FieldRealization, m: float, n: float) -> tuple[FieldPair, float]:
    """Shear pair with n made positive by the (n, s) -> (-n, -s) symmetry"""
    pair = FieldPair.shear(real, m)
    if n < 0:
        return pair.flipped(), -n
    return pair, n


class StrainCurve:
    def __init__(self, m: float, n: float, h_star: float, s_norm: float, window: float) -> None:
        """Book for storing h(c) over Markstein Numbers

        Args:
            m (float): Horizontal slope component
            n (float): Vertical slope component, after the sign symmetry
            h_star (float): Flat value |m| + sup m·v
            s_norm (float): Sup norm of s = m·v'
            window (float): Averaging window
        """
        self.m = m
        self.n = n
        self.h_star = h_star
        self.s_norm = s_norm
        self.window = window
        self.c_ray = np.array([])
        self.h_ray = np.array([])
        self.flat_ray = np.array([], dtype=bool)

    def __repr__(self):
        """Creates a fancy table to see the stored curve"""
        sformat = "{:>10} | {:>12} | {:>6} \n"
        nformat = "{:>10.4f} | {:>12.8f} | {:>6} \n"
        spc = 34 * "-" + "\n"
        pout = f"h(c) at (m, n) = ({self.m:.4f}, {self.n:.4f}), H* = {self.h_star:.8f}\n"
        pout += sformat.format("c", "h", "flat") + spc
        for c, h, flat in zip(self.c_ray, self.h_ray, self.flat_ray):
            pout += nformat.format(c, h, str(bool(flat)))
        return pout

    def __len__(self) -> int:
        return len(self.c_ray)

    def append(self, c: float, h: float, flat: bool) -> None:
        """Append a Point onto the Curve

        Args:
            c (float): Markstein number
            h (float): h(c)
            flat (bool): True when n lies on the flat piece at this c
        """
        self.c_ray = np.append(self.c_ray, c)
        self.h_ray = np.append(self.h_ray, h)
        self.flat_ray = np.append(self.flat_ray, flat)

    @property
    def c_star(self) -> float | None:
        """Empirical quench point, first c with n on the flat piece"""
        idx = np.flatnonzero(self.flat_ray)
        return float(self.c_ray[idx[0]]) if len(idx) else None

    def h_at(self, c: float) -> float:
        """Stored h at a Markstein number on the grid"""
        idx = np.flatnonzero(np.isclose(self.c_ray, c, rtol=0, atol=1e-12))
        if len(idx) == 0:
            raise KeyError(f"c = {c} is not on the curve grid")
        return float(self.h_ray[idx[0]])

    def to_frame(self) -> pd.DataFrame:
        """Table of (c, h, flat_flag) for export"""
        return pd.DataFrame({"c": self.c_ray, "h": self.h_ray, "flat_flag": self.flat_ray.astype(int)})


def strain_point(pair: FieldPair, m: float, n: float, c: float, window: float, **eff_kw) -> tuple[float, bool]:
    """h(c) and the flat flag at one Markstein number"""
    eff = EffectiveHamiltonian(StrainHamiltonian(m, c, pair), window, **eff_kw)
    return eff.H_bar(n), eff.on_flat(n)


def strain_curve(
    real: FieldRealization, m: float, n: float, c_grid, L: float | None = None, **eff_kw
) -> StrainCurve:
    """Strain Curve h(c) = H̄(n, c) with k = m·v and s = m·v'

    Markstein numbers are independent and evaluated on a thread pool.

    Args:
        real (FieldRealization): Shear flow sample path
        m (float): Horizontal slope component, nonzero
        n (float): Vertical slope component, nonzero
        c_grid (list): Sorted non negative Markstein numbers
        L (float): Averaging window, Default: the field's default window
        eff_kw: Extra EffectiveHamiltonian settings, gap, span, count, pts_per_unit

    Returns:
        curve (StrainCurve): h values with flat flags
    """
    m, n = unit_slope(m, n)
    if m * n == 0:
        raise ValueError(f"Strain curve needs m·n ≠ 0, received ({m}, {n})")

    c_ray = np.asarray(c_grid, dtype=float)
    if len(c_ray) == 0 or np.any(c_ray < 0) or np.any(np.diff(c_ray) < 0):
        raise ValueError("Markstein grid must be nonempty, non negative and sorted")

    pair, n = oriented_pair(real, m, n)
    window = L or pair.default_window
    k_lo, k_hi, s_lo, s_hi = pair.bounds(window)
    curve = StrainCurve(m, n, abs(m) + k_hi, max(abs(s_lo), abs(s_hi)), window)

    def point(c):
        return strain_point(pair, m, n, c, window, **eff_kw)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(point, c_ray))

    for c, (h, flat) in zip(c_ray, results):
        curve.append(c, h, flat)
    logger.debug(f"Strain curve\n{curve}")
    return curve


def check_lipschitz(curve: StrainCurve) -> float:
    """Lipschitz Ratio of a Strain Curve

    Args:
        curve (StrainCurve): Curve with at least two points

    Returns:
        ratio (float): max over adjacent pairs of |Δh|/(‖s‖·|Δc|), zero when ‖s‖ = 0
    """
    if len(curve) < 2:
        raise ValueError("Lipschitz check needs at least two curve points")
    dh = np.abs(np.diff(curve.h_ray))
    dc = np.diff(curve.c_ray)
    if curve.s_norm == 0:
        return 0.0 if np.all(dh == 0) else math.inf
    keep = dc > 0
    return float(np.max(dh[keep] / (curve.s_norm * dc[keep]), initial=0.0))


def max_increase(curve: StrainCurve) -> float:
    """Largest adjacent step Δh, positive values break monotonicity"""
    return float(np.max(np.diff(curve.h_ray), initial=-math.inf))


def strict_decrease_gaps(curve: StrainCurve, above: float = 1e-2) -> np.ndarray:
    """Drops h(c) - h(c+Δc) at the points with h(c) > H̄* + above"""
    drops = -np.diff(curve.h_ray)
    lifted = curve.h_ray[:-1] > curve.h_star + above
    return drops[lifted]
