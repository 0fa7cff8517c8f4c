"""Strain Reduces Flame Speed

For every unit slope (m, n) the effective Hamiltonians are sandwiched,

    h(0) = H̄(m, n) ≥ h(c) = H̄(m, n, c) ≥ |m| + sup m·v

and h(c) = h(0) for all c only when m·v ≡ 0. The report also covers the edges m = 0,
where h ≡ |n| = 1, and n = 0, where h ≡ |m| + sup m·v.
"""

import logging
import math

import numpy as np
import pandas as pd

from field.shear import FieldRealization
from strain.curve import strain_curve, unit_slope

logger = logging.getLogger(__name__)


class TheoremReport:
    def __init__(self, m: float, n: float, lower: float, frame: pd.DataFrame, edge: str | None = None) -> None:
        """Sandwich and Strict Reduction Report

        Args:
            m (float): Horizontal slope component
            n (float): Vertical slope component
            lower (float): |m| + sup m·v
            frame (DataFrame): Columns c, h, h0, sandwich_ok, strict_ok
            edge (str): "m=0", "n=0" or None for the general case
        """
        self.m = m
        self.n = n
        self.lower = lower
        self.frame = frame
        self.edge = edge
        self.flow_trivial = False

    def __repr__(self) -> str:
        tag = f" ({self.edge} edge)" if self.edge else ""
        return f"Strain reduction report{tag} at (m, n) = ({self.m:.4f}, {self.n:.4f}), {self.status}\n{self.frame}"

    @property
    def sandwich_ok(self) -> bool:
        return bool(self.frame["sandwich_ok"].all())

    @property
    def strict_ok(self) -> bool:
        return bool(self.frame["strict_ok"].all())

    @property
    def passed(self) -> bool:
        return self.sandwich_ok and self.strict_ok

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def reduces(self) -> bool:
        """True when some c > 0 gives h(c) < h(0)"""
        lower = self.frame[self.frame["c"] > 0]
        return bool(np.any(lower["h"] < lower["h0"]))


def _edge_report(m: float, n: float, c_ray: np.ndarray, value: float, lower: float, edge: str) -> TheoremReport:
    frame = pd.DataFrame(
        {
            "c": c_ray,
            "h": np.full(len(c_ray), value),
            "h0": np.full(len(c_ray), value),
            "sandwich_ok": np.full(len(c_ray), True),
            "strict_ok": np.full(len(c_ray), True),
        }
    )
    return TheoremReport(m, n, lower, frame, edge)


def main_theorem_check(
    real: FieldRealization,
    m: float,
    n: float,
    c_list,
    L: float | None = None,
    tol: float = 1e-3,
    gap: float = 1e-3,
    **eff_kw,
) -> TheoremReport:
    """Check the Strain Sandwich and Strict Reduction

    Args:
        real (FieldRealization): Shear flow sample path
        m (float): Horizontal slope component
        n (float): Vertical slope component
        c_list (list): Markstein numbers to check, c = 0 is added
        L (float): Averaging window
        tol (float): Averaging tolerance, the sandwich allows 2·tol
        gap (float): Smallest h(0) - h(c) accepted as a strict reduction

    Returns:
        report (TheoremReport): Per c rows and the overall verdict
    """
    m, n = unit_slope(m, n)
    c_ray = np.unique(np.concatenate([[0.0], np.asarray(c_list, dtype=float)]))
    window = L or real.default_window

    if m == 0:
        logger.info("m = 0, h ≡ |n| = 1 for every c")
        return _edge_report(m, n, c_ray, abs(n), abs(n), "m=0")

    k_lo, k_hi, s_lo, s_hi = real.bounds(window, m=m)
    flow_zero = max(abs(k_lo), abs(k_hi), abs(s_lo), abs(s_hi)) <= 1e-12
    lower = abs(m) + k_hi
    if n == 0:
        logger.info("n = 0, h ≡ |m| + sup m·v for every c")
        return _edge_report(m, n, c_ray, lower, lower, "n=0")

    curve = strain_curve(real, m, n, c_ray, window, **eff_kw)
    h0 = curve.h_ray[0]
    h_ray = curve.h_ray

    sandwich = (h_ray >= lower - 2 * tol) & (h_ray <= h0 + 2 * tol)
    expect_strict = (curve.c_ray > 0) & (h_ray > lower + tol) & (h0 > lower + tol) & (not flow_zero)
    strict = ~expect_strict | (h0 - h_ray > gap)
    if flow_zero:
        strict = strict & np.isclose(h_ray, h0, rtol=0, atol=tol)

    frame = pd.DataFrame({"c": curve.c_ray, "h": h_ray, "h0": np.full(len(h_ray), h0), "sandwich_ok": sandwich, "strict_ok": strict})
    report = TheoremReport(m, n, lower, frame)
    report.flow_trivial = flow_zero
    if math.isclose(h0, lower, abs_tol=tol) and not flow_zero:
        logger.info("h(0) already sits on the flat value, strict reduction is vacuous")
    logger.debug(f"{report}")
    return report
