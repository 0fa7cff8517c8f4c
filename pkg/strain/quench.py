"""Quenching

Beyond an explicit Markstein number c̄ the strain term cancels all flow enhancement and
h(c) equals the flat value H̄* = |m| + sup k. The bound comes from a witness: a slope
profile ψ supported where the strain is strongly negative, s < -τ/2, with interval means
n/α. Wherever ψ is positive the map t -> H(t, x, c) is decreasing on [0, 2n/α] once
c > c̄, so H(ψ(x), x, c) never rises above |m| + k(x).
"""

import logging

import numpy as np
from scipy import integrate, optimize

from field.shear import FieldRealization, FieldStats
from hamilton.hamiltonian import StrainHamiltonian
from homog.effective import EffectiveHamiltonian
from strain.curve import oriented_pair, unit_slope

logger = logging.getLogger(__name__)

RAMP = 0.1  # smoothstep ramp width as a fraction of the interval
BUMP_MEAN = 1 - RAMP  # mean of the unit plateau bump over its interval
MIN_STEPS = 4  # shortest kept interval, in grid steps


class UndefinedThresholdError(ValueError):
    """Threshold needs τ > 0, 0 < α < 1 and m ≠ 0"""


class InsufficientWindowError(ValueError):
    """No usable interval of {s < -τ/2} inside the window"""


def quench_threshold(stats: FieldStats, m: float, n: float) -> float:
    """Explicit Quench Threshold

    c̄ = (2/(τm²))·[(2n/α)³ + m²(2n/α)], with n < 0 mapped to |n| by symmetry.

    Args:
        stats (FieldStats): Strain depth τ and fraction α
        m (float): Horizontal slope component
        n (float): Vertical slope component

    Returns:
        c_bar (float): Markstein number beyond which h(c) = H̄*
    """
    if stats.tau <= 0:
        raise UndefinedThresholdError("Strain depth τ = 0, constant strain has no quench threshold")
    if not 0 < stats.alpha < 1:
        raise UndefinedThresholdError(f"Fraction α = {stats.alpha} outside (0, 1)")
    if m == 0:
        raise UndefinedThresholdError("Threshold needs m ≠ 0")

    top = 2 * abs(n) / stats.alpha
    return 2 / (stats.tau * m * m) * (top**3 + m * m * top)


def _plateau(t: np.ndarray) -> np.ndarray:
    """Unit plateau bump on [0, 1] with C¹ smoothstep ramps"""
    t = np.asarray(t, dtype=float)
    up = np.clip(t / RAMP, 0, 1)
    dn = np.clip((1 - t) / RAMP, 0, 1)
    ramp = np.minimum(up, dn)
    return ramp * ramp * (3 - 2 * ramp) * ((t > 0) & (t < 1))


class QuenchWitness:
    def __init__(self, x_ray: np.ndarray, intervals: list, heights: np.ndarray, n: float, tau: float, alpha: float) -> None:
        """Slope Profile Certifying h(c) = H̄*

        Args:
            x_ray (np array): Uniform grid on the window
            intervals (list): Kept intervals (l, r) of {s < -τ/2}
            heights (np array): Plateau height per interval
            n (float): Vertical slope component, positive
            tau (float): Strain depth |inf s|
            alpha (float): Measure fraction of {s < -τ/2} on the window
        """
        self.x_ray = x_ray
        self.intervals = intervals
        self.heights = heights
        self.n = n
        self.tau = tau
        self.alpha = alpha
        self.psi_ray = self.psi(x_ray)
        self.phi_ray = integrate.cumulative_trapezoid(self.psi_ray - n, x_ray, initial=0)
        self.c_bar = None
        self.c = None
        self.h_star = None
        self.max_H = None
        self.dropped = 0

    def __repr__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"QuenchWitness: {len(self.intervals)} intervals, α = {self.alpha:.6f}, c = {self.c}, c̄ = {self.c_bar:.6g}, "
            f"max H = {self.max_H:.10f} vs H* = {self.h_star:.10f}, {verdict}"
        )

    def psi(self, x) -> np.ndarray:
        """ψ(x), zero off the kept intervals"""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for (lo, hi), top in zip(self.intervals, self.heights):
            inside = (x > lo) & (x < hi)
            out[inside] = top * _plateau((x[inside] - lo) / (hi - lo))
        return out

    def interval_means(self) -> np.ndarray:
        """Mean of ψ over each kept interval, by adaptive quadrature"""
        means = []
        for (lo, hi), top in zip(self.intervals, self.heights):
            val, err = integrate.quad(
                lambda x: top * float(_plateau((x - lo) / (hi - lo))),
                lo,
                hi,
                points=[lo + RAMP * (hi - lo), hi - RAMP * (hi - lo)],
                epsabs=1e-13,
            )
            means.append(val / (hi - lo))
        return np.array(means)

    @property
    def psi_bound(self) -> float:
        """Upper bound 2n/α allowed for ψ"""
        return 2 * self.n / self.alpha

    @property
    def bound_ok(self) -> bool:
        return bool(self.psi_ray.min() >= 0 and self.psi_ray.max() <= self.psi_bound)

    @property
    def drift(self) -> float:
        """|φ(x)|/x at the window edge"""
        return float(abs(self.phi_ray[-1]) / self.x_ray[-1])

    @property
    def passed(self) -> bool:
        """max_x H(n + φ'(x), x, c) ≤ H̄* + 1e-6"""
        return self.max_H is not None and self.max_H <= self.h_star + 1e-6


def strain_intervals(s_fn, x_ray: np.ndarray, level: float) -> list:
    """Intervals of {s < level} on the grid, interior ends refined by brentq"""
    below = s_fn(x_ray) < level
    edges = np.flatnonzero(np.diff(below.astype(int)))
    starts = list(edges[below[edges + 1]] + 1)
    stops = list(edges[below[edges]] + 1)
    if below[0]:
        starts.insert(0, 0)
    if below[-1]:
        stops.append(len(x_ray))

    def cross(idx):
        return optimize.brentq(lambda z: float(s_fn(np.atleast_1d(z))[0]) - level, x_ray[idx - 1], x_ray[idx], xtol=1e-14)

    spans = []
    for i0, i1 in zip(starts, stops):
        lo = x_ray[0] if i0 == 0 else cross(i0)
        hi = x_ray[-1] if i1 == len(x_ray) else cross(i1)
        spans.append((float(lo), float(hi)))
    return spans


def build_quench_witness(
    real: FieldRealization, m: float, n: float, c: float, window: float | None = None, grid_step: float | None = None
) -> QuenchWitness:
    """Construct the Quenching Witness on [0, window]

    Intervals shorter than four grid steps are dropped and the remaining plateau
    heights are raised so the window average of ψ stays n.

    Args:
        real (FieldRealization): Shear flow sample path
        m (float): Horizontal slope component
        n (float): Vertical slope component, nonzero
        c (float): Markstein number, expected above c̄
        window (float): Window length, Default: the field's default window
        grid_step (float): Grid spacing, Default: 1/(256·highest frequency)

    Returns:
        witness (QuenchWitness): ψ, φ and max_x H(n + φ', x, c)
    """
    m, n = unit_slope(m, n)
    pair, n = oriented_pair(real, m, n)
    window = window or pair.default_window
    grid_step = grid_step or 1 / (256 * pair.fmax)

    k_lo, k_hi, s_lo, s_hi = pair.bounds(window)
    tau = abs(min(s_lo, 0.0))
    if tau == 0:
        raise UndefinedThresholdError("Strain never goes negative, no witness exists")

    x_ray = np.linspace(0, window, int(np.ceil(window / grid_step)) + 1)
    spans = strain_intervals(pair.s, x_ray, -tau / 2)
    if len(spans) == 0:
        raise InsufficientWindowError(f"No interval of s < {-tau / 2:.6g} found on [0, {window}]")

    alpha = sum(hi - lo for lo, hi in spans) / window
    kept = [(lo, hi) for lo, hi in spans if hi - lo >= MIN_STEPS * grid_step]
    if len(kept) == 0:
        raise InsufficientWindowError(f"Every interval of s < {-tau / 2:.6g} is shorter than {MIN_STEPS} grid steps")
    if len(kept) < len(spans):
        logger.warning(f"Dropped {len(spans) - len(kept)} short intervals from the witness")

    kept_alpha = sum(hi - lo for lo, hi in kept) / window
    heights = np.full(len(kept), n / kept_alpha / BUMP_MEAN)

    wit = QuenchWitness(x_ray, kept, heights, n, tau, alpha)
    wit.dropped = len(spans) - len(kept)
    wit.c = c
    wit.c_bar = quench_threshold(FieldStats(tau, alpha, window), m, n)
    wit.h_star = abs(m) + k_hi
    wit.max_H = float(np.max(StrainHamiltonian(m, c, pair).H(wit.psi_ray, x_ray)))

    if c <= wit.c_bar:
        logger.warning(f"Witness built at c = {c} below the threshold c̄ = {wit.c_bar:.6g}")
    logger.debug(f"Built {wit}")
    return wit


class QuenchVerdict:
    def __init__(self, c: float, c_bar: float, h: float, h_star: float, tol: float) -> None:
        """h(c) against the flat value at one Markstein number"""
        self.c = c
        self.c_bar = c_bar
        self.h = h
        self.h_star = h_star
        self.tol = tol

    def __repr__(self) -> str:
        return f"Quench check at c = {self.c} (c̄ = {self.c_bar:.6g}): h = {self.h:.10f}, H* = {self.h_star:.10f}, {self.status}"

    @property
    def passed(self) -> bool:
        return abs(self.h - self.h_star) <= self.tol

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def quench_check(
    real: FieldRealization, m: float, n: float, c: float, L: float | None = None, tol: float = 1e-3, **eff_kw
) -> QuenchVerdict:
    """Check h(c) = H̄* above the Threshold

    Args:
        real (FieldRealization): Shear flow sample path
        m (float): Horizontal slope component
        n (float): Vertical slope component
        c (float): Markstein number, above c̄
        L (float): Averaging window
        tol (float): Allowed |h(c) - H̄*|

    Returns:
        verdict (QuenchVerdict): PASS when h(c) equals the flat value within tol
    """
    m, n = unit_slope(m, n)
    pair, n = oriented_pair(real, m, n)
    window = L or pair.default_window
    c_bar = quench_threshold(pair.stats(window), m, n)
    if c <= c_bar:
        logger.warning(f"Quench check at c = {c} is not above c̄ = {c_bar:.6g}, the result is not covered by the bound")

    eff = EffectiveHamiltonian(StrainHamiltonian(m, c, pair), window, **eff_kw)
    return QuenchVerdict(c, c_bar, eff.H_bar(n), eff.h_star, tol)
