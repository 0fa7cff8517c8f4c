"""Effective Hamiltonian

Assembles H̄(p, c) for the one dimensional strain Hamiltonian. Above the flat value
H̄* = |m| + sup k every level μ has one root per branch at each x, and the ergodic
averages of those roots give P+(μ) and P-(μ). Expectations are replaced by spatial
averages over a single realization on [0, L], computed with the trapezoid rule on a
uniform grid. For periodic fields and integer period windows this is spectrally exact.

H̄ is the inverse of P- below the flat piece, the inverse of P+ above it, and H̄* on
the closed interval [p̄-, p̄+] in between.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from scipy import integrate, optimize

from hamilton.hamiltonian import InconsistentBoundsError, StrainHamiltonian, cubic_root, ham, solve_branches
from homog.tablebook import BranchBook

logger = logging.getLogger(__name__)

PTS_PER_UNIT = 64  # quadrature points per unit length per unit of the highest frequency
MAX_POINTS = 2**20  # grid doubling stops before passing this many points
MAX_EXPAND = 64  # level doublings allowed past the table


class OutOfRangeError(ValueError):
    """Level at or below the flat value"""


class FlatPieceError(ValueError):
    """Slope lies on the flat piece [p̄-, p̄+], H̄ equals the flat value there"""


def worker_count() -> int:
    """Thread Cap for Table and Curve Construction

    Read from the GSTRAIN_WORKERS environment variable, Default: min(4, cpu count).
    """
    env = os.environ.get("GSTRAIN_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"GSTRAIN_WORKERS = {env} is not an integer, using the default")
    return min(4, os.cpu_count() or 1)


def _odd_count(window: float, density: float) -> int:
    half = int(np.ceil(window * density / 2))
    return 2 * max(half, 2) + 1


class EffectiveHamiltonian:
    def __init__(
        self,
        h: StrainHamiltonian,
        window: float | None = None,
        gap: float = 1e-3,
        span: float = 5.0,
        count: int = 24,
        pts_per_unit: float | None = None,
        samples: int = 20001,
    ) -> None:
        """Effective Hamiltonian of One Realization

        Settles a quadrature grid on [0, window] at construction. The branch table and
        the flat piece endpoints are built on first use.

        Args:
            h (StrainHamiltonian): Strain Hamiltonian
            window (float): Averaging window L, Default: the pair's default window
            gap (float): Smallest table level above the flat value, ε_gap
            span (float): Largest table level above the flat value
            count (int): Number of geometric table levels
            pts_per_unit (float): Starting grid density, Default: 64 per unit frequency
            samples (int): Minimum scan samples for the bounds of k and s

        Returns:
            Self
        """
        if gap <= 0 or span <= gap:
            raise ValueError(f"Level grid needs 0 < gap < span, received gap {gap} and span {span}")
        if count < 2:
            raise ValueError(f"Level grid needs at least two levels, received {count}")

        self.h = h
        self.window = float(window) if window else h.pair.default_window
        self.gap = gap
        self.span = span
        self.count = count
        self.h_star = h.flat_level(self.window, samples)

        density = pts_per_unit or PTS_PER_UNIT * h.pair.fmax
        self._set_grid(_odd_count(self.window, density))
        self._settle_grid()

        self._book = None
        self._p_bar = None

    def __repr__(self) -> str:
        return (
            f"EffectiveHamiltonian: H* = {self.h_star:.8f} on window {self.window} "
            f"with {len(self.x_ray)} points, m = {self.h.m}, c = {self.h.c}"
        )

    def _set_grid(self, npts: int) -> None:
        self.x_ray = np.linspace(0, self.window, npts)
        self._k, self._s = self.h.coefs(self.x_ray)
        self._p_star = cubic_root(self.h.m, self.h.c * self._s)
        self._h_min = ham(self._p_star, self.h.m, self.h.c, self._k, self._s)

        tol = 1e-9 * max(1.0, abs(self.h_star))
        if self._h_min.max() > self.h_star + tol:
            raise InconsistentBoundsError(
                f"Local minimum {self._h_min.max():.12g} exceeds flat value {self.h_star:.12g} on the grid"
            )

    def _settle_grid(self, tol: float = 1e-9, max_double: int = 4) -> None:
        """Double the grid until the upper average at H̄* + 0.1 stops moving"""
        mu = self.h_star + 0.1
        old = self._average(mu, upper=True)
        for _ in range(max_double):
            coarse = self.x_ray
            if 2 * len(coarse) - 1 > MAX_POINTS:
                logger.debug(f"Grid kept at {len(coarse)} points, doubling would pass {MAX_POINTS}")
                return
            self._set_grid(2 * len(coarse) - 1)
            new = self._average(mu, upper=True)
            if abs(new - old) <= tol * max(1.0, abs(new)):
                logger.debug(f"Grid settled at {len(self.x_ray)} points, change {abs(new - old):.2e}")
                return
            old = new
        logger.warning(f"Quadrature grid not settled after {max_double} doublings, last change {abs(new - old):.2e}")

    def _roots(self, mu: float) -> tuple[np.ndarray, np.ndarray]:
        """Branch roots on the grid, collapsed onto the critical point where μ touches the minimum"""
        q_minus, q_plus = self._p_star.copy(), self._p_star.copy()
        free = self._h_min < mu
        if free.any():
            qm, qp = solve_branches(self.h.m, self.h.c, self._k[free], self._s[free], mu, self._p_star[free])
            q_minus[free] = qm
            q_plus[free] = qp
        return q_minus, q_plus

    def _average(self, mu: float, upper: bool = True, half: bool = False) -> float:
        """Trapezoid average of one branch on [0, L], or on [0, L/2] when half is set"""
        q_minus, q_plus = self._roots(mu)
        q_ray = q_plus if upper else q_minus
        x_ray = self.x_ray
        if half:
            mid = len(x_ray) // 2 + 1
            q_ray, x_ray = q_ray[:mid], x_ray[:mid]
        return float(integrate.trapezoid(q_ray, x_ray) / x_ray[-1])

    def _check_level(self, mu: float) -> None:
        if mu <= self.h_star:
            raise OutOfRangeError(f"Level μ = {mu} must be above the flat value {self.h_star:.12g}")

    def P_plus(self, mu: float) -> float:
        """Upper Branch Average P+(μ)

        Args:
            mu (float): Level, strictly above H̄*

        Returns:
            P_plus (float): Spatial average of the upper root
        """
        self._check_level(mu)
        return self._average(mu, upper=True)

    def P_minus(self, mu: float) -> float:
        """Lower Branch Average P-(μ)"""
        self._check_level(mu)
        return self._average(mu, upper=False)

    def estimate(self, mu: float, upper: bool = True) -> tuple[float, float]:
        """Branch Average with a Window Error Estimate

        Args:
            mu (float): Level, strictly above H̄*
            upper (bool): Upper branch when True

        Returns:
            value (float): Average on [0, L]
            err (float): |average on [0, L] - average on [0, L/2]|
        """
        self._check_level(mu)
        full = self._average(mu, upper)
        half = self._average(mu, upper, half=True)
        return full, abs(full - half)

    @property
    def p_bar(self) -> tuple[float, float]:
        """Flat Piece Endpoints (p̄-, p̄+)

        Averages of the pointwise level set boundaries at H̄*, the μ -> H̄* limit of P±.
        """
        if self._p_bar is None:
            pm = self._average(self.h_star, upper=False)
            pp = self._average(self.h_star, upper=True)
            self._p_bar = (min(pm, pp), max(pm, pp))
            logger.debug(f"Flat piece [{self._p_bar[0]:.10f}, {self._p_bar[1]:.10f}]")
        return self._p_bar

    @property
    def flat_gap(self) -> float:
        """Measured width p̄+ - p̄- of the flat piece"""
        return self.p_bar[1] - self.p_bar[0]

    @property
    def book(self) -> BranchBook:
        """Branch table, built on first use"""
        if self._book is None:
            self._book = self.build_table()
        return self._book

    def level_grid(self) -> np.ndarray:
        """Geometric levels from H̄* + gap to H̄* + span"""
        return self.h_star + np.geomspace(self.gap, self.span, self.count)

    def build_table(self) -> BranchBook:
        """Tabulate P±(μ) on the Level Grid

        One refinement pass inserts midpoints wherever the upper average jumps more
        than twice its median step. Levels are evaluated on a thread pool.

        Returns:
            book (BranchBook): Table with the flat value row
        """
        book = BranchBook(self.h_star, self.p_bar)
        mu_ray = self.level_grid()
        rows = self._tabulate(mu_ray)

        pp = np.array([r[0] for r in rows])
        jump = np.abs(np.diff(pp))
        steep = np.flatnonzero(jump > 2 * np.median(jump))
        extra = np.sqrt((mu_ray[steep] - self.h_star) * (mu_ray[steep + 1] - self.h_star)) + self.h_star
        rows += self._tabulate(extra)

        for mu, (p_up, p_dn) in zip(np.concatenate([mu_ray, extra]), rows):
            book.append(mu, p_up, p_dn)

        if book.pp_ray[0] < self.p_bar[1] - 1e-9:
            logger.warning(f"P+ at H* + gap {book.pp_ray[0]:.10f} sits below p̄+ {self.p_bar[1]:.10f}")
        if not book.is_monotone():
            logger.warning("Branch table is not strictly monotone, widen the window or refine the grid")
        logger.debug(f"Branch table with {len(book)} levels\n{book}")
        return book

    def _tabulate(self, mu_ray: np.ndarray) -> list:
        def both(mu):
            return self._average(mu, upper=True), self._average(mu, upper=False)

        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            return list(pool.map(both, mu_ray))

    def mu_branch(self, p: float, upper: bool = True) -> float:
        """Invert a Branch Average

        Args:
            p (float): Slope above p̄+ for the upper branch, below p̄- for the lower
            upper (bool): Upper branch when True

        Returns:
            mu (float): Level with P±(μ) = p
        """
        pm, pp = self.p_bar
        if (upper and p <= pp) or (not upper and p >= pm):
            raise FlatPieceError(f"Slope {p} is not beyond the flat piece [{pm:.10f}, {pp:.10f}] on this branch")

        def resid(mu):
            return self._average(mu, upper) - p

        mu_lo, mu_hi = self.book.mu_bracket(p, upper)
        if mu_hi is None:
            mu_hi = mu_lo
            for _ in range(MAX_EXPAND):
                if (resid(mu_hi) < 0) != upper:
                    break
                mu_lo = mu_hi
                mu_hi = self.h_star + 2 * (mu_hi - self.h_star)
            else:
                side = "upper" if upper else "lower"
                raise OutOfRangeError(f"No level up to {mu_hi:.6g} reaches slope {p} on the {side} branch")

        mu = optimize.brentq(resid, mu_lo, mu_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        miss = abs(resid(mu))
        if miss > 1e-8:
            logger.warning(f"Inverse at p = {p} misses by {miss:.2e}")
        return mu

    def H_bar(self, p: float) -> float:
        """Effective Hamiltonian H̄(p, c)

        Args:
            p (float): Slope

        Returns:
            H_bar (float): μ- below p̄-, H̄* on [p̄-, p̄+], μ+ above p̄+
        """
        pm, pp = self.p_bar
        if p > pp:
            return self.mu_branch(p, upper=True)
        if p < pm:
            return self.mu_branch(p, upper=False)
        return self.h_star

    def on_flat(self, p: float) -> bool:
        """True when p lies on the closed flat piece"""
        pm, pp = self.p_bar
        return pm <= p <= pp

    def curve_frame(self, p_ray: np.ndarray) -> pd.DataFrame:
        """Table of (p, H_bar) for export"""
        return pd.DataFrame({"p": p_ray, "H_bar": [self.H_bar(float(p)) for p in p_ray]})


def P_plus(h: StrainHamiltonian, mu: float, L: float | None = None) -> float:
    """Upper Branch Average P+(μ) on the Window [0, L]

    Args:
        h (StrainHamiltonian): Strain Hamiltonian
        mu (float): Level, strictly above H̄*
        L (float): Averaging window, Default: the pair's default window

    Returns:
        P_plus (float): Spatial average of the upper root
    """
    value, err = EffectiveHamiltonian(h, L).estimate(mu, upper=True)
    logger.debug(f"P+({mu}) = {value:.12f}, window error {err:.2e}")
    return value


def P_minus(h: StrainHamiltonian, mu: float, L: float | None = None) -> float:
    """Lower Branch Average P-(μ) on the Window [0, L]"""
    value, err = EffectiveHamiltonian(h, L).estimate(mu, upper=False)
    logger.debug(f"P-({mu}) = {value:.12f}, window error {err:.2e}")
    return value


def mu_branch(h: StrainHamiltonian, p: float, side: str = "upper", L: float | None = None) -> float:
    """Level μ±(p, c) Inverting a Branch Average

    Args:
        h (StrainHamiltonian): Strain Hamiltonian
        p (float): Slope outside the flat piece
        side (str): "upper" or "lower"
        L (float): Averaging window

    Returns:
        mu (float): Level with P±(μ) = p
    """
    if side not in ("upper", "lower"):
        raise ValueError(f"Branch side {side} not recognized, choose upper or lower")
    return EffectiveHamiltonian(h, L).mu_branch(p, upper=side == "upper")


def effective_H(h: StrainHamiltonian, p: float, L: float | None = None) -> float:
    """Effective Hamiltonian H̄(p, c) on the Window [0, L]"""
    return EffectiveHamiltonian(h, L).H_bar(p)
