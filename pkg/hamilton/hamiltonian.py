"""Strain Hamiltonian

One dimensional Hamiltonian of the strain G-equation under a shear flow,

    H(p, x, c) = √(m² + p²) + c·s(x)·p/√(m² + p²) + k(x)

with k = m·v and s = m·v' in the shear case. For every x the map p -> H is level set
convex with a single critical point, the real root of p³ + m²p + c·s·m² = 0. Each level
μ above the local minimum therefore has exactly two roots, one per monotone branch.

All evaluators are vectorized over positions and work on the raw (k, s) arrays so the
ergodic averages downstream can root find a whole x grid in one pass.
"""

import logging
import math

import numpy as np
import pandas as pd

from field.shear import FieldPair, FieldRealization

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


class NoRootError(ValueError):
    """Level sits at or below the local minimum of H"""


class InconsistentBoundsError(ValueError):
    """Local minimum of H above the flat level, sup k was underestimated"""


def ham(p, m: float, c: float, k, s) -> np.ndarray:
    """Strain Hamiltonian on Raw Coefficients

    Args:
        p (float): Slope, scalar or array
        m (float): Horizontal slope component
        c (float): Markstein number
        k (float): Potential term k(x)
        s (float): Strain coefficient s(x)

    Returns:
        H (float): Hamiltonian value
    """
    root = np.sqrt(m * m + np.square(p))
    return root + c * s * p / root + k


def dham(p, m: float, c: float, s) -> np.ndarray:
    """p Derivative of the Strain Hamiltonian, (p³ + m²p + c·s·m²)/(m²+p²)^(3/2)"""
    p = np.asarray(p, dtype=float)
    m2 = m * m
    return (p**3 + m2 * p + c * s * m2) / (m2 + p * p) ** 1.5


def cubic_root(m: float, cs) -> np.ndarray:
    """Real Root of p³ + m²p + c·s·m² = 0

    Cardano's formula for the single real root, then a short Newton polish that is
    clipped to [-|c·s|, |c·s|] since |p³ + m²p| ≥ m²|p|.

    Args:
        m (float): Horizontal slope component, nonzero
        cs (float): Product c·s(x), scalar or array

    Returns:
        p_star (float): Critical point, opposite sign of c·s
    """
    cs = np.asarray(cs, dtype=float)
    a = m * m
    b = cs * a
    disc = np.sqrt((b / 2) ** 2 + (a / 3) ** 3)
    p = np.cbrt(-b / 2 + disc) + np.cbrt(-b / 2 - disc)

    lim = np.abs(cs)
    for _ in range(4):
        f = p**3 + a * p + b
        p = np.clip(p - f / (3 * p * p + a), -lim, lim)
    return p


def _solve_branch(m, c, k, s, mu, lo, hi, upper: bool, max_iter: int = 200) -> np.ndarray:
    """Safeguarded Newton on One Monotone Branch

    H - μ changes sign across [lo, hi]. Newton steps that leave the bracket fall back
    to bisection. Stops on the residual tolerance or a collapsed bracket.
    """
    a, b = lo.copy(), hi.copy()
    p = hi.copy() if upper else lo.copy()
    tol = 1e-12 * np.maximum(1.0, np.abs(mu))
    done = np.zeros(p.shape, dtype=bool)

    for it in range(max_iter):
        g = ham(p, m, c, k, s) - mu
        done = done | (np.abs(g) <= tol) | ((b - a) <= 4 * EPS * np.maximum(1.0, np.abs(p)))
        if done.all():
            break

        # root lies right of p when H is below μ on the upper branch, left on the lower
        right = (g < 0) if upper else (g > 0)
        a = np.where(right, p, a)
        b = np.where(right, b, p)

        with np.errstate(divide="ignore", invalid="ignore"):
            step = p - g / dham(p, m, c, s)
        bad = ~np.isfinite(step) | (step <= a) | (step >= b)
        p = np.where(done, p, np.where(bad, 0.5 * (a + b), step))

    logger.debug(f"Branch solve finished after {it + 1} iterations on {p.size} positions")
    return p


def solve_branches(m, c, k, s, mu, p_star):
    """Both branch roots of H = μ on raw arrays, μ assumed above the local minimum"""
    cs = np.abs(c * s)
    rad = np.maximum(np.abs(mu - k) + cs, abs(m)) + 1
    reach = np.sqrt(rad * rad - m * m)
    hi = np.maximum(p_star, 0.0) + reach
    lo = np.minimum(p_star, 0.0) - reach
    q_plus = _solve_branch(m, c, k, s, mu, p_star.copy(), hi, upper=True)
    q_minus = _solve_branch(m, c, k, s, mu, lo, p_star.copy(), upper=False)
    return q_minus, q_plus


class BranchRoots:
    def __init__(self, q_minus, q_plus, mu: float, x) -> None:
        """Roots of H = μ on Both Branches

        Scalars when built from a scalar position, arrays otherwise.

        Args:
            q_minus (float): Lower branch root, left of the critical point
            q_plus (float): Upper branch root, right of the critical point
            mu (float): Level
            x (float): Position(s)
        """
        self.q_minus = q_minus
        self.q_plus = q_plus
        self.mu = mu
        self.x = x

    def __repr__(self) -> str:
        if np.ndim(self.x) == 0:
            return f"BranchRoots at x = {self.x}: q- = {self.q_minus:.12g}, q+ = {self.q_plus:.12g}, μ = {self.mu}"
        return f"BranchRoots at {np.size(self.x)} positions, μ = {self.mu}"


class StrainHamiltonian:
    def __init__(self, m: float, c: float, pair: FieldPair) -> None:
        """Strain Hamiltonian Bound to a Coefficient Pair

        Args:
            m (float): Horizontal slope component, nonzero
            c (float): Markstein number, non negative
            pair (FieldPair): Coefficients k(x) and s(x)

        Returns:
            Self
        """
        if m == 0 or not math.isfinite(m):
            raise ValueError(f"Slope component m = {m} must be finite and nonzero")
        if c < 0 or not math.isfinite(c):
            raise ValueError(f"Markstein number c = {c} must be finite and non negative")

        self.m = float(m)
        self.c = float(c)
        self.pair = pair

    def __repr__(self) -> str:
        return f"StrainHamiltonian: m = {self.m}, c = {self.c}, {self.pair}"

    @classmethod
    def shear(cls, real: FieldRealization, m: float, c: float = 0.0):
        """Shear Flow Hamiltonian with k = m·v and s = m·v'"""
        return cls(m, c, FieldPair.shear(real, m))

    @property
    def mode(self) -> str:
        """Coefficient source, shear or general"""
        return self.pair.tag

    def condition(self, c: float):
        """Same Hamiltonian at a new Markstein number

        Args:
            c (float): Markstein number

        Returns:
            ham (StrainHamiltonian): New instance, the original is left untouched
        """
        return StrainHamiltonian(self.m, c, self.pair)

    def coefs(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients k(x), s(x)"""
        return self.pair.k(x), self.pair.s(x)

    def H(self, p, x) -> np.ndarray:
        """Hamiltonian H(p, x, c)"""
        k, s = self.coefs(x)
        return ham(p, self.m, self.c, k, s)

    def dHdp(self, p, x) -> np.ndarray:
        """Derivative ∂H/∂p at (p, x)"""
        return dham(p, self.m, self.c, self.pair.s(x))

    def flat_level(self, window: float, samples: int = 20001) -> float:
        """Flat Value H̄* = |m| + sup k on the scan window"""
        k_lo, k_hi, s_lo, s_hi = self.pair.bounds(window, samples)
        return abs(self.m) + k_hi

    def slope_bound(self, window: float, samples: int = 20001) -> float:
        """Global Bound on |∂H/∂p|, 1 + c·‖s‖/|m|"""
        return 1 + self.c * self.pair.s_norm(window, samples) / abs(self.m)


def eval_H(h: StrainHamiltonian, p, x) -> np.ndarray:
    """Evaluate H(p, x, c)

    Args:
        h (StrainHamiltonian): Hamiltonian
        p (float): Slope, scalar or array
        x (float): Position, scalar or array

    Returns:
        H (float): Hamiltonian value
    """
    return h.H(p, x)


def eval_dHdp(h: StrainHamiltonian, p, x) -> np.ndarray:
    """Evaluate ∂H/∂p(p, x, c)"""
    return h.dHdp(p, x)


def critical_point(h: StrainHamiltonian, x) -> tuple[np.ndarray, np.ndarray]:
    """Unique Critical Point of p -> H(p, x, c)

    Args:
        h (StrainHamiltonian): Hamiltonian
        x (float): Position, scalar or array

    Returns:
        p_star (float): Root of p³ + m²p + c·s(x)·m² = 0
        h_min (float): Local minimum H(p_star, x, c)
    """
    k, s = h.coefs(x)
    p_star = cubic_root(h.m, h.c * s)
    return p_star, ham(p_star, h.m, h.c, k, s)


def branch_roots(h: StrainHamiltonian, x, mu: float) -> BranchRoots:
    """Roots of H(·, x, c) = μ on the Lower and Upper Branch

    Args:
        h (StrainHamiltonian): Hamiltonian
        x (float): Position, scalar or array
        mu (float): Level, strictly above the local minimum at every x

    Returns:
        roots (BranchRoots): q_minus < p_star < q_plus with H(q±) = μ
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, s = h.coefs(x)
    p_star = cubic_root(h.m, h.c * s)
    h_min = ham(p_star, h.m, h.c, k, s)

    low = mu <= h_min
    if low.any():
        idx = int(np.argmax(low))
        raise NoRootError(f"Level μ = {mu} is not above the local minimum {h_min[idx]:.12g} at x = {x[idx]}")

    q_minus, q_plus = solve_branches(h.m, h.c, k, s, mu, p_star)
    if scalar:
        return BranchRoots(float(q_minus[0]), float(q_plus[0]), mu, float(x[0]))
    return BranchRoots(q_minus, q_plus, mu, x)


def p_plus_minus(h: StrainHamiltonian, x, h_star: float) -> tuple[np.ndarray, np.ndarray]:
    """Level Set Boundaries at the Flat Value

    Roots of H(·, x, c) = H̄*. Where the local minimum touches H̄* both boundaries
    collapse onto the critical point.

    Args:
        h (StrainHamiltonian): Hamiltonian
        x (float): Position, scalar or array
        h_star (float): Flat value |m| + sup k

    Returns:
        p_minus (float): Lower boundary
        p_plus (float): Upper boundary
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, s = h.coefs(x)
    p_star = cubic_root(h.m, h.c * s)
    h_min = ham(p_star, h.m, h.c, k, s)

    tol = 1e-9 * max(1.0, abs(h_star))
    if (h_min > h_star + tol).any():
        idx = int(np.argmax(h_min))
        raise InconsistentBoundsError(
            f"Local minimum {h_min[idx]:.12g} at x = {x[idx]} exceeds flat value {h_star:.12g}, sup k underestimated"
        )

    p_minus, p_plus = p_star.copy(), p_star.copy()
    free = h_min < h_star - tol
    if free.any():
        q_minus, q_plus = solve_branches(h.m, h.c, k[free], s[free], h_star, p_star[free])
        p_minus[free] = q_minus
        p_plus[free] = q_plus

    if scalar:
        return float(p_minus[0]), float(p_plus[0])
    return p_minus, p_plus


def hamiltonian_surface(h: StrainHamiltonian, p_ray: np.ndarray, x_ray: np.ndarray) -> pd.DataFrame:
    """Long Table of H(p, x) for Plotting

    Args:
        h (StrainHamiltonian): Hamiltonian
        p_ray (np array): Slopes
        x_ray (np array): Positions

    Returns:
        df (DataFrame): Columns p, x, H
    """
    pp, xx = np.meshgrid(np.asarray(p_ray, dtype=float), np.asarray(x_ray, dtype=float), indexing="ij")
    return pd.DataFrame({"p": pp.ravel(), "x": xx.ravel(), "H": h.H(pp.ravel(), xx.ravel())})
