"""Cell Problem Correctors

On the upper branch the cell problem H(P + γ'(x), x, c) = μ is solved pointwise by
γ' = q+(μ, x) - P+(μ), so the corrector is a cumulative integral of the centered
upper root. Sub-linear growth of γ is what makes P+ the right average.
"""

import logging

import numpy as np
from scipy import integrate

from hamilton.hamiltonian import StrainHamiltonian, branch_roots
from homog.effective import OutOfRangeError

logger = logging.getLogger(__name__)


class Corrector:
    def __init__(self, mu: float, x_ray: np.ndarray, slope_ray: np.ndarray, p_avg: float) -> None:
        """Sampled Corrector of the Cell Problem

        Args:
            mu (float): Level
            x_ray (np array): Uniform grid on [0, L]
            slope_ray (np array): γ'(x) = q+(μ, x) - P+ on the grid
            p_avg (float): P+(μ) measured on the same grid

        Returns:
            Self
        """
        self.mu = mu
        self.x_ray = x_ray
        self.slope_ray = slope_ray
        self.p_avg = p_avg
        self.gamma_ray = integrate.cumulative_trapezoid(slope_ray, x_ray, initial=0)

    def __repr__(self) -> str:
        return f"Corrector at μ = {self.mu}: P+ = {self.p_avg:.10f}, drift {self.drift:.3e} on [0, {self.x_ray[-1]}]"

    @property
    def window(self) -> float:
        return float(self.x_ray[-1])

    @property
    def drift(self) -> float:
        """Sub-linearity Diagnostic, sup |γ(x)|/x over [L/2, L]"""
        back = self.x_ray >= self.window / 2
        return float(np.max(np.abs(self.gamma_ray[back]) / self.x_ray[back]))


def corrector(h: StrainHamiltonian, mu: float, L: float, grid_step: float = 1e-2) -> Corrector:
    """Build the Upper Branch Corrector

    Args:
        h (StrainHamiltonian): Strain Hamiltonian
        mu (float): Level, strictly above the flat value
        L (float): Window length
        grid_step (float): Spacing of the uniform grid

    Returns:
        corr (Corrector): γ(0) = 0 with γ' = q+ - P+
    """
    h_star = h.flat_level(L)
    if mu <= h_star:
        raise OutOfRangeError(f"Level μ = {mu} must be above the flat value {h_star:.12g}")

    npts = int(np.ceil(L / grid_step)) + 1
    x_ray = np.linspace(0, L, npts)
    q_plus = branch_roots(h, x_ray, mu).q_plus
    p_avg = float(integrate.trapezoid(q_plus, x_ray) / L)
    corr = Corrector(mu, x_ray, q_plus - p_avg, p_avg)
    logger.debug(f"Built {corr}")
    return corr


def verify_cell(h: StrainHamiltonian, mu: float, P: float, corr: Corrector) -> float:
    """Cell Problem Residual

    Args:
        h (StrainHamiltonian): Strain Hamiltonian the corrector came from
        mu (float): Level
        P (float): Slope average to test
        corr (Corrector): Sampled corrector

    Returns:
        resid (float): max over the grid of |H(P + γ'(x), x, c) - μ|
    """
    return float(np.max(np.abs(h.H(P + corr.slope_ray, corr.x_ray) - mu)))
