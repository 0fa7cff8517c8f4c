"""Cell Problem Identities

With f(t) = √(m² + t²) the cell problem on the branch through n reads

    f(n + u') + c·s·f'(n + u') + k = h(c)

so n + u'(x) = q+(h(c), x). Above the flat value n + u' + c·s stays positive, which makes
f' + c·s·f'' = ∂H/∂p positive too. Differentiating in c gives

    h'(c)/(f' + c·s·f'') = s/(1 + a·s) + ∂c u',     a = c·f''/f' = m²c/(q(m² + q²))

and averaging it, with E[∂c u'] = 0, E[1/(f' + csf'')] > 0 and E[s/(1 + as)] < 0,
forces h'(c) < 0.
"""

import logging

import numpy as np
from scipy import integrate

from field.shear import FieldRealization
from hamilton.hamiltonian import StrainHamiltonian, branch_roots
from homog.effective import EffectiveHamiltonian
from strain.curve import oriented_pair, unit_slope

logger = logging.getLogger(__name__)


class HypothesisError(ValueError):
    """h(c) sits on the flat value, the branch identities do not apply"""


def _mean(y: np.ndarray, x: np.ndarray) -> float:
    return float(integrate.trapezoid(y, x) / (x[-1] - x[0]))


class ClaimResult:
    def __init__(self, c: float, mu: float, min_shift: float, min_slope: float, min_q: float) -> None:
        """Positivity Minima on the Branch through n

        Args:
            c (float): Markstein number
            mu (float): h(c)
            min_shift (float): min over the grid of n + u' + c·s
            min_slope (float): min over the grid of f' + c·s·f''
            min_q (float): min over the grid of n + u'
        """
        self.c = c
        self.mu = mu
        self.min_shift = min_shift
        self.min_slope = min_slope
        self.min_q = min_q

    def __repr__(self) -> str:
        return f"Positivity at c = {self.c}: min(n+u'+cs) = {self.min_shift:.6g}, min(f'+csf'') = {self.min_slope:.6g}"

    @property
    def passed(self) -> bool:
        return self.min_shift > 0 and self.min_slope > 0


class IdentityResult:
    def __init__(self, c: float, dh: float, resid: float, e_inv: float, e_ratio: float, e_dcu: float) -> None:
        """Differentiated Cell Identity Diagnostics

        Args:
            c (float): Markstein number
            dh (float): Central difference h'(c)
            resid (float): Max pointwise residual of the identity
            e_inv (float): E[1/(f' + c·s·f'')]
            e_ratio (float): E[s/(1 + a·s)]
            e_dcu (float): E[∂c u']
        """
        self.c = c
        self.dh = dh
        self.resid = resid
        self.e_inv = e_inv
        self.e_ratio = e_ratio
        self.e_dcu = e_dcu

    def __repr__(self) -> str:
        return (
            f"Identity at c = {self.c}: h' = {self.dh:.6g}, resid {self.resid:.2e}, "
            f"E[1/(f'+csf'')] = {self.e_inv:.6g}, E[s/(1+as)] = {self.e_ratio:.6g}, E[dc u'] = {self.e_dcu:.2e}"
        )

    @property
    def passed(self) -> bool:
        # E[s/(1 + a·s)] collapses to E[s] = 0 at c = 0, the sign only binds for c > 0
        ratio_ok = self.e_ratio < 0 if self.c > 0 else True
        return self.e_inv > 0 and ratio_ok and abs(self.e_dcu) < 1e-2


def _lifted(eff: EffectiveHamiltonian, n: float, tol: float) -> float:
    """h(c) on the upper branch, raising when n is on or below the flat piece"""
    mu = eff.H_bar(n)
    if mu <= eff.h_star + tol or n <= eff.p_bar[1]:
        raise HypothesisError(f"h(c) = {mu:.10f} is not above the flat value {eff.h_star:.10f} on the upper branch")
    return mu


def claim1_check(
    real: FieldRealization, m: float, n: float, c: float, L: float | None = None, tol: float = 1e-9, **eff_kw
) -> ClaimResult:
    """Positivity of n + u' + c·s and f' + c·s·f''

    Args:
        real (FieldRealization): Shear flow sample path
        m (float): Horizontal slope component
        n (float): Vertical slope component
        c (float): Markstein number
        L (float): Averaging window
        tol (float): Margin h(c) must keep above H̄*

    Returns:
        result (ClaimResult): Grid minima of both quantities
    """
    m, n = unit_slope(m, n)
    pair, n = oriented_pair(real, m, n)
    h = StrainHamiltonian(m, c, pair)
    eff = EffectiveHamiltonian(h, L, **eff_kw)
    mu = _lifted(eff, n, tol)

    x_ray = eff.x_ray
    q_ray = branch_roots(h, x_ray, mu).q_plus
    s_ray = pair.s(x_ray)
    result = ClaimResult(
        c,
        mu,
        float(np.min(q_ray + c * s_ray)),
        float(np.min(h.dHdp(q_ray, x_ray))),
        float(np.min(q_ray)),
    )
    logger.debug(f"{result}")
    return result


def differentiated_identity_check(
    real: FieldRealization,
    m: float,
    n: float,
    c: float,
    dc: float = 1e-3,
    L: float | None = None,
    tol: float = 1e-9,
    **eff_kw,
) -> IdentityResult:
    """Verify the c Differentiated Cell Identity by Central Differences

    Args:
        real (FieldRealization): Shear flow sample path
        m (float): Horizontal slope component
        n (float): Vertical slope component
        c (float): Markstein number
        dc (float): Difference step Δc, forward differences when c < Δc
        L (float): Averaging window
        tol (float): Margin h must keep above H̄* at every stencil point

    Returns:
        result (IdentityResult): Pointwise residual and the three expectations
    """
    m, n = unit_slope(m, n)
    pair, n = oriented_pair(real, m, n)
    c_lo, c_hi = (c - dc, c + dc) if c >= dc else (c, c + 2 * dc)

    effs = [EffectiveHamiltonian(StrainHamiltonian(m, cc, pair), L, **eff_kw) for cc in (c_lo, c, c_hi)]
    mus = [_lifted(eff, n, tol) for eff in effs]
    x_ray = effs[1].x_ray

    q_lo, q_mid, q_hi = (branch_roots(eff.h, x_ray, mu).q_plus for eff, mu in zip(effs, mus))
    dh = (mus[2] - mus[0]) / (c_hi - c_lo)
    dcu = (q_hi - q_lo) / (c_hi - c_lo)

    s_ray = pair.s(x_ray)
    slope = effs[1].h.dHdp(q_mid, x_ray)
    a_ray = m * m * c / (q_mid * (m * m + q_mid * q_mid))
    ratio = s_ray / (1 + a_ray * s_ray)
    resid = np.abs(dh / slope - ratio - dcu)

    result = IdentityResult(c, dh, float(resid.max()), _mean(1 / slope, x_ray), _mean(ratio, x_ray), _mean(dcu, x_ray))
    logger.debug(f"{result}")
    return result
