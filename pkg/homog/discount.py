"""Vanishing Discount Solver

Independent route to H̄(p, c) through the discounted cell problem

    δu + H(p + u'(x), x, c) = 0,        -δu(0) -> H̄(p, c) as δ -> 0

discretized with the monotone Lax-Friedrichs scheme

    δu_i + H(p + (u_i+1 - u_i-1)/2Δx, x_i) - θ(u_i+1 - 2u_i + u_i-1)/2Δx = 0

where θ bounds |∂H/∂p| so the scheme is monotone. The nonlinear system is solved by
Newton with an Armijo backtrack on its tridiagonal Jacobian, continued from a coarse
grid. Random fields use a Dirichlet truncation of the line, periodic fields solve one
period with periodic boundaries.
"""

import logging

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as splinalg

from hamilton.hamiltonian import StrainHamiltonian, dham, ham

logger = logging.getLogger(__name__)

DOMAIN_REACH = 12  # default domain half length in units of θ/δ
BOUNDARIES = ("auto", "dirichlet", "periodic")
COARSE_STEP = 1e-2  # continuation starts on the first doubled step at or above this
ARMIJO = 1e-4
MIN_DAMPING = 2**-30


class DivergenceError(ValueError):
    """Newton iteration did not reach the residual tolerance"""


class DiscountProblem:
    def __init__(
        self,
        delta: float,
        p: float,
        grid_step: float = 1e-2,
        domain: float | None = None,
        theta: float | None = None,
        boundary: str = "auto",
    ) -> None:
        """Discounted Cell Problem Parameters

        Args:
            delta (float): Discount rate δ, positive
            p (float): Slope
            grid_step (float): Grid spacing Δx
            domain (float): Dirichlet half length L_dom, Default: 12·θ/δ
            theta (float): Artificial viscosity override, Default: 1 + c·‖s‖/|m|
            boundary (str): "auto", "dirichlet" or "periodic"

        Returns:
            Self
        """
        if delta <= 0:
            raise ValueError(f"Discount rate δ = {delta} must be positive")
        if grid_step <= 0:
            raise ValueError(f"Grid step {grid_step} must be positive")
        if boundary not in BOUNDARIES:
            raise ValueError(f"Boundary {boundary} not recognized, choose from {BOUNDARIES}")

        self.delta = float(delta)
        self.p = float(p)
        self.grid_step = float(grid_step)
        self.domain = domain
        self.theta = theta
        self.boundary = boundary

    def __repr__(self) -> str:
        return f"DiscountProblem: δ = {self.delta}, p = {self.p}, Δx = {self.grid_step}, {self.boundary} boundary"

    def viscosity(self, h: StrainHamiltonian, window: float) -> float:
        """θ used by the scheme, the override or the global bound on |∂H/∂p|"""
        bound = h.slope_bound(window)
        if self.theta is None:
            return bound
        if self.theta < bound:
            logger.warning(f"θ override {self.theta} below the monotonicity bound {bound:.6f}")
        return float(self.theta)

    def resolve_boundary(self, h: StrainHamiltonian) -> str:
        if self.boundary == "auto":
            return "periodic" if h.pair.period is not None else "dirichlet"
        if self.boundary == "periodic" and h.pair.period is None:
            raise ValueError("Periodic boundary needs a periodic coefficient pair")
        return self.boundary


class DiscountSolution:
    def __init__(self, x_ray: np.ndarray, u_ray: np.ndarray, delta: float, iters: int, resid: float, theta: float):
        """Grid Solution of the Discounted Problem

        Args:
            x_ray (np array): Grid, contains x = 0
            u_ray (np array): Solution values u^δ
            delta (float): Discount rate
            iters (int): Newton iterations used
            resid (float): Final sup residual
            theta (float): Artificial viscosity of the scheme
        """
        self.x_ray = x_ray
        self.u_ray = u_ray
        self.delta = delta
        self.iters = iters
        self.resid = resid
        self.theta = theta

    def __repr__(self) -> str:
        return f"DiscountSolution: -δu(0) = {self.estimate:.10f}, δ = {self.delta}, {self.iters} iterations, resid {self.resid:.2e}"

    @property
    def estimate(self) -> float:
        """-δ·u^δ(0)"""
        idx = int(np.argmin(np.abs(self.x_ray)))
        return float(-self.delta * self.u_ray[idx])

    @property
    def sup_norm(self) -> float:
        """‖δu^δ‖∞"""
        return float(self.delta * np.max(np.abs(self.u_ray)))


def _lf_terms(full: np.ndarray, x_ray: np.ndarray, h: StrainHamiltonian, p: float, delta: float, theta: float, dx: float):
    """Residual and Jacobian diagonals at interior points of a padded grid"""
    k, s = h.coefs(x_ray)
    grad = p + (full[2:] - full[:-2]) / (2 * dx)
    lap = full[2:] - 2 * full[1:-1] + full[:-2]
    resid = delta * full[1:-1] + ham(grad, h.m, h.c, k, s) - theta * lap / (2 * dx)
    slope = dham(grad, h.m, h.c, s)
    lower = -(slope + theta) / (2 * dx)
    upper = (slope - theta) / (2 * dx)
    diag = np.full_like(resid, delta + theta / dx)
    return resid, lower, diag, upper


def _newton(system, u: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int, float]:
    """Newton with an Armijo Backtrack on the Squared Residual

    The Newton direction always descends ‖F‖², so a step is only taken once it cuts the
    squared residual by the Armijo fraction. The stopping test stays on the sup residual.
    """
    resid, step = system(u)
    norm = np.abs(resid).max()
    phi = float(resid @ resid)
    for it in range(max_iter + 1):
        if norm < tol:
            return u, it, norm
        if it == max_iter:
            break
        lam = 1.0
        while True:
            trial = u + lam * step
            t_resid, _ = system(trial, solve=False)
            t_phi = float(t_resid @ t_resid)
            if np.isfinite(t_phi) and t_phi <= (1 - 2 * ARMIJO * lam) * phi:
                break
            lam /= 2
            if lam < MIN_DAMPING:
                raise DivergenceError(
                    f"Newton line search failed at residual {norm:.3e} on iteration {it}, no step reduces ‖F‖²"
                )
        if lam < 1:
            logger.debug(f"Newton iteration {it} damped to λ = {lam}")
        u = trial
        resid, step = system(u)
        norm = np.abs(resid).max()
        phi = float(resid @ resid)
    raise DivergenceError(f"Discount solve stalled at residual {norm:.3e} after {max_iter} iterations, raise θ or refine Δx")


def grid_ladder(grid_step: float) -> list:
    """Grid Steps from Coarse to Fine, Doubling up to at Least COARSE_STEP"""
    steps = [grid_step]
    while steps[-1] < COARSE_STEP:
        steps.append(2 * steps[-1])
    return steps[::-1]


def _solve_periodic(h, p, delta, theta, step, guess, tol, max_iter):
    """One periodic level, guess maps a grid to the starting values"""
    period = h.pair.period
    npts = max(int(np.ceil(period / step)), 8)
    dx = period / npts
    x_ray = np.arange(npts) * dx

    def system(u, solve=True):
        full = np.concatenate([[u[-1]], u, [u[0]]])
        resid, lower, diag, upper = _lf_terms(full, x_ray, h, p, delta, theta, dx)
        if not solve:
            return resid, None
        jac = sparse.diags([lower[1:], diag, upper[:-1]], [-1, 0, 1], format="lil")
        jac[0, npts - 1] = lower[0]
        jac[npts - 1, 0] = upper[-1]
        return resid, splinalg.spsolve(jac.tocsc(), -resid)

    u, iters, resid = _newton(system, guess(x_ray), tol, max_iter)
    return x_ray, u, iters, resid


def _solve_dirichlet(h, p, delta, theta, step, domain, guess, tol, max_iter):
    """One truncated line level, boundary values pinned at -H/δ"""
    half = int(np.ceil(domain / step))
    x_ray = np.linspace(-half * step, half * step, 2 * half + 1)
    left, right = -h.H(p, x_ray[[0, -1]]) / delta
    inner = x_ray[1:-1]

    def system(u, solve=True):
        full = np.concatenate([[left], u, [right]])
        resid, lower, diag, upper = _lf_terms(full, inner, h, p, delta, theta, step)
        if not solve:
            return resid, None
        band = np.zeros((3, len(u)))
        band[0, 1:] = upper[:-1]
        band[1] = diag
        band[2, :-1] = lower[1:]
        return resid, linalg.solve_banded((1, 1), band, -resid)

    u_in, iters, resid = _newton(system, guess(inner), tol, max_iter)
    return x_ray, np.concatenate([[left], u_in, [right]]), iters, resid


def solve_discounted(
    prob: DiscountProblem,
    h: StrainHamiltonian,
    window: float | None = None,
    tol: float | None = None,
    max_iter: int = 100,
) -> DiscountSolution:
    """Solve the Discounted Cell Problem

    Grids finer than COARSE_STEP are reached by continuation: the coarsest rung of the
    doubling ladder starts from -H(p, x)/δ, every finer rung from the linear interpolant
    of the one before.

    Args:
        prob (DiscountProblem): Discount rate, slope and grid
        h (StrainHamiltonian): Strain Hamiltonian
        window (float): Scan window for ‖s‖ and H̄*, Default: the pair's default window
        tol (float): Sup residual target, Default: 1e-8·max(1, |H̄*|)
        max_iter (int): Newton iteration cap on each rung

    Returns:
        sol (DiscountSolution): Grid solution with its -δu(0) estimate, iters summed over rungs
    """
    window = window or h.pair.default_window
    theta = prob.viscosity(h, window)
    if tol is None:
        tol = 1e-8 * max(1.0, abs(h.flat_level(window)))

    delta, p = prob.delta, prob.p
    boundary = prob.resolve_boundary(h)

    if boundary == "dirichlet":
        domain = prob.domain if prob.domain is not None else DOMAIN_REACH * theta / delta
        if domain < 3 * theta / delta:
            raise ValueError(f"Domain half length {domain} below 3·θ/δ = {3 * theta / delta:.4g}")

    def guess(x):
        if prev is None:
            return -h.H(p, x) / delta
        return np.interp(x, *prev, period=period)

    period = h.pair.period if boundary == "periodic" else None
    prev, total = None, 0
    for step in grid_ladder(prob.grid_step):
        if boundary == "periodic":
            x_ray, u, iters, resid = _solve_periodic(h, p, delta, theta, step, guess, tol, max_iter)
        else:
            x_ray, u, iters, resid = _solve_dirichlet(h, p, delta, theta, step, domain, guess, tol, max_iter)
        prev = (x_ray, u)
        total += iters
        logger.debug(f"Discount rung Δx = {step:.3e}: {iters} iterations, resid {resid:.2e}")

    sol = DiscountSolution(x_ray, u, delta, total, resid, theta)
    logger.debug(f"{prob} -> {sol}")
    return sol


def vanishing_discount_estimate(
    h: StrainHamiltonian,
    p: float,
    deltas: list,
    grid_step: float = 1e-2,
    domain: float | None = None,
    theta: float | None = None,
    window: float | None = None,
) -> tuple[list, float]:
    """Discount Estimates over a Decreasing δ List

    Args:
        h (StrainHamiltonian): Strain Hamiltonian
        p (float): Slope
        deltas (list): Decreasing positive discount rates
        grid_step (float): Grid spacing Δx
        domain (float): Dirichlet half length, Default: 12·θ/δ per rate
        theta (float): Artificial viscosity override, shared by every rate
        window (float): Scan window for ‖s‖ and H̄*

    Returns:
        rows (list): (δ, -δu^δ(0)) pairs
        limit (float): Richardson extrapolation of the two smallest rates, linear in δ
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) == 0 or any(d <= 0 for d in deltas):
        raise ValueError("Discount rates must be a nonempty list of positive values")
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("Discount rates must be strictly decreasing")

    rows = []
    for delta in deltas:
        prob = DiscountProblem(delta, p, grid_step, domain, theta)
        rows.append((delta, solve_discounted(prob, h, window).estimate))

    if len(rows) == 1:
        return rows, rows[0][1]
    (d1, e1), (d2, e2) = rows[-2], rows[-1]
    limit = (d1 * e2 - d2 * e1) / (d1 - d2)
    logger.debug(f"Discount estimates {rows}, extrapolated {limit:.10f}")
    return rows, limit
