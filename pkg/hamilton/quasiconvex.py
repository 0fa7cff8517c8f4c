"""Quasiconvexity Checker

A sampled function is quasiconvex (level set convex) when no interior sample sits
strictly above both a sample to its left and a sample to its right. The check runs in
one pass with prefix and suffix minima and reports the first violating triple.
"""

import numpy as np


class QuasiVerdict:
    def __init__(self, passed: bool, witness: tuple | None = None) -> None:
        """Result of a Quasiconvexity Check

        Args:
            passed (bool): True when no violating triple exists
            witness (tuple): ((p, val), (q, val), (r, val)) with p < q < r, None on a pass
        """
        self.passed = passed
        self.witness = witness

    def __repr__(self) -> str:
        if self.passed:
            return "Quasiconvex: PASS"
        (p, vp), (q, vq), (r, vr) = self.witness
        return f"Quasiconvex: FAIL, H({q}) = {vq} above H({p}) = {vp} and H({r}) = {vr}"

    def __bool__(self) -> bool:
        return self.passed

    @property
    def triple(self) -> tuple | None:
        """Slopes (p, q, r) of the witness"""
        if self.witness is None:
            return None
        return tuple(pt[0] for pt in self.witness)


def check_quasiconvex(samples, tol: float = 1e-12) -> QuasiVerdict:
    """Check Sampled Values for Quasiconvexity

    Args:
        samples (list): (p, value) pairs sorted by p, at least three
        tol (float): Allowed excess of the middle value, scaled by max(1, max |value|)

    Returns:
        verdict (QuasiVerdict): Pass, or the first witness p < q < r with
            value(q) > max(value(p), value(r)) + tol
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("Samples need to be a list of (p, value) pairs")
    if len(arr) < 3:
        raise ValueError(f"Need at least three samples, received {len(arr)}")

    p_ray, val_ray = arr[:, 0], arr[:, 1]
    if np.any(np.diff(p_ray) <= 0):
        raise ValueError("Samples must be sorted by strictly increasing p")

    tol = tol * max(1.0, float(np.abs(val_ray).max()))
    left = np.minimum.accumulate(val_ray)[:-2]  # min over i < j
    right = np.minimum.accumulate(val_ray[::-1])[::-1][2:]  # min over i > j
    excess = val_ray[1:-1] - np.maximum(left, right)

    bad = np.flatnonzero(excess > tol)
    if len(bad) == 0:
        return QuasiVerdict(True)

    j = int(bad[0]) + 1
    i = int(np.argmin(val_ray[:j]))
    k = j + 1 + int(np.argmin(val_ray[j + 1 :]))
    witness = tuple((float(p_ray[n]), float(val_ray[n])) for n in (i, j, k))
    return QuasiVerdict(False, witness)


def check_quasiconvex_fn(fn, p_ray: np.ndarray, tol: float = 1e-12) -> QuasiVerdict:
    """Sample a vectorized function on p_ray and check it"""
    p_ray = np.asarray(p_ray, dtype=float)
    return check_quasiconvex(np.column_stack([p_ray, fn(p_ray)]), tol)


def perturbed_plateau_hamiltonian(p, eps: float) -> np.ndarray:
    """Plateau Hamiltonian plus ε·p²

    The base H is -p for p ≤ 0, zero on (0, 1], 1 - p on (1, 2] and p - 3 beyond.
    The base H is quasiconvex, yet adding the convex ε·p² gives
    H(0) = 0, H(1) = ε and H(2) = 4ε - 1, which breaks level set convexity for small ε.

    Args:
        p (float): Slope, scalar or array
        eps (float): Weight of the quadratic term

    Returns:
        H (float): Perturbed value
    """
    p = np.asarray(p, dtype=float)
    base = np.select([p <= 0, p <= 1, p <= 2], [-p, np.zeros_like(p), 1 - p], default=p - 3)
    return base + eps * p * p
