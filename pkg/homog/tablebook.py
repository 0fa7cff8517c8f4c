"""Branch Table Storage

Classes that store values and results are referred to as Books. The BranchBook holds
the ergodic branch averages P+(μ) and P-(μ) over a grid of levels μ above the flat
value. The table only seeds brackets, every inverse is refined by a root finder.

Returns:
        mu_ray (np array): Levels μ, ascending
        pp_ray (np array): Upper branch averages P+(μ), ascending
        pm_ray (np array): Lower branch averages P-(μ), descending
"""

import numpy as np
import pandas as pd


class BranchBook:
    def __init__(self, h_star: float, p_bar: tuple[float, float]) -> None:
        """Book for storing Branch Averages

        Starts with the flat value and its endpoints, the μ -> H̄* limit of both branches.

        Args:
            h_star (float): Flat value |m| + sup k
            p_bar (tuple): Flat piece endpoints (p̄-, p̄+)
        """
        self.h_star = h_star
        self.p_bar = p_bar
        self.mu_ray = np.array([])
        self.pp_ray = np.array([])
        self.pm_ray = np.array([])

    def __repr__(self):
        """Creates a fancy table to see the stored averages"""
        sformat = "{:>12} | {:>12} | {:>12} \n"
        nformat = "{:>12.6f} | {:>12.6f} | {:>12.6f} \n"
        spc = 42 * "-" + "\n"
        pout = sformat.format("level", "upper", "lower")
        pout = pout + sformat.format("mu", "P_plus", "P_minus") + spc
        pout += nformat.format(self.h_star, self.p_bar[1], self.p_bar[0])
        for mu, pp, pm in zip(self.mu_ray, self.pp_ray, self.pm_ray):
            pout += nformat.format(mu, pp, pm)
        return pout

    def __len__(self) -> int:
        return len(self.mu_ray)

    def append(self, mu: float, pp: float, pm: float) -> None:
        """Append a Level onto the Book, kept sorted by μ

        Args:
            mu (float): Level
            pp (float): Upper branch average P+(μ)
            pm (float): Lower branch average P-(μ)
        """
        idx = np.searchsorted(self.mu_ray, mu)
        self.mu_ray = np.insert(self.mu_ray, idx, mu)
        self.pp_ray = np.insert(self.pp_ray, idx, pp)
        self.pm_ray = np.insert(self.pm_ray, idx, pm)

    def is_monotone(self) -> bool:
        """P+ strictly increasing and P- strictly decreasing in μ"""
        return bool(np.all(np.diff(self.pp_ray) > 0) and np.all(np.diff(self.pm_ray) < 0))

    def p_plus_at(self, mu: float) -> float:
        """Interpolated P+(μ), bracket seeding only"""
        return float(np.interp(mu, self._mu_full, self._pp_full))

    def p_minus_at(self, mu: float) -> float:
        """Interpolated P-(μ), bracket seeding only"""
        return float(np.interp(mu, self._mu_full, self._pm_full))

    def mu_bracket(self, p: float, upper: bool = True) -> tuple[float, float | None]:
        """Bracket of Levels around a Target Slope

        Args:
            p (float): Target slope outside the flat piece
            upper (bool): True for the upper branch P+, False for P-

        Returns:
            mu_lo (float): Level with the branch average on the flat side of p
            mu_hi (float): Level past p, None when p lies beyond the table
        """
        mu_full = self._mu_full
        vals = self._pp_full if upper else -self._pm_full
        target = p if upper else -p
        idx = int(np.searchsorted(vals, target))
        if idx >= len(vals):
            return float(mu_full[-1]), None
        return float(mu_full[max(idx - 1, 0)]), float(mu_full[idx])

    @property
    def _mu_full(self) -> np.ndarray:
        return np.concatenate([[self.h_star], self.mu_ray])

    @property
    def _pp_full(self) -> np.ndarray:
        return np.concatenate([[self.p_bar[1]], self.pp_ray])

    @property
    def _pm_full(self) -> np.ndarray:
        return np.concatenate([[self.p_bar[0]], self.pm_ray])

    def to_frame(self) -> pd.DataFrame:
        """Table of (mu, P_plus, P_minus) without the flat value row"""
        return pd.DataFrame({"mu": self.mu_ray, "P_plus": self.pp_ray, "P_minus": self.pm_ray})
