"""Front Speed Storage

The SpeedBook follows the mean level set shift during a simulation. For linear initial
data G₀ = m·x + n·y the homogenized solution is G₀ - t·H̄, so the shift grows linearly
and its late time slope is the flame speed.

Returns:
        time_ray (np array): Simulation Time
        shift_ray (np array): Mean Shift -mean(G - G₀)
        speed_ray (np array): Running Speed shift/t
"""

import numpy as np
import pandas as pd


class SpeedBook:
    def __init__(self, t: float = 0.0, shift: float = 0.0) -> None:
        """Book for storing Front Speed Measurements

        Args:
            t (float): Starting Time
            shift (float): Starting Mean Shift
        """
        self.time_ray = np.array([t])
        self.shift_ray = np.array([shift])
        self.speed_ray = np.array([np.nan])

    def __repr__(self):
        """Creates a fancy table to see the stored measurements"""
        sformat = "{:>10} | {:>12} | {:>10} \n"
        nformat = "{:>10.4f} | {:>12.6f} | {:>10.6f} \n"
        spc = 38 * "-" + "\n"
        pout = sformat.format("time", "shift", "speed") + spc
        for t, shift, speed in zip(self.time_ray, self.shift_ray, self.speed_ray):
            pout += nformat.format(t, shift, speed)
        return pout

    def __len__(self) -> int:
        return len(self.time_ray)

    def append(self, t: float, shift: float) -> None:
        """Append a Measurement onto the Book

        Args:
            t (float): Time
            shift (float): Mean Shift -mean(G - G₀)
        """
        self.time_ray = np.append(self.time_ray, t)
        self.shift_ray = np.append(self.shift_ray, shift)
        self.speed_ray = np.append(self.speed_ray, shift / t if t > 0 else np.nan)

    def _slope(self, frac: float) -> float:
        """Least squares slope of shift against time over the last frac of the run"""
        start = self.time_ray[-1] * (1 - frac)
        keep = self.time_ray >= start
        if keep.sum() < 2:
            keep[-2:] = True
        slope, icept = np.polyfit(self.time_ray[keep], self.shift_ray[keep], 1)
        return float(slope)

    def extrapolated_speed(self) -> float:
        """Flame speed, slope of the mean shift over the last half of the run"""
        if len(self) < 2:
            raise ValueError("Speed needs at least two measurements")
        return self._slope(0.5)

    def is_stable(self, tol: float = 0.01) -> bool:
        """Slopes over the last half and the last third agree within tol, relative"""
        half = self._slope(0.5)
        third = self._slope(1 / 3)
        return abs(half - third) <= tol * max(abs(half), 1e-12)

    def to_frame(self) -> pd.DataFrame:
        """Table of (t, shift, speed) for export"""
        return pd.DataFrame({"t": self.time_ray, "shift": self.shift_ray, "speed": self.speed_ray})
