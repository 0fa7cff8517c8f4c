"""Shear Flow Fields

Random shear flows V = (v(y), 0) evaluated in closed form. The random phase model is a
trigonometric polynomial v(x) = Σ a_j cos(2π f_j x + θ_j) with phases drawn uniformly
from a seed. Rationally independent frequencies make the field stationary and ergodic,
so spatial averages over one sample path stand in for ensemble expectations.

The strain Hamiltonian only needs the pair k(x), s(x). For a shear flow with slope
component m these are k = m·v and s = m·v'. Hand supplied pairs are also accepted,
provided s vanishes wherever k has a local maximum.
"""

import logging
import math
from fractions import Fraction

import numpy as np
import pandas as pd
from scipy import optimize

logger = logging.getLogger(__name__)

RANDOM_PHASE = "random-phase"
PERIODIC = "periodic-single-mode"
ZERO = "zero"
MODELS = (RANDOM_PHASE, PERIODIC, ZERO)

PTS_PER_WAVE = 32  # scan resolution for extrema, samples per shortest wavelength
MAX_POLISH = 256  # cap on peaks polished by scan_extrema


class InvalidSpecError(ValueError):
    """Field specification or coefficient pair breaks an invariant"""


class FieldSpec:
    def __init__(
        self,
        model: str,
        amplitudes: list | tuple = (),
        frequencies: list | tuple = (),
        seed: int = 0,
        phases: list | tuple | None = None,
    ) -> None:
        """Shear Flow Specification

        Describes a shear flow model before it is realized. Random phase models draw
        their phases from the seed, the periodic single mode uses the given phase.

        Args:
            model (str): "random-phase", "periodic-single-mode" or "zero"
            amplitudes (list): Mode Amplitudes a_j, dimensionless
            frequencies (list): Mode Frequencies f_j, cycles per unit length
            seed (int): 64-bit Seed for the Phase Draw
            phases (list): Phases θ_j, radians, periodic model only, Default: zeros

        Returns:
            Self
        """
        if model not in MODELS:
            raise InvalidSpecError(f"Field model {model} not recognized, choose from {MODELS}")

        amplitudes = [float(a) for a in amplitudes]
        frequencies = [float(f) for f in frequencies]

        if model == ZERO:
            amplitudes, frequencies = [], []
        elif len(amplitudes) == 0:
            raise InvalidSpecError(f"Model {model} needs at least one amplitude")

        if len(amplitudes) != len(frequencies):
            raise InvalidSpecError("Amplitude and frequency lists need to be the same length")

        if not all(math.isfinite(a) for a in amplitudes):
            raise InvalidSpecError("Amplitudes must be finite")

        if not all(math.isfinite(f) and f > 0 for f in frequencies):
            raise InvalidSpecError("Frequencies must be finite and positive")

        if model == PERIODIC and len(amplitudes) != 1:
            raise InvalidSpecError("Periodic single mode takes exactly one amplitude and frequency")

        if model == RANDOM_PHASE:
            self._check_independent(frequencies)

        if phases is None:
            phases = [0.0] * len(amplitudes)
        phases = [float(t) for t in phases]
        if model == PERIODIC and len(phases) != 1:
            raise InvalidSpecError("Periodic single mode takes exactly one phase")

        self.model = model
        self.amplitudes = tuple(amplitudes)
        self.frequencies = tuple(frequencies)
        self.seed = int(seed)
        self.phases = tuple(phases)

    def __repr__(self) -> str:
        return f"FieldSpec: {self.model}, {len(self.amplitudes)} modes, seed {self.seed}"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    @staticmethod
    def _check_independent(frequencies: list) -> None:
        """Reject frequency pairs with a small denominator rational ratio"""
        for i, fi in enumerate(frequencies):
            for fj in frequencies[i + 1 :]:
                ratio = fi / fj
                frac = Fraction(ratio).limit_denominator(1000)
                if abs(ratio - float(frac)) <= 1e-12 * ratio:
                    raise InvalidSpecError(
                        f"Frequencies {fi} and {fj} are rationally dependent ({frac}), field would not be ergodic"
                    )

    @classmethod
    def golden(cls):
        """Golden Periodic Field

        Single cosine mode v(x) = 0.5 cos(2πx), used as the oracle configuration.

        Args:
            amplitudes (list): [0.5]
            frequencies (list): [1.0]
        """
        return cls(PERIODIC, amplitudes=[0.5], frequencies=[1.0])

    @classmethod
    def random_default(cls, seed: int = 0):
        """Default Random Phase Field

        Three modes with unit amplitude sum and rationally independent frequencies.

        Args:
            amplitudes (list): [0.5, 0.3, 0.2]
            frequencies (list): [1, sqrt(2), golden ratio]
            seed (int): Phase seed
        """
        return cls(RANDOM_PHASE, amplitudes=[0.5, 0.3, 0.2], frequencies=[1.0, math.sqrt(2), (1 + math.sqrt(5)) / 2], seed=seed)

    @classmethod
    def zero(cls):
        """Zero Field, v ≡ 0"""
        return cls(ZERO)

    @classmethod
    def from_dict(cls, data: dict):
        """Build a Spec from Config Keys

        Args:
            data (dict): Keys model, amplitudes, frequencies, seed and optional phases

        Returns:
            spec (FieldSpec): Field specification
        """
        if "model" not in data:
            raise InvalidSpecError("Field config is missing the key 'model'")
        return cls(
            data["model"],
            amplitudes=data.get("amplitudes", ()),
            frequencies=data.get("frequencies", ()),
            seed=data.get("seed", 0),
            phases=data.get("phases"),
        )

    def to_dict(self) -> dict:
        """Config keys of the spec, inverse of from_dict"""
        data = {
            "model": self.model,
            "amplitudes": list(self.amplitudes),
            "frequencies": list(self.frequencies),
            "seed": self.seed,
        }
        if self.model == PERIODIC:
            data["phases"] = list(self.phases)
        return data


def _frozen(values) -> np.ndarray:
    ray = np.array(values, dtype=float)
    ray.flags.writeable = False
    return ray


class FieldRealization:
    def __init__(self, spec: FieldSpec, phases: np.ndarray) -> None:
        """One Sample Path of a Shear Flow

        Immutable after construction. Use sample_field to build one from a spec.

        Args:
            spec (FieldSpec): Specification the path was drawn from
            phases (np array): Resolved phases θ_j, radians

        Returns:
            Self
        """
        self.spec = spec
        self.amps = _frozen(spec.amplitudes)
        self.freqs = _frozen(spec.frequencies)
        self.phases = _frozen(phases)
        self._bounds = dict()

    def __repr__(self) -> str:
        return f"FieldRealization: {self.spec.model} with {len(self.amps)} modes, sum |a| = {self.amp_sum}"

    def v(self, x: float | np.ndarray) -> np.ndarray:
        """Shear Velocity v(x)"""
        x = np.asarray(x, dtype=float)
        vel = np.zeros_like(x)
        for a, f, t in zip(self.amps, self.freqs, self.phases):
            vel = vel + a * np.cos(2 * np.pi * f * x + t)
        return vel

    def v_prime(self, x: float | np.ndarray) -> np.ndarray:
        """Shear Velocity Derivative v'(x)"""
        x = np.asarray(x, dtype=float)
        dvel = np.zeros_like(x)
        for a, f, t in zip(self.amps, self.freqs, self.phases):
            dvel = dvel - 2 * np.pi * f * a * np.sin(2 * np.pi * f * x + t)
        return dvel

    @property
    def amp_sum(self) -> float:
        """Bound on |v|, Σ|a_j|"""
        return float(np.sum(np.abs(self.amps)))

    @property
    def slope_sum(self) -> float:
        """Bound on |v'|, Σ 2π f_j |a_j|"""
        return float(np.sum(2 * np.pi * self.freqs * np.abs(self.amps)))

    @property
    def fmin(self) -> float:
        """Smallest frequency, 1.0 for the zero field"""
        return float(self.freqs.min()) if len(self.freqs) else 1.0

    @property
    def fmax(self) -> float:
        """Largest frequency, 1.0 for the zero field"""
        return float(self.freqs.max()) if len(self.freqs) else 1.0

    @property
    def period(self) -> float | None:
        """Spatial period, None when the field is not periodic"""
        if self.spec.model == RANDOM_PHASE:
            return None
        return 1 / self.fmin

    @property
    def default_window(self) -> float:
        """Averaging window L = 2000 / smallest frequency"""
        return 2000 / self.fmin

    def bounds(self, window: float, samples: int = 20001, m: float = 1.0) -> tuple[float, float, float, float]:
        """Cached Bound Estimates

        Args:
            window (float): Scan window length, [0, window]
            samples (int): Minimum number of scan samples
            m (float): Slope factor applied to k = m·v and s = m·v'

        Returns:
            k_lo, k_hi, s_lo, s_hi (float): Extrema of k and s on the window
        """
        key = (float(window), int(samples), float(m))
        if key not in self._bounds:
            self._bounds[key] = FieldPair.shear(self, m).bounds(window, samples)
        return self._bounds[key]


def sample_field(spec: FieldSpec) -> FieldRealization:
    """Realize a Field Specification

    Random phase models draw θ_j independently uniform on [0, 2π) from the spec seed,
    so equal specs always give identical evaluators.

    Args:
        spec (FieldSpec): Field specification

    Returns:
        real (FieldRealization): Deterministic sample path
    """
    if spec.model == RANDOM_PHASE:
        rng = np.random.default_rng(spec.seed)
        phases = rng.uniform(0, 2 * np.pi, size=len(spec.amplitudes))
    else:
        phases = np.array(spec.phases, dtype=float)
    real = FieldRealization(spec, phases)
    logger.debug(f"Realized {real}")
    return real


def eval_pair(real: FieldRealization, x: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shear Velocity and its Derivative

    Args:
        real (FieldRealization): Field sample path
        x (float): Position, scalar or array

    Returns:
        v (float): Velocity v(x)
        v_prime (float): Derivative v'(x)
    """
    return real.v(x), real.v_prime(x)


def field_bounds(
    real: FieldRealization, window: float, samples: int = 20001, m: float = 1.0
) -> tuple[float, float, float, float]:
    """Bounds of k = m·v and s = m·v'

    Extrema over a dense sample of [0, window], refined by a bounded local search
    around the best sampled peaks. Approximate, valid for the stated window only.

    Args:
        real (FieldRealization): Field sample path
        window (float): Scan window length
        samples (int): Minimum number of scan samples
        m (float): Slope factor, Default: 1

    Returns:
        k_lo, k_hi, s_lo, s_hi (float): Extrema of k and s
    """
    return real.bounds(window, samples, m)


def level_fraction(
    real: FieldRealization, threshold: float, window: float, m: float = 1.0, samples: int | None = None
) -> float:
    """Spatial Fraction Below a Strain Level

    Measure of {x in [-window, window] : s(x) < threshold} divided by 2·window,
    where s = m·v'.

    Args:
        real (FieldRealization): Field sample path
        threshold (float): Strain level
        window (float): Half width of the scan window
        m (float): Slope factor, Default: 1
        samples (int): Number of midpoint samples, Default: 64 per shortest wavelength

    Returns:
        fraction (float): Fraction of the window, 0 to 1
    """
    return FieldPair.shear(real, m).level_fraction(threshold, window, samples)


def sample_table(real: FieldRealization, window: float, samples: int = 2001) -> pd.DataFrame:
    """Sampled (x, v, v') table on [0, window] for plotting"""
    x = np.linspace(0, window, samples)
    v, v_prime = eval_pair(real, x)
    return pd.DataFrame({"x": x, "v": v, "v_prime": v_prime})


def scan_extrema(fn, lo: float, hi: float, samples: int, refine: int = 8) -> tuple[float, float]:
    """Extrema of a Smooth Function on an Interval

    Samples fn on a uniform grid, then polishes the best sampled local peaks
    with a bounded scalar search one grid step either side. Every peak whose sample
    sits within the curvature band of the best one is polished, up to MAX_POLISH.

    Args:
        fn (callable): Vectorized function of position
        lo (float): Left end of the interval
        hi (float): Right end of the interval
        samples (int): Number of uniform samples
        refine (int): Smallest number of sampled peaks to polish

    Returns:
        fmin (float): Minimum value
        fmax (float): Maximum value
    """
    x = np.linspace(lo, hi, max(int(samples), 3))
    y = np.asarray(fn(x), dtype=float)
    fmax = _polish_peak(fn, x, y, lo, hi, refine, sign=1.0)
    fmin = -_polish_peak(fn, x, -y, lo, hi, refine, sign=-1.0)
    return fmin, fmax


def _polish_peak(fn, x: np.ndarray, y: np.ndarray, lo: float, hi: float, refine: int, sign: float) -> float:
    """Largest value of sign·fn near the best sampled local maxima of y"""
    dx = x[1] - x[0]
    top = float(y.max())
    if np.ptp(y) == 0:
        return top

    interior = np.flatnonzero((y[1:-1] >= y[:-2]) & (y[1:-1] >= y[2:])) + 1
    peaks = np.concatenate([interior, [0, len(y) - 1]])
    peaks = peaks[np.argsort(y[peaks])[::-1]]

    # a peak between samples beats its sampled neighbour by at most max|Δ²y|/8
    band = float(np.abs(np.diff(y, 2)).max()) / 4
    close = int(np.count_nonzero(y[peaks] >= top - band))
    peaks = peaks[: min(max(refine, close), MAX_POLISH)]

    def neg(z):
        return -sign * float(fn(np.atleast_1d(z))[0])

    for idx in peaks:
        a, b = max(lo, x[idx] - dx), min(hi, x[idx] + dx)
        res = optimize.minimize_scalar(neg, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        top = max(top, -float(res.fun))
    return top


class FieldPair:
    def __init__(
        self,
        k_fn,
        s_fn,
        tag: str = "general",
        realization: FieldRealization | None = None,
        m: float | None = None,
        fmax: float = 1.0,
        period: float | None = None,
    ) -> None:
        """Coefficient Pair of the Strain Hamiltonian

        Holds the vectorized evaluators k(x) and s(x). Prefer the shear and general
        constructors over calling this directly.

        Args:
            k_fn (callable): Vectorized k(x)
            s_fn (callable): Vectorized s(x)
            tag (str): "shear" or "general"
            realization (FieldRealization): Source sample path for shear pairs
            m (float): Slope factor for shear pairs
            fmax (float): Highest frequency present, sets the scan resolution
            period (float): Spatial period, None if not periodic

        Returns:
            Self
        """
        self._k_fn = k_fn
        self._s_fn = s_fn
        self.tag = tag
        self.realization = realization
        self.m = m
        self.fmax = fmax
        self.period = period
        self.window_hint = None
        self._cache = dict()

    def __repr__(self) -> str:
        if self.tag == "shear":
            return f"Shear Pair k = {self.m}·v, s = {self.m}·v' on {self.realization}"
        return f"General Pair ({self.tag})"

    @classmethod
    def shear(cls, real: FieldRealization, m: float):
        """Shear Flow Pair, k = m·v and s = m·v'

        s vanishes at every local maximum of k since v' does at every maximum of v.

        Args:
            real (FieldRealization): Shear flow sample path
            m (float): Horizontal slope component

        Returns:
            pair (FieldPair): Coefficient pair
        """
        m = float(m)
        return cls(
            lambda x: m * real.v(x),
            lambda x: m * real.v_prime(x),
            tag="shear",
            realization=real,
            m=m,
            fmax=real.fmax,
            period=real.period,
        )

    @classmethod
    def general(
        cls,
        k_fn,
        s_fn,
        window: float = 10.0,
        samples: int = 20001,
        check_peaks: bool = True,
        fmax: float = 1.0,
        period: float | None = None,
    ):
        """Hand Supplied Pair

        Verifies that s vanishes at every detected local maximum of k on [0, window].
        Pass check_peaks=False to explore pairs that break this on purpose.

        Args:
            k_fn (callable): Vectorized k(x)
            s_fn (callable): Vectorized s(x)
            window (float): Window used for the local maximum scan
            samples (int): Scan samples
            check_peaks (bool): Reject pairs with s ≠ 0 at local maxima of k
            fmax (float): Highest frequency present, sets the scan resolution
            period (float): Spatial period, None if not periodic

        Returns:
            pair (FieldPair): Coefficient pair
        """
        if check_peaks:
            cls._check_local_max_strain(k_fn, s_fn, window, samples)
        else:
            logger.warning("Building a coefficient pair without the local maximum strain check")
        return cls(k_fn, s_fn, tag="general", fmax=fmax, period=period)

    @staticmethod
    def _check_local_max_strain(k_fn, s_fn, window: float, samples: int) -> None:
        """Raise when s is nonzero at a local maximum of k"""
        x = np.linspace(0, window, samples)
        kv = np.asarray(k_fn(x), dtype=float)
        sv = np.asarray(s_fn(x), dtype=float)
        snorm = max(1.0, float(np.abs(sv).max()))
        dx = x[1] - x[0]

        peaks = np.flatnonzero((kv[1:-1] > kv[:-2]) & (kv[1:-1] >= kv[2:])) + 1
        for idx in peaks:
            res = optimize.minimize_scalar(
                lambda z: -float(k_fn(np.atleast_1d(z))[0]),
                bounds=(x[idx] - dx, x[idx] + dx),
                method="bounded",
                options={"xatol": 1e-12},
            )
            s_peak = float(s_fn(np.atleast_1d(res.x))[0])
            if abs(s_peak) > 1e-6 * snorm:
                raise InvalidSpecError(f"s = {s_peak:.3e} at local maximum of k near x = {res.x:.6f}")

        if np.ptp(kv) == 0 and np.ptp(sv) == 0:
            logger.warning("Both k and s are constant on the scan window")

    def k(self, x: float | np.ndarray) -> np.ndarray:
        """Potential Term k(x)"""
        return np.asarray(self._k_fn(np.asarray(x, dtype=float)), dtype=float)

    def s(self, x: float | np.ndarray) -> np.ndarray:
        """Strain Coefficient s(x)"""
        return np.asarray(self._s_fn(np.asarray(x, dtype=float)), dtype=float)

    @property
    def is_zero(self) -> bool:
        """True when the pair comes from an all zero amplitude field or a zero slope factor"""
        if self.realization is not None:
            return self.realization.amp_sum == 0 or self.m == 0
        return False

    @property
    def default_window(self) -> float:
        """Averaging window, 2000 / smallest frequency for shear pairs"""
        if self.window_hint is not None:
            return self.window_hint
        if self.realization is not None:
            return self.realization.default_window
        return 2000 * (self.period or 1.0)

    def scan_samples(self, window: float, samples: int) -> int:
        """Sample count with at least PTS_PER_WAVE points per shortest wavelength"""
        return max(int(samples), int(np.ceil(window * PTS_PER_WAVE * self.fmax)) + 1)

    def bounds(self, window: float, samples: int = 20001) -> tuple[float, float, float, float]:
        """Extrema of k and s on [0, window]

        Args:
            window (float): Scan window length, must be positive
            samples (int): Minimum number of scan samples

        Returns:
            k_lo, k_hi, s_lo, s_hi (float): Extrema of k and s
        """
        if window <= 0:
            raise ValueError(f"Scan window {window} must be positive")
        key = ("bounds", float(window), int(samples))
        if key not in self._cache:
            if self.is_zero:
                self._cache[key] = (0.0, 0.0, 0.0, 0.0)
            else:
                n = self.scan_samples(window, samples)
                k_lo, k_hi = scan_extrema(self.k, 0.0, window, n)
                s_lo, s_hi = scan_extrema(self.s, 0.0, window, n)
                self._cache[key] = (k_lo, k_hi, s_lo, s_hi)
                logger.debug(f"Bounds on [0, {window}] with {n} samples: k [{k_lo}, {k_hi}], s [{s_lo}, {s_hi}]")
        return self._cache[key]

    def s_norm(self, window: float, samples: int = 20001) -> float:
        """Sup norm of s on the window, ‖s‖"""
        k_lo, k_hi, s_lo, s_hi = self.bounds(window, samples)
        return max(abs(s_lo), abs(s_hi))

    def level_fraction(self, threshold: float, window: float, samples: int | None = None) -> float:
        """Fraction of [-window, window] where s(x) < threshold

        Args:
            threshold (float): Strain level
            window (float): Half width of the scan window
            samples (int): Midpoint samples, Default: 64 per shortest wavelength

        Returns:
            fraction (float): Fraction of the window, 0 to 1
        """
        if window <= 0:
            raise ValueError(f"Scan window {window} must be positive")
        if samples is None:
            samples = max(200000, int(np.ceil(2 * window * 2 * PTS_PER_WAVE * self.fmax)))
        edges = np.linspace(-window, window, samples + 1)
        mids = 0.5 * (edges[1:] + edges[:-1])
        return float(np.mean(self.s(mids) < threshold))

    def stats(self, window: float, samples: int = 20001):
        """Strain Statistics of the Pair

        Args:
            window (float): Scan window length
            samples (int): Minimum number of scan samples

        Returns:
            stats (FieldStats): τ = |inf s|, α and the window
        """
        return FieldStats.from_pair(self, window, samples)

    def flipped(self):
        """Pair with s replaced by -s, used for the n < 0 sign symmetry"""
        flip = FieldPair(
            self._k_fn,
            lambda x: -np.asarray(self._s_fn(x), dtype=float),
            tag=self.tag + "-flipped",
            realization=self.realization,
            m=self.m,
            fmax=self.fmax,
            period=self.period,
        )
        return flip

    def shifted(self, dk: float):
        """Pair with k replaced by k + dk"""
        shift = FieldPair(
            lambda x: np.asarray(self._k_fn(x), dtype=float) + dk,
            self._s_fn,
            tag=self.tag + "-shifted",
            m=self.m,
            fmax=self.fmax,
            period=self.period,
        )
        shift.window_hint = self.default_window
        return shift


class FieldStats:
    def __init__(self, tau: float, alpha: float, window: float) -> None:
        """Strain Statistics Behind the Quench Threshold

        Args:
            tau (float): |inf s|, dimensionless
            alpha (float): Fraction of the window where s < -τ/2
            window (float): Scan window length

        Returns:
            Self
        """
        if tau < 0:
            raise InvalidSpecError(f"Strain depth τ = {tau} must not be negative")
        if (0 <= alpha <= 1) is False:
            raise InvalidSpecError(f"Fraction α = {alpha} outside [0, 1]")

        self.tau = tau
        self.alpha = alpha
        self.window = window

    def __repr__(self) -> str:
        return f"FieldStats: τ = {self.tau:.6g}, α = {self.alpha:.6g} on window {self.window}"

    @classmethod
    def from_pair(cls, pair: FieldPair, window: float, samples: int = 20001):
        """Measure τ and α of a coefficient pair on a window"""
        k_lo, k_hi, s_lo, s_hi = pair.bounds(window, samples)
        tau = abs(min(s_lo, 0.0))
        alpha = pair.level_fraction(-tau / 2, window) if tau > 0 else 0.0
        return cls(tau, alpha, window)

    @property
    def admissible(self) -> bool:
        """True when τ > 0 and 0 < α < 1"""
        return self.tau > 0 and 0 < self.alpha < 1
