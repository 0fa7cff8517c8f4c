"""Validation Suite

Runs every invariant of the lab as a named check and collects PASS, FAIL or SKIP
verdicts into a RunManifest. Checks whose hypotheses are not met SKIP with a reason
instead of failing. The manifest is deterministic for a fixed config, wall clock
timings go to a separate file.
"""

import json
import logging
import time
from pathlib import Path

import numpy as np
from scipy import integrate

from assembly.config import VERSION, ExperimentConfig
from field.shear import PERIODIC, RANDOM_PHASE, ZERO, FieldPair, FieldSpec, sample_field
from front.frontsim import FrontState, evolve, measure_strain_reduction, simulate_speed
from hamilton.hamiltonian import StrainHamiltonian, branch_roots, critical_point
from hamilton.quasiconvex import check_quasiconvex, check_quasiconvex_fn, perturbed_plateau_hamiltonian
from homog.corrector import corrector, verify_cell
from homog.discount import DiscountProblem, solve_discounted, vanishing_discount_estimate
from homog.effective import EffectiveHamiltonian
from strain.curve import check_lipschitz, max_increase, oriented_pair, strain_curve, strict_decrease_gaps
from strain.identity import HypothesisError, claim1_check, differentiated_identity_check
from strain.quench import UndefinedThresholdError, build_quench_witness, quench_check, quench_threshold
from strain.theorem import main_theorem_check

logger = logging.getLogger(__name__)

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"
CURVE_POINTS = 40
AGREEMENT_C = (0.0, 0.2, 0.5)
LIFT = 0.05  # h(c) must clear H̄* by this much before routes are compared

CHECKS = []


def check(name: str, strain: bool = False):
    """Register a check, strain checks SKIP on the trivial slopes m = 0 or n = 0"""

    def wrap(fn):
        CHECKS.append((name, fn, strain))
        return fn

    return wrap


class CheckVerdict:
    def __init__(self, name: str, status: str, detail: str) -> None:
        self.name = name
        self.status = status
        self.detail = detail

    def __repr__(self) -> str:
        return f"{self.status:<4} {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


class RunManifest:
    def __init__(self, config_hash: str, version: str = VERSION) -> None:
        """Verdicts of one Validation Run

        Args:
            config_hash (str): SHA-256 of the canonical config
            version (str): Artifact version

        Returns:
            Self
        """
        self.config_hash = config_hash
        self.version = version
        self.verdicts = []
        self.timings = dict()

    def __repr__(self):
        """Creates a fancy table to see the verdicts"""
        sformat = "{:>32} | {:>4} | {}\n"
        spc = 80 * "-" + "\n"
        pout = sformat.format("check", "", "detail") + spc
        for verdict in self.verdicts:
            pout += sformat.format(verdict.name, verdict.status, verdict.detail)
        counts = self.counts
        pout += spc + f"{counts[PASS]} passed, {counts[FAIL]} failed, {counts[SKIP]} skipped\n"
        return pout

    def add(self, name: str, status: str, detail: str, seconds: float = 0.0) -> None:
        if any(v.name == name for v in self.verdicts):
            raise ValueError(f"Check {name} is already in the manifest")
        self.verdicts.append(CheckVerdict(name, status, detail))
        self.timings[name] = seconds

    @property
    def counts(self) -> dict:
        return {status: sum(v.status == status for v in self.verdicts) for status in (PASS, FAIL, SKIP)}

    @property
    def passed(self) -> bool:
        """True when no check failed"""
        return self.counts[FAIL] == 0

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def status_of(self, name: str) -> str:
        for verdict in self.verdicts:
            if verdict.name == name:
                return verdict.status
        raise KeyError(f"Check {name} not in the manifest")

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "version": self.version,
            "checks": [v.to_dict() for v in self.verdicts],
            "summary": self.counts,
        }

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        """Write manifest.json and timings.json

        Args:
            out_dir (str): Output directory, created when missing

        Returns:
            manifest_path (Path): Deterministic verdict file
            timings_path (Path): Seconds per check
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest_path = out_dir / "manifest.json"
        timings_path = out_dir / "timings.json"
        manifest_path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        timings = {name: round(sec, 3) for name, sec in self.timings.items()}
        timings_path.write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
        return manifest_path, timings_path


class Lab:
    def __init__(self, config: ExperimentConfig) -> None:
        """Shared state of a validation run, realizations and cached curves"""
        self.config = config
        self.real = sample_field(config.field)
        self.window = config.window or self.real.default_window
        self.m = config.m
        self.n = config.n
        self.h_m = config.m if config.m != 0 else 1.0
        self._reals = None
        self._curves = dict()
        self._effs = dict()

    @property
    def trivial(self) -> str | None:
        """Reason strain checks are skipped, None for a genuine two dimensional slope"""
        if self.m == 0:
            return "m=0 trivial case"
        if self.n == 0:
            return "n=0 trivial case"
        return None

    @property
    def periodic(self) -> bool:
        return self.real.period is not None

    @property
    def realizations(self) -> list:
        """Config field plus one realization per extra seed for random phase fields"""
        if self._reals is None:
            spec = self.config.field
            self._reals = [self.real]
            if spec.model == RANDOM_PHASE:
                for seed in self.config.seeds:
                    if seed != spec.seed:
                        extra = FieldSpec(spec.model, spec.amplitudes, spec.frequencies, seed)
                        self._reals.append(sample_field(extra))
        return self._reals

    def oriented(self, real=None) -> tuple[FieldPair, float]:
        return oriented_pair(real or self.real, self.m, self.n)

    def c_bar(self, real=None) -> float | None:
        pair, n = self.oriented(real)
        try:
            return quench_threshold(pair.stats(self.window), self.m, n)
        except UndefinedThresholdError:
            return None

    def curve(self, real=None):
        """Strain curve on 40 points over [0, 2c̄], or the config grid when c̄ is undefined"""
        real = real or self.real
        key = real.spec.seed
        if key not in self._curves:
            c_bar = self.c_bar(real)
            c_ray = np.linspace(0, 2 * c_bar, CURVE_POINTS) if c_bar else np.array(self.config.c_list)
            self._curves[key] = strain_curve(real, self.m, self.n, c_ray, self.window, **self.config.eff_kw)
        return self._curves[key]

    def effective(self, c: float, real=None) -> tuple[EffectiveHamiltonian, float]:
        """Effective Hamiltonian of the oriented pair at c, with the slope n to evaluate at"""
        real = real or self.real
        key = (real.spec.seed, float(c))
        pair, n = self.oriented(real)
        if key not in self._effs:
            self._effs[key] = EffectiveHamiltonian(StrainHamiltonian(self.m, c, pair), self.window, **self.config.eff_kw)
        return self._effs[key], n

    def hamiltonian(self, c: float, real=None) -> StrainHamiltonian:
        """Hamiltonian for the one dimensional checks, m replaced by one when the slope has m = 0"""
        return StrainHamiltonian.shear(real or self.real, self.h_m, c)


# field


@check("field.reproducible")
def _field_reproducible(lab: Lab):
    twin = sample_field(lab.config.field)
    x_ray = np.linspace(0, lab.window, 10001)
    same = np.array_equal(twin.phases, lab.real.phases) and np.array_equal(twin.v(x_ray), lab.real.v(x_ray))
    return (PASS if same else FAIL), "equal specs give identical evaluators" if same else "resampled field differs"


@check("field.mean_slope")
def _field_mean_slope(lab: Lab):
    x_ray = np.linspace(0, lab.window, int(lab.window * 64 * lab.real.fmax) + 1)
    mean = abs(integrate.trapezoid(lab.real.v_prime(x_ray), x_ray)) / lab.window
    bound = 2 * lab.real.amp_sum / lab.window
    status = PASS if mean <= bound + 1e-9 else FAIL
    return status, f"|mean v'| = {mean:.3e}, bound {bound:.3e}"


@check("field.bounds")
def _field_bounds(lab: Lab):
    k_lo, k_hi, s_lo, s_hi = lab.real.bounds(lab.window, m=1.0)
    x_ray = np.linspace(0, lab.window, 10007)
    v_ray, dv_ray = lab.real.v(x_ray), lab.real.v_prime(x_ray)
    inside = (v_ray >= k_lo - 1e-9).all() and (v_ray <= k_hi + 1e-9).all()
    inside = inside and (dv_ray >= s_lo - 1e-9).all() and (dv_ray <= s_hi + 1e-9).all()
    within = k_hi <= lab.real.amp_sum + 1e-12 and s_hi <= lab.real.slope_sum + 1e-12
    status = PASS if inside and within else FAIL
    return status, f"sup v = {k_hi:.8f}, sup v' = {s_hi:.8f}"


@check("field.strain_stats")
def _field_strain_stats(lab: Lab):
    stats = FieldPair.shear(lab.real, 1.0).stats(lab.window)
    if lab.real.amp_sum == 0:
        status = PASS if stats.tau == 0 and stats.alpha == 0 else FAIL
    else:
        status = PASS if stats.admissible else FAIL
    return status, f"τ = {stats.tau:.8f}, α = {stats.alpha:.6f}"


# hamiltonian


def _random_points(lab: Lab, count: int = 100) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(lab.config.seeds[0])
    return rng.uniform(0, lab.window, count), rng.uniform(0, 2, count)


@check("hamiltonian.branch_roots")
def _ham_branch_roots(lab: Lab):
    x_ray, c_ray = _random_points(lab)
    rng = np.random.default_rng(lab.config.seeds[0] + 1)
    worst, ordered = 0.0, True
    for x, c in zip(x_ray, c_ray):
        h = lab.hamiltonian(c)
        p_star, h_min = critical_point(h, x)
        mu = float(h_min) + rng.uniform(0.01, 3.0)
        roots = branch_roots(h, x, mu)
        worst = max(worst, float(abs(h.H(roots.q_minus, x) - mu)), float(abs(h.H(roots.q_plus, x) - mu)))
        ordered = ordered and bool(roots.q_minus < p_star < roots.q_plus)
        ordered = ordered and bool(h.dHdp(roots.q_minus, x) < 0 < h.dHdp(roots.q_plus, x))
    status = PASS if worst <= 1e-9 and ordered else FAIL
    return status, f"max residual {worst:.2e}, ordered {ordered}"


@check("hamiltonian.derivative")
def _ham_derivative(lab: Lab):
    x_ray, c_ray = _random_points(lab)
    p_ray = np.linspace(-4, 4, len(x_ray))
    step = 1e-6
    worst = 0.0
    for x, c, p in zip(x_ray, c_ray, p_ray):
        h = lab.hamiltonian(c)
        diff = (h.H(p + step, x) - h.H(p - step, x)) / (2 * step)
        worst = max(worst, float(abs(diff - h.dHdp(p, x))))
    status = PASS if worst <= 1e-6 else FAIL
    return status, f"max central difference gap {worst:.2e}"


@check("hamiltonian.quasiconvex")
def _ham_quasiconvex(lab: Lab):
    x_ray, c_ray = _random_points(lab)
    p_ray = np.linspace(-10, 10, 2001)
    fails = 0
    for x, c in zip(x_ray, c_ray):
        h = lab.hamiltonian(c)
        fails += not check_quasiconvex_fn(lambda p: h.H(p, x), p_ray, tol=1e-10)
    status = PASS if fails == 0 else FAIL
    return status, f"{fails} of {len(x_ray)} sampled (x, c) violate level set convexity"


@check("hamiltonian.plateau_witness")
def _ham_plateau_witness(lab: Lab):
    p_ray = np.array([0.0, 1.0, 2.0])
    verdict = check_quasiconvex_fn(lambda p: perturbed_plateau_hamiltonian(p, 0.1), p_ray)
    if verdict.passed:
        return FAIL, "perturbed plateau passed the quasiconvexity check"
    values = tuple(pt[1] for pt in verdict.witness)
    good = verdict.triple == (0.0, 1.0, 2.0) and np.allclose(values, (0.0, 0.1, -0.6), atol=1e-12)
    return (PASS if good else FAIL), f"witness {verdict.triple} with values {tuple(round(v, 12) for v in values)}"


# effective


@check("effective.zero_field_exact")
def _eff_zero_field(lab: Lab):
    zero = sample_field(FieldSpec.zero())
    c = lab.config.c_list[-1]
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(zero, lab.h_m, c), 1.0, **lab.config.eff_kw)
    p_ray = np.linspace(-3, 3, 50)
    got = np.array([eff.H_bar(p) for p in p_ray])
    worst = float(np.max(np.abs(got - np.hypot(lab.h_m, p_ray))))
    return (PASS if worst <= 1e-8 else FAIL), f"max |H̄ - √(m² + p²)| = {worst:.2e} at c = {c}"


@check("effective.oracle")
def _eff_oracle(lab: Lab):
    golden = sample_field(FieldSpec.golden())
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(golden, 1.0, 0.0), 1.0)
    worst, trip = 0.0, 0.0
    for mu in (1.6, 2.0, 3.0):
        oracle, err = integrate.quad(lambda x: np.sqrt((mu - 0.5 * np.cos(2 * np.pi * x)) ** 2 - 1), 0, 1, epsabs=1e-13, epsrel=1e-13)
        p_plus = eff.P_plus(mu)
        worst = max(worst, abs(p_plus - oracle))
        trip = max(trip, abs(eff.mu_branch(p_plus) - mu))
    status = PASS if worst <= 1e-6 and trip <= 1e-6 else FAIL
    return status, f"max |P+ - oracle| = {worst:.2e}, round trip {trip:.2e}"


@check("effective.monotone")
def _eff_monotone(lab: Lab):
    good = True
    for c in (lab.config.c_list[0], lab.config.c_list[-1]):
        eff = EffectiveHamiltonian(lab.hamiltonian(c), lab.window, **lab.config.eff_kw)
        good = good and eff.book.is_monotone()
    return (PASS if good else FAIL), "P+ increasing and P- decreasing" if good else "branch table not monotone"


@check("effective.flat_minimum")
def _eff_flat_minimum(lab: Lab):
    eff = EffectiveHamiltonian(lab.hamiltonian(lab.config.c_list[0]), lab.window, **lab.config.eff_kw)
    p_ray = np.sort(np.append(lab.config.p_ray, np.mean(eff.p_bar)))
    h_ray = np.array([eff.H_bar(p) for p in p_ray])
    low = float(h_ray.min())
    status = PASS if abs(low - eff.h_star) <= 1e-12 and np.all(h_ray >= eff.h_star - 1e-12) else FAIL
    return status, f"min H̄ = {low:.12f}, H̄* = {eff.h_star:.12f}"


@check("effective.quasiconvex")
def _eff_quasiconvex(lab: Lab):
    eff = EffectiveHamiltonian(lab.hamiltonian(lab.config.c_list[-1]), lab.window, **lab.config.eff_kw)
    samples = [(p, eff.H_bar(p)) for p in lab.config.p_ray]
    verdict = check_quasiconvex(samples, tol=1e-9)
    return (PASS if verdict else FAIL), f"{verdict}"


@check("effective.window")
def _eff_window(lab: Lab):
    eff = EffectiveHamiltonian(lab.hamiltonian(lab.config.c_list[0]), lab.window, **lab.config.eff_kw)
    value, err = eff.estimate(eff.h_star + 1.0)
    return (PASS if err < 1e-3 else FAIL), f"P+ = {value:.10f}, |L vs L/2| = {err:.2e}"


@check("corrector.cell_residual")
def _corr_residual(lab: Lab):
    h = lab.hamiltonian(lab.config.c_list[0])
    mu = h.flat_level(lab.window) + 0.5
    corr = corrector(h, mu, lab.window)
    exact = verify_cell(h, mu, corr.p_avg, corr)
    shifted = verify_cell(h, mu, corr.p_avg + 0.05, corr)
    status = PASS if exact < 1e-8 and shifted > 1e-3 else FAIL
    return status, f"residual {exact:.2e} at P+, {shifted:.2e} at P+ + 0.05"


@check("corrector.sublinear")
def _corr_sublinear(lab: Lab):
    ratios = []
    for real in lab.realizations:
        h = lab.hamiltonian(lab.config.c_list[0], real)
        mu = h.flat_level(lab.window) + 0.5
        d1 = corrector(h, mu, lab.window).drift
        d2 = corrector(h, mu, 2 * lab.window).drift
        ratios.append(0.0 if d1 < 1e-12 else d2 / d1)
    worst = max(ratios)
    return (PASS if worst <= 0.6 else FAIL), f"drift ratio 2L/L at most {worst:.4f} over {len(ratios)} realizations"


# discount


def _discount_pair(lab: Lab, c: float, shift: float = 0.0) -> tuple[StrainHamiltonian, float]:
    pair, n = lab.oriented()
    if shift:
        pair = pair.shifted(shift)
    return StrainHamiltonian(lab.m, c, pair), n


def _discount_prob(lab: Lab, delta: float, p: float, theta: float | None = None) -> DiscountProblem:
    cfg = lab.config
    return DiscountProblem(delta, p, cfg.grid_step, cfg.domain, theta if theta is not None else cfg.theta_override)


@check("discount.zero_field")
def _disc_zero_field(lab: Lab):
    zero = sample_field(FieldSpec.zero())
    h = StrainHamiltonian.shear(zero, lab.h_m, 0.0)
    sol = solve_discounted(DiscountProblem(1e-2, 1.0, 1e-2), h, window=1.0)
    target = float(np.hypot(lab.h_m, 1.0))
    gap = abs(sol.estimate - target)
    return (PASS if gap <= 1e-3 else FAIL), f"-δu(0) = {sol.estimate:.10f}, √(m² + 1) = {target:.10f}"


@check("discount.agreement", strain=True)
def _disc_agreement(lab: Lab):
    if not lab.periodic:
        return SKIP, "discount agreement runs on periodic fields"
    rows = []
    for c in AGREEMENT_C:
        eff, n = lab.effective(c)
        h_bar = eff.H_bar(n)
        if h_bar <= eff.h_star + LIFT:
            continue
        h, n = _discount_pair(lab, c)
        est, limit = vanishing_discount_estimate(
            h, n, lab.config.deltas, lab.config.grid_step, lab.config.domain, lab.config.theta_override, lab.window
        )
        rows.append((c, abs(h_bar - limit)))
    if len(rows) == 0:
        return SKIP, f"h(c) within {LIFT} of H̄* at every c"
    worst = max(gap for c, gap in rows)
    return (PASS if worst <= 1e-2 else FAIL), f"max |H̄ - discount limit| = {worst:.2e} at {len(rows)} Markstein numbers"


@check("discount.bounded", strain=True)
def _disc_bounded(lab: Lab):
    h, n = _discount_pair(lab, lab.config.c_list[0])
    sol = solve_discounted(_discount_prob(lab, lab.config.deltas[0], n), h, lab.window)
    bound = float(np.max(np.abs(h.H(n, sol.x_ray))))
    return (PASS if sol.sup_norm <= bound + 1e-8 else FAIL), f"‖δu‖ = {sol.sup_norm:.8f}, sup |H(p, ·)| = {bound:.8f}"


@check("discount.shift", strain=True)
def _disc_shift(lab: Lab):
    delta = lab.config.deltas[0]
    h, n = _discount_pair(lab, lab.config.c_list[0])
    h_up, n = _discount_pair(lab, lab.config.c_list[0], shift=1.0)
    theta = h.slope_bound(lab.window)
    base = solve_discounted(_discount_prob(lab, delta, n, theta), h, lab.window)
    up = solve_discounted(_discount_prob(lab, delta, n, theta), h_up, lab.window)
    gap = abs(up.estimate - base.estimate - 1.0)
    return (PASS if gap <= 1e-6 else FAIL), f"k + 1 moves -δu(0) by 1 within {gap:.2e}"


@check("discount.lipschitz_c", strain=True)
def _disc_lipschitz(lab: Lab):
    delta = lab.config.deltas[0]
    c0, dc = lab.config.c_list[0], 0.1
    h0, n = _discount_pair(lab, c0)
    h1, n = _discount_pair(lab, c0 + dc)
    theta = max(h1.slope_bound(lab.window), lab.config.theta_override or 0.0)
    est0 = solve_discounted(_discount_prob(lab, delta, n, theta), h0, lab.window).estimate
    est1 = solve_discounted(_discount_prob(lab, delta, n, theta), h1, lab.window).estimate
    s_norm = h0.pair.s_norm(lab.window)
    status = PASS if abs(est1 - est0) <= s_norm * dc + 1e-8 else FAIL
    return status, f"|Δ(-δu(0))| = {abs(est1 - est0):.3e}, ‖s‖·Δc = {s_norm * dc:.3e}"


# strain


@check("strain.lipschitz", strain=True)
def _strain_lipschitz(lab: Lab):
    worst = max(check_lipschitz(lab.curve(real)) for real in lab.realizations)
    return (PASS if worst <= 1.05 else FAIL), f"max |Δh|/(‖s‖Δc) = {worst:.4f}"


@check("strain.monotone", strain=True)
def _strain_monotone(lab: Lab):
    worst = max(max_increase(lab.curve(real)) for real in lab.realizations)
    return (PASS if worst <= 1e-3 else FAIL), f"largest step Δh = {worst:.3e}"


@check("strain.strict_decrease", strain=True)
def _strain_strict(lab: Lab):
    if lab.real.amp_sum == 0:
        return SKIP, "zero field, h is constant in c"
    gaps = np.concatenate([strict_decrease_gaps(lab.curve(real)) for real in lab.realizations])
    if len(gaps) == 0:
        return SKIP, "no curve point above H̄* + 1e-2"
    low = float(gaps.min())
    return (PASS if low > 1e-3 else FAIL), f"smallest drop {low:.3e} over {len(gaps)} lifted points"


@check("strain.quench", strain=True)
def _strain_quench(lab: Lab):
    rows = []
    for real in lab.realizations:
        c_bar = lab.c_bar(real)
        if c_bar is None:
            return SKIP, "quench threshold undefined, strain never negative"
        for c in (1.1 * c_bar, 2 * c_bar):
            rows.append(quench_check(real, lab.m, lab.n, c, lab.window, **lab.config.eff_kw))
    worst = max(abs(v.h - v.h_star) for v in rows)
    good = all(v.passed for v in rows)
    return (PASS if good else FAIL), f"max |h - H̄*| = {worst:.2e} at 1.1c̄ and 2c̄, c̄ = {rows[0].c_bar:.6g}"


@check("strain.witness", strain=True)
def _strain_witness(lab: Lab):
    c_bar = lab.c_bar()
    if c_bar is None:
        return SKIP, "quench threshold undefined, strain never negative"
    worst, good = -np.inf, True
    for c in (1.1 * c_bar, 2 * c_bar):
        wit = build_quench_witness(lab.real, lab.m, lab.n, c, lab.window)
        worst = max(worst, wit.max_H - wit.h_star)
        good = good and wit.passed and wit.bound_ok
    return (PASS if good else FAIL), f"max H(n + φ') - H̄* = {worst:.3e}"


@check("strain.sandwich", strain=True)
def _strain_sandwich(lab: Lab):
    report = main_theorem_check(lab.real, lab.m, lab.n, lab.config.c_list, lab.window, **lab.config.eff_kw)
    return (PASS if report.sandwich_ok else FAIL), f"H̄* = {report.lower:.10f} ≤ h(c) ≤ h(0) at {len(report.frame)} points"


@check("strain.strict_reduction", strain=True)
def _strain_reduction(lab: Lab):
    report = main_theorem_check(lab.real, lab.m, lab.n, [0.5], lab.window, **lab.config.eff_kw)
    frame = report.frame
    h0 = float(frame["h"].iloc[0])
    h_half = float(frame.loc[np.isclose(frame["c"], 0.5), "h"].iloc[0])
    if report.flow_trivial:
        return (PASS if report.strict_ok else FAIL), "m·v ≡ 0, h is constant in c"
    if h0 <= report.lower + 1e-3:
        return SKIP, "h(0) sits on the flat value"
    good = report.strict_ok and h0 - h_half > 1e-3
    return (PASS if good else FAIL), f"h(0) - h(0.5) = {h0 - h_half:.3e}"


def _lifted_cs(lab: Lab) -> list:
    """Markstein numbers of the config grid where h(c) clears the flat value"""
    lifted = []
    for c in lab.config.c_list:
        eff, n = lab.effective(c)
        if eff.H_bar(n) > eff.h_star + 1e-3:
            lifted.append(c)
    return lifted


@check("strain.claim1", strain=True)
def _strain_claim1(lab: Lab):
    rows = []
    for c in _lifted_cs(lab):
        try:
            rows.append(claim1_check(lab.real, lab.m, lab.n, c, lab.window, **lab.config.eff_kw))
        except HypothesisError as err:
            logger.debug(f"Positivity check skipped at c = {c}: {err}")
    if len(rows) == 0:
        return SKIP, "h(c) = H̄* at every config c"
    low = min(min(r.min_shift, r.min_slope) for r in rows)
    good = all(r.passed for r in rows)
    return (PASS if good else FAIL), f"smallest minimum {low:.6g} over {len(rows)} Markstein numbers"


@check("strain.identity", strain=True)
def _strain_identity(lab: Lab):
    rows = []
    for c in [c for c in _lifted_cs(lab) if c > 0]:
        try:
            rows.append(differentiated_identity_check(lab.real, lab.m, lab.n, c, L=lab.window, **lab.config.eff_kw))
        except HypothesisError as err:
            logger.debug(f"Identity check skipped at c = {c}: {err}")
    if len(rows) == 0:
        return SKIP, "h(c) = H̄* at every positive config c"
    worst = max(abs(r.e_dcu) for r in rows)
    good = all(r.passed for r in rows)
    return (PASS if good else FAIL), f"max |E[∂c u']| = {worst:.2e} over {len(rows)} Markstein numbers"


@check("strain.edges")
def _strain_edges(lab: Lab):
    m_edge = main_theorem_check(lab.real, 0.0, 1.0, lab.config.c_list, lab.window)
    good = m_edge.passed and np.allclose(m_edge.frame["h"], 1.0)
    worst = 0.0
    for c in lab.config.c_list:
        eff = EffectiveHamiltonian(StrainHamiltonian.shear(lab.real, 1.0, c), lab.window, **lab.config.eff_kw)
        worst = max(worst, abs(eff.H_bar(0.0) - eff.h_star))
    good = good and worst <= 1e-12
    return (PASS if good else FAIL), f"m = 0 gives h ≡ 1, n = 0 gives H̄* within {worst:.2e}"


# frontsim


@check("frontsim.zero_field")
def _front_zero_field(lab: Lab):
    zero = sample_field(FieldSpec.zero())
    speed = simulate_speed(zero, lab.m, lab.n, 0.5, grid=128, T=1.0)
    return (PASS if abs(speed - 1.0) <= 1e-2 else FAIL), f"speed {speed:.8f} for a unit slope"


@check("frontsim.agreement", strain=True)
def _front_agreement(lab: Lab):
    if lab.config.field.model not in (PERIODIC, ZERO):
        return SKIP, "front simulation needs a periodic flow"
    cfg = lab.config
    rows = []
    for c in AGREEMENT_C:
        eff, n = lab.effective(c)
        h_bar = eff.H_bar(n)
        if h_bar <= eff.h_star + LIFT:
            continue
        speed = simulate_speed(lab.real, lab.m, lab.n, c, cfg.sim_grid, cfg.sim_T, cfg.sim_cfl)
        rows.append(abs(h_bar - speed) / h_bar)
    if len(rows) == 0:
        return SKIP, f"h(c) within {LIFT} of H̄* at every c"
    worst = max(rows)
    return (PASS if worst <= 0.05 else FAIL), f"max relative gap {worst:.4f} at {len(rows)} Markstein numbers"


@check("frontsim.reduction")
def _front_reduction(lab: Lab):
    if lab.config.field.model not in (PERIODIC, ZERO):
        return SKIP, "front simulation needs a periodic flow"
    cfg = lab.config
    speed_0, speed_1 = measure_strain_reduction(lab.real, lab.m, lab.n, (0.0, 0.5), cfg.sim_grid, cfg.sim_T)
    return (PASS if speed_1 <= speed_0 + 1e-3 else FAIL), f"speed {speed_0:.6f} at c = 0, {speed_1:.6f} at c = 0.5"


@check("frontsim.translation")
def _front_translation(lab: Lab):
    if lab.config.field.model not in (PERIODIC, ZERO):
        return SKIP, "front simulation needs a periodic flow"
    grid = 64
    height = lab.real.period or 1.0
    xx, yy = np.meshgrid(np.arange(grid) / grid, np.arange(grid) / grid)
    w0 = 0.1 * np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy)
    step = height / grid
    base, book = evolve(FrontState(w0, lab.m, lab.n, step, step), lab.real, 0.5, 0.1)
    rolled, book = evolve(FrontState(np.roll(w0, 5, axis=1), lab.m, lab.n, step, step), lab.real, 0.5, 0.1)
    gap = float(np.max(np.abs(np.roll(base.w, 5, axis=1) - rolled.w)))
    return (PASS if gap <= 1e-12 else FAIL), f"shift along x commutes with evolution within {gap:.2e}"


# run


@check("run.reproducible", strain=True)
def _run_reproducible(lab: Lab):
    c = lab.config.c_list[0]
    twin = sample_field(lab.config.field)
    first = float(strain_curve(lab.real, lab.m, lab.n, [c], lab.window, **lab.config.eff_kw).h_ray[0])
    second = float(strain_curve(twin, lab.m, lab.n, [c], lab.window, **lab.config.eff_kw).h_ray[0])
    return (PASS if first == second else FAIL), f"h({c}) = {first!r} on both runs"


def run_validate(config: ExperimentConfig) -> RunManifest:
    """Run the Full Invariant Suite

    Args:
        config (ExperimentConfig): Validated configuration

    Returns:
        manifest (RunManifest): One verdict per registered check
    """
    lab = Lab(config)
    manifest = RunManifest(config.config_hash())
    logger.info(f"Validating {config.field} at (m, n) = ({config.m}, {config.n}), window {lab.window}")

    for name, fn, strain in CHECKS:
        start = time.perf_counter()
        if strain and lab.trivial:
            status, detail = SKIP, lab.trivial
        else:
            try:
                status, detail = fn(lab)
            except (HypothesisError, UndefinedThresholdError) as err:
                status, detail = SKIP, str(err)
            except Exception as err:
                logger.exception(f"Check {name} raised")
                status, detail = FAIL, f"{type(err).__name__}: {err}"
        seconds = time.perf_counter() - start
        manifest.add(name, status, detail, seconds)
        logger.info(f"{status:<4} {name} ({seconds:.2f} s): {detail}")
    return manifest
