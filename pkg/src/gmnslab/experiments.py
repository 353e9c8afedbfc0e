"""Scripted numerical experiments reproducing the model's quantitative claims.

Desk-scale reproductions of the provable structure of the cutoff-modified
system: property fuzzing of the cutoff lemma, the trilinear identities and
the monotonicity gap; exponential contraction of coupled solutions above the
viscosity threshold; pullback absorption; the large-cutoff limit toward the
unmodified truncated Navier-Stokes dynamics; and invariant-measure sampling
with a mixing proxy.  Every experiment is deterministic in (seed, options)
and reports pass/fail per assertion plus plot-ready series.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import cutoff as co
from . import integrate as it
from . import noise as nz
from . import spectral as sp
from .seeding import derive_key, labeled_generator


# ---- closed-form constants -------------------------------------------------


def stability_threshold(level: float, lambda_p: float) -> float:
    """Viscosity above which the contraction rate is positive:
    (7*level/2) * (1/(112*lambda))^(1/8)."""
    if level <= 0 or lambda_p <= 0:
        raise ValueError("need level > 0 and lambda_p > 0")
    return 3.5 * level * (1.0 / (112.0 * lambda_p)) ** 0.125


def contraction_rate(nu: float, level: float, lambda_p: float) -> float:
    """nu*lambda - 7^7 * level^8 / (2^12 * nu^7); positive above threshold."""
    return nu * lambda_p - 7.0**7 * level**8 / (2.0**12 * nu**7)


# ---- property-check suites --------------------------------------------------


@dataclass
class CheckReport:
    name: str
    cases: int
    violations: int
    worst_margin: float
    passed: bool
    rows: list = field(default_factory=list, repr=False)
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "passed": self.passed,
            **self.extra,
        }


def check_cutoff_lemma(
    kmax: int = 2, n_pairs: int = 10_000, seed: int = 0,
    level: float = 1.0, tol: float = 1e-14,
) -> CheckReport:
    """Fuzz the two cutoff-lemma inequalities over stratified field pairs.

    Pairs are rescaled so the four branch combinations (each L4 norm below
    or above the cutoff level) are all exercised; the product bound must
    hold exactly and the Lipschitz bound up to tol.
    """
    basis = sp.build_basis(kmax)
    rng = labeled_generator(seed, "cutoff-lemma")
    rows = []
    violations = 0
    worst = math.inf
    for case in range(n_pairs):
        u = sp.random_field(basis, rng)
        v = sp.random_field(basis, rng)
        lo_u = level * rng.uniform(0.05, 0.95)
        hi_u = level * rng.uniform(1.05, 8.0)
        lo_v = level * rng.uniform(0.05, 0.95)
        hi_v = level * rng.uniform(1.05, 8.0)
        target_u = (lo_u, hi_u, lo_u, hi_u)[case % 4]
        target_v = (lo_v, hi_v, hi_v, lo_v)[case % 4]
        u = u * (target_u / sp.norm_L4(u))
        v = v * (target_v / sp.norm_L4(v))
        ru = sp.norm_L4(u)
        prod = ru * co.cutoff_factor(ru, level)
        if not 0.0 <= prod <= level:
            violations += 1
        lhs, rhs = co.cutoff_lipschitz_sides(u, v, level)
        margin = rhs + tol - lhs
        worst = min(worst, margin, level - prod)
        if lhs > rhs + tol:
            violations += 1
        if case < 512 or lhs > rhs + tol:
            rows.append((case, seed, lhs, rhs, margin))
    return CheckReport("cutoff_lemma", n_pairs, violations, worst, violations == 0, rows)


def check_trilinear(
    kmax: int = 2, n_triples: int = 1000, seed: int = 1, tol: float = 1e-12
) -> CheckReport:
    """Skew symmetry b(u,v,v) = 0 and antisymmetry in the last two slots."""
    basis = sp.build_basis(kmax)
    rng = labeled_generator(seed, "trilinear")
    rows, violations = [], 0
    worst = math.inf
    for case in range(n_triples):
        u = sp.random_field(basis, rng, norm=rng.uniform(0.5, 2.0))
        v = sp.random_field(basis, rng, norm=rng.uniform(0.5, 2.0))
        w = sp.random_field(basis, rng, norm=rng.uniform(0.5, 2.0))
        skew = abs(sp.trilinear_b(u, v, v))
        skew_cap = tol * sp.norm_V(u) * sp.norm_V(v) ** 2
        anti = abs(sp.trilinear_b(u, v, w) + sp.trilinear_b(u, w, v))
        anti_cap = tol * sp.norm_V(u) * sp.norm_V(v) * sp.norm_V(w)
        margin = min(skew_cap - skew, anti_cap - anti)
        worst = min(worst, margin)
        if margin < 0:
            violations += 1
        if case < 512 or margin < 0:
            rows.append((case, seed, skew, skew_cap, margin))
    return CheckReport("trilinear_identities", n_triples, violations, worst,
                       violations == 0, rows)


def check_monotonicity(
    kmax: int = 2, n_triples: int = 1000, seed: int = 2,
    nus: tuple = (0.5, 1.0, 2.0), levels: tuple = (0.5, 1.0, 2.0),
) -> CheckReport:
    """Monotonicity gap >= -tolerance over a (nu, level) parameter grid."""
    basis = sp.build_basis(kmax)
    rows, violations, cases = [], 0, 0
    worst = math.inf
    for nu in nus:
        for level in levels:
            params = co.CutoffParams(level, nu)
            rng = labeled_generator(seed, f"monotonicity-{nu}-{level}")
            for case in range(n_triples):
                v1 = sp.random_field(basis, rng, norm=rng.uniform(0.2, 3.0))
                v2 = sp.random_field(basis, rng, norm=rng.uniform(0.2, 3.0))
                z = sp.random_field(basis, rng, norm=rng.uniform(0.0, 2.0))
                gap = co.monotonicity_gap(v1, v2, z, params)
                tol = co.gap_tolerance(v1, v2)
                worst = min(worst, gap + tol)
                cases += 1
                if gap < -tol:
                    violations += 1
                if case < 64 or gap < -tol:
                    rows.append((cases, seed, gap, -tol, gap + tol))
    return CheckReport("monotonicity_gap", cases, violations, worst,
                       violations == 0, rows)


def check_ou_stationarity(
    seed: int = 3, n_samples: int = 100_000, nu: float = 1.0, chi: float = 1.0,
    mc_fields: int = 10_000, chis: tuple = (0.0, 1.0, 10.0, 100.0),
) -> CheckReport:
    """Exact-transition stationarity: per-mode variance against
    sigma^2/(2*mu) over a long single-coordinate run, Monte Carlo
    E|z|_H^2 against the closed-form mode sum, and monotonicity in chi."""
    basis = sp.build_basis(1)
    spectrum = nz.NoiseSpectrum()
    # decorrelated sampling: one exact transition per sample at lag 2.5/mu
    mu = nu * 1.0 + chi
    lag = 2.5 / mu
    path = nz.make_path(seed, lag, 0.0, (n_samples + 1) * lag, spectrum, basis)
    alpha = 0  # first coordinate of the first half-space mode (0,0,1), |k|^2 = 1
    draws = path.normals_row(alpha, 0, n_samples)
    a = math.exp(-mu * lag)
    gain = math.sqrt((1.0 - a * a) / (2.0 * mu))
    series = np.empty(n_samples)
    zval = 0.0
    for i in range(n_samples):
        zval = a * zval + gain * draws[i]
        series[i] = zval
    var_emp = float(series.var())
    var_true = 1.0 / (2.0 * mu)
    rho = a
    # variance-estimator stderr for a Gaussian AR(1) sequence
    se = var_true * math.sqrt(2.0 * (1.0 + rho * rho) / (1.0 - rho * rho) / n_samples)
    ok_var = abs(var_emp - var_true) <= 5.0 * se

    rng = labeled_generator(seed, "ou-mc")
    h2 = np.empty(mc_fields)
    for i in range(mc_fields):
        h2[i] = sp.norm_H(nz.ou_stationary_sample(spectrum, chi, nu, basis, rng)) ** 2
    analytic = nz.stationary_mean_H2(spectrum, chi, nu, basis)
    se_mc = float(h2.std(ddof=1) / math.sqrt(mc_fields))
    ok_mc = abs(float(h2.mean()) - analytic) <= 5.0 * se_mc

    sums = [nz.stationary_mean_H2(spectrum, c, nu, basis) for c in chis]
    ok_mono = all(sums[i] > sums[i + 1] for i in range(len(sums) - 1))
    # the monotone decay must also show up in sampled energies, not just in
    # the closed form
    mc_rng = labeled_generator(seed, "ou-mc-chi")
    n_mono = max(500, mc_fields // 5)
    mc_sums = []
    for c in chis:
        vals = np.fromiter(
            (sp.norm_H(nz.ou_stationary_sample(spectrum, c, nu, basis, mc_rng)) ** 2
             for _ in range(n_mono)),
            dtype=float, count=n_mono,
        )
        mc_sums.append(float(vals.mean()))
    ok_mono_mc = all(mc_sums[i] > mc_sums[i + 1] for i in range(len(mc_sums) - 1))

    violations = (int(not ok_var) + int(not ok_mc) + int(not ok_mono)
                  + int(not ok_mono_mc))
    extra = {
        "var_empirical": var_emp, "var_analytic": var_true, "var_se": se,
        "h2_mc": float(h2.mean()), "h2_analytic": analytic, "h2_se": se_mc,
        "chi_sums": sums, "chi_sums_mc": mc_sums,
    }
    worst = min(5 * se - abs(var_emp - var_true), 5 * se_mc - abs(float(h2.mean()) - analytic))
    return CheckReport("ou_stationarity", n_samples + mc_fields, violations,
                       worst, violations == 0, extra=extra)


def check_shift_covariance(
    seed: int = 4, n_pairs: int = 100, kmax: int = 1,
    nu: float = 1.0, chi: float = 0.5, tol: float = 1e-12,
) -> CheckReport:
    """z(shifted path)(t) == z(path)(t+s) for random grid pairs (s, t)."""
    basis = sp.build_basis(kmax)
    spectrum = nz.NoiseSpectrum()
    dt = 1.0 / 64
    path = nz.make_path(seed, dt, 0.0, 8.0, spectrum, basis)
    rng = labeled_generator(seed, "shift-pairs")
    rows, violations = [], 0
    worst = math.inf
    for case in range(n_pairs):
        m_s = int(rng.integers(0, 256))
        m_t = int(rng.integers(0, 256))
        s = m_s * dt
        t = m_t * dt
        lhs, rhs = nz.ou_shift_covariance_pair(path, s, t, chi, nu)
        diff = float(np.abs(lhs.coeffs - rhs.coeffs).max())
        worst = min(worst, tol - diff)
        if diff > tol:
            violations += 1
        rows.append((case, seed, diff, tol, tol - diff))
    return CheckReport("shift_covariance", n_pairs, violations, worst,
                       violations == 0, rows)


# ---- exponential contraction ------------------------------------------------


@dataclass
class ContractionReport:
    ensemble: int
    times: np.ndarray
    mean_sq: np.ndarray
    stderr: np.ndarray
    envelope: np.ndarray
    rate: float
    fitted_slope: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "name": "contraction",
            "ensemble": self.ensemble,
            "rate_theoretical": self.rate,
            "fitted_slope": self.fitted_slope,
            "passed": self.passed,
            **self.extra,
        }


def _member_diff_sq(args):
    (x1, x2, params, basis, member_seed, record_every) = args
    spectrum = params.noise
    path = nz.make_path(member_seed, params.dt_path, 0.0, params.t_final,
                        spectrum, basis)
    trajs = []
    for x in (x1, x2):
        cursor = nz.OUCursor(path, params.chi, params.nu)
        z0 = cursor.advance_to(0.0)
        v0 = sp.SpectralField(basis, x.coeffs - z0)
        trajs.append(it.solve_transformed(v0, path, params,
                                          record_every=record_every))
    # u1 - u2 = v1 - v2: the z layer cancels for a shared path
    diff = trajs[0].v_coeffs - trajs[1].v_coeffs
    return (diff.real**2 + diff.imag**2).sum(axis=(1, 2)), trajs[0].record_times


def contraction_experiment(
    params: it.SimParams,
    x1: sp.SpectralField,
    x2: sp.SpectralField,
    ensemble: int = 64,
    seed: int = 0,
    record_every: int = 4,
    threads: int = 1,
    enforce_threshold: bool = True,
) -> ContractionReport:
    """Coupled two-solution decay along shared paths, against the envelope
    |x1 - x2|_H^2 * exp(-rate * t) with rate = nu*lambda - 7^7 N^8/(2^12 nu^7).

    The ensemble mean must stay below envelope + 3 stderr at every recorded
    time and the fitted log-slope over the second half of the horizon must
    be at least as negative as the theoretical rate (up to fit error).
    """
    thr = stability_threshold(params.level, params.lambda_p)
    if enforce_threshold and params.nu <= thr:
        raise ValueError(
            f"nu={params.nu} is not above the stability threshold {thr:.6g}; "
            "run in exploratory mode to bypass the assertion variant"
        )
    basis = x1.basis
    rate = contraction_rate(params.nu, params.level, params.lambda_p)
    jobs = [
        (x1, x2, params, basis, derive_key(seed, f"member-{m}"), record_every)
        for m in range(ensemble)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_member_diff_sq, jobs))
    else:
        results = [_member_diff_sq(j) for j in jobs]
    sq = np.stack([r[0] for r in results])
    times = results[0][1]
    mean_sq = sq.mean(axis=0)
    stderr = sq.std(axis=0, ddof=1) / math.sqrt(ensemble)
    envelope = sp.norm_H(x1 - x2) ** 2 * np.exp(-rate * times)
    # 1e-12 relative allowance: at t = 0 the coupled difference equals the
    # envelope exactly up to the rounding of the layer subtraction
    below = bool(np.all(mean_sq <= envelope * (1.0 + 1e-12) + 3.0 * stderr))

    # decay slope from the second half of the horizon
    half = times >= 0.5 * times[-1]
    logm = np.log(np.maximum(mean_sq[half], 1e-300))
    slope, intercept = np.polyfit(times[half], logm, 1)
    fit_res = logm - (slope * times[half] + intercept)
    t_c = times[half] - times[half].mean()
    slope_se = float(np.sqrt((fit_res**2).sum() / max(1, len(logm) - 2) / (t_c**2).sum()))
    slope_ok = bool(slope <= -rate + max(3.0 * slope_se, 0.05 * abs(rate)))
    passed = below and slope_ok
    return ContractionReport(
        ensemble, times, mean_sq, stderr, envelope, rate, float(slope), passed,
        extra={"threshold": thr, "below_envelope": below,
               "slope_ok": bool(slope_ok), "slope_se": slope_se},
    )


# ---- pullback absorption -----------------------------------------------------


@dataclass
class PullbackReport:
    pullback_times: list
    radii: dict
    ic_terms: dict
    absorbing_bound: float
    family_gap: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "name": "pullback_absorption",
            "pullback_times": list(self.pullback_times),
            "radii": {k: list(v) for k, v in self.radii.items()},
            "absorbing_bound": self.absorbing_bound,
            "family_gap": self.family_gap,
            "passed": self.passed,
            **self.extra,
        }


def pullback_absorption(
    params: it.SimParams,
    pullback_times: list[float],
    x_family: dict[str, sp.SpectralField],
    seed: int = 0,
    family_tol: float = 1e-6,
) -> PullbackReport:
    """Solve from -t_m to 0 on one two-sided path and record |u(0)|_H.

    The initial-data contribution decays like e^{-nu*lam*t_m}, so for large
    t_m different initial families land on the same path-dependent radius;
    the measured radii are also checked against the absorbing bound built
    from the explicit-constant energy inequality.
    """
    tms = sorted(pullback_times)
    basis = next(iter(x_family.values())).basis
    t_far = max(tms)
    n_steps_far = int(round(t_far / params.dt))
    if abs(n_steps_far * params.dt - t_far) > 1e-9:
        raise ValueError("pullback times must be multiples of dt")
    path = nz.make_path(seed, params.dt_path, -t_far, params.dt, params.noise, basis)
    rate = params.nu * params.lambda_p

    radii = {name: [] for name in x_family}
    margins = []
    for tm in tms:
        for name, x in x_family.items():
            cursor = nz.OUCursor(path, params.chi, params.nu)
            z_start = cursor.advance_to(-tm)
            v0 = sp.SpectralField(basis, x.coeffs - z_start)
            traj = it.solve_transformed(v0, path, params, t0=-tm, t_final=tm,
                                        record_every=1 << 30)
            u0 = traj.u_field(traj.n_records - 1)
            radii[name].append(sp.norm_H(u0))
            margins.append(it.pullback_inequality_margin(params, traj.ledger))

    # absorbing bound kappa11 + kappa12 from the discrete analogues of the
    # radius functionals on the far window
    cursor = nz.OUCursor(path, params.chi, params.nu)
    z_h2, z_l4 = [], []
    grid = np.arange(-n_steps_far, 1) * params.dt
    for t in grid:
        zc = cursor.advance_to(float(t))
        zf = sp.SpectralField(basis, zc)
        z_h2.append(sp.norm_H(zf) ** 2)
        z_l4.append(sp.norm_L4(zf) ** 2)
    z_h2 = np.array(z_h2)
    z_l4 = np.array(z_l4)
    w = np.exp(rate * grid)
    nu, lam, chi = params.nu, params.lambda_p, params.chi
    dens = (
        (2.0 / nu) * params.level**2 * z_l4
        + (4.0 * chi**2 / (nu * lam)) * z_h2
        + (4.0 / nu) * params.forcing_dual_norm() ** 2
    )
    kappa11_sq = 2.0 + 2.0 * float((z_h2 * w).max()) + float(
        np.trapezoid(dens * w, grid)
    )
    kappa12 = math.sqrt(z_h2[-1])
    bound = math.sqrt(kappa11_sq) + kappa12

    names = list(x_family)
    final = {n: radii[n][-1] for n in names}
    gap = max(abs(final[a] - final[b]) for a in names for b in names)
    within_bound = all(r[-1] <= bound for r in radii.values())
    geo = all(
        2 * sp.norm_H(x_family[n]) ** 2 * math.exp(-rate * tms[i + 1])
        < 2 * sp.norm_H(x_family[n]) ** 2 * math.exp(-rate * tms[i]) + 1e-30
        for n in names
        for i in range(len(tms) - 1)
    )
    passed = gap <= family_tol and within_bound and geo
    return PullbackReport(
        tms, radii,
        {n: [2 * sp.norm_H(x_family[n]) ** 2 * math.exp(-rate * tm) for tm in tms]
         for n in names},
        bound, gap, passed,
        extra={"within_bound": within_bound,
               "max_energy_margin": max(margins), "ic_decay_geometric": geo},
    )


# ---- large-cutoff limit ------------------------------------------------------


@dataclass
class NseLimitReport:
    levels: list
    i_n: list
    i_n_bound: list
    int_one_minus_f: list
    l2_err: list
    k_t: float
    l4_scale: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "name": "nse_limit",
            "levels": list(self.levels),
            "i_n": list(self.i_n),
            "i_n_bound": list(self.i_n_bound),
            "int_one_minus_f": list(self.int_one_minus_f),
            "l2_err": list(self.l2_err),
            "k_t": self.k_t,
            "l4_scale": self.l4_scale,
            "passed": self.passed,
            **self.extra,
        }


def solve_nse(x: sp.SpectralField, params: it.SimParams) -> it.Trajectory:
    """Unmodified truncated Navier-Stokes run: cutoff disabled, noise off."""
    p = replace(params, level=math.inf, chi=0.0,
                noise=replace(params.noise, amplitude=0.0))
    basis = x.basis
    path = nz.make_path(0, p.dt_path, 0.0, p.t_final, p.noise, basis)
    return it.solve_transformed(x, path, p, record_every=1)


def nse_limit_experiment(
    x: sp.SpectralField,
    params: it.SimParams,
    multipliers: tuple = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0),
) -> NseLimitReport:
    """Deterministic cutoff sweep: as the level grows the modified runs merge
    with the unmodified one; the active-set measure obeys its a priori bound.

    i_n is the grid measure of {t: |u(t)|_L4 >= level}; its bound is
    (K_T / level^2)^(4/3) with K_T = max(1, 1/nu) (|x|_H^2 + T |f|_dual^2/nu)
    from the discrete a priori estimate.
    """
    star = solve_nse(x, params)
    l4_scale = float(star.ledger.u_L4.max())
    levels = [m * l4_scale for m in multipliers]
    T = params.t_final
    k_t = max(1.0, 1.0 / params.nu) * (
        sp.norm_H(x) ** 2 + T * params.forcing_dual_norm() ** 2 / params.nu
    )

    i_ns, bounds, ints, ints_p, errs = [], [], [], [], []
    for level in levels:
        p = replace(params, level=level, chi=0.0,
                    noise=replace(params.noise, amplitude=0.0))
        path = nz.make_path(0, p.dt_path, 0.0, p.t_final, p.noise, x.basis)
        traj = it.solve_transformed(x, path, p, record_every=1)
        led = traj.ledger
        i_n = params.dt * float((led.u_L4 >= level).sum())
        i_ns.append(i_n)
        bounds.append((k_t / level**2) ** (4.0 / 3.0))
        one_minus_f = 1.0 - led.cutoff
        ints.append(float(np.trapezoid(one_minus_f, led.t)))
        ints_p.append(float(np.trapezoid(one_minus_f ** 2, led.t)))
        diff = traj.v_coeffs - star.v_coeffs
        h2 = (diff.real**2 + diff.imag**2).sum(axis=(1, 2))
        errs.append(math.sqrt(float(np.trapezoid(h2, traj.record_times))))

    bound_ok = all(i <= b for i, b in zip(i_ns, bounds))
    ints_mono = all(ints[i] >= ints[i + 1] - 1e-12 for i in range(len(ints) - 1))
    errs_mono = all(errs[i] >= errs[i + 1] - 1e-12 for i in range(len(errs) - 1))
    exact_zero = errs[-1] == 0.0
    # higher powers of |1 - F| are dominated since 0 <= 1 - F <= 1
    powers_ok = all(p <= v + 1e-15 for p, v in zip(ints_p, ints))
    passed = bound_ok and ints_mono and errs_mono and exact_zero and powers_ok
    return NseLimitReport(
        levels, i_ns, bounds, ints, errs, k_t, l4_scale, passed,
        extra={"bound_ok": bound_ok, "ints_monotone": ints_mono,
               "errs_monotone": errs_mono, "largest_level_exact": exact_zero,
               "int_one_minus_f_sq": ints_p, "powers_dominated": powers_ok},
    )


# ---- invariant-measure sampling ----------------------------------------------


class HorizonError(RuntimeError):
    """Raised when the mixing estimate deems the horizon insufficient."""


@dataclass
class MeasureReport:
    observables: list
    burn_in: float
    horizon: float
    averages: dict
    stderrs: dict
    autocorr_times: dict
    passed: bool
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "name": "invariant_measure",
            "observables": list(self.observables),
            "burn_in": self.burn_in,
            "horizon": self.horizon,
            "averages": self.averages,
            "stderrs": self.stderrs,
            "autocorr_times": self.autocorr_times,
            "passed": self.passed,
            **self.extra,
        }


def _integrated_autocorr(series: np.ndarray, dt: float) -> float:
    x = series - series.mean()
    n = len(x)
    v = float((x * x).mean())
    if v == 0.0:
        return 0.0
    tau = 0.5
    for lag in range(1, min(n - 1, 2000)):
        rho = float((x[:-lag] * x[lag:]).mean()) / v
        if rho <= 0.0:
            break
        tau += rho
    return 2.0 * tau * dt


def invariant_measure_sampler(
    params: it.SimParams,
    initial_set: dict[str, sp.SpectralField],
    burn_in: float,
    horizon: float,
    seed: int = 0,
    n_batches: int = 20,
    enforce_threshold: bool = True,
    sigma_band: float = 3.0,
) -> MeasureReport:
    """Long-run time averages of |u|_H^2, |u|_V^2, |u|_L4 per initial state.

    Each initial state runs on an independent path; agreement of the time
    averages within combined batch-means standard errors is the mixing /
    unique-ergodicity proxy.  Raises HorizonError when the estimated
    integrated autocorrelation time exceeds horizon/20.
    """
    thr = stability_threshold(params.level, params.lambda_p)
    if enforce_threshold and params.nu <= thr:
        raise ValueError(
            f"nu={params.nu} must exceed the stability threshold {thr:.6g} "
            "for the uniqueness-assertion variant"
        )
    observables = ["u_H2", "u_V2", "u_L4"]
    averages = {k: {} for k in observables}
    stderrs = {k: {} for k in observables}
    taus = {}
    for idx, (name, x) in enumerate(initial_set.items()):
        member_seed = derive_key(seed, f"measure-{idx}")
        p = replace(params, t_final=burn_in + horizon)
        path = nz.make_path(member_seed, p.dt_path, 0.0, p.t_final, p.noise, x.basis)
        cursor = nz.OUCursor(path, p.chi, p.nu)
        v0 = sp.SpectralField(x.basis, x.coeffs - cursor.advance_to(0.0))
        traj = it.solve_transformed(v0, path, p, record_every=1 << 30)
        led = traj.ledger
        keep = led.t >= burn_in - 1e-12
        series = {
            "u_H2": led.u_H2[keep],
            "u_V2": led.u_V2[keep],
            "u_L4": led.u_L4[keep],
        }
        taus[name] = _integrated_autocorr(series["u_H2"], params.dt)
        if taus[name] > horizon / 20.0:
            raise HorizonError(
                f"autocorrelation time {taus[name]:.3g} exceeds horizon/20 "
                f"for initial state '{name}'"
            )
        for key, vals in series.items():
            averages[key][name] = float(vals.mean())
            batches = np.array_split(vals, n_batches)
            bmeans = np.array([b.mean() for b in batches])
            stderrs[key][name] = float(bmeans.std(ddof=1) / math.sqrt(n_batches))

    names = list(initial_set)
    ok = True
    for key in observables:
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                gap = abs(averages[key][a] - averages[key][b])
                comb = math.hypot(stderrs[key][a], stderrs[key][b])
                if gap > sigma_band * comb:
                    ok = False
    return MeasureReport(
        observables, burn_in, horizon, averages, stderrs, taus, ok,
        extra={"threshold": thr, "sigma_band": sigma_band},
    )


def ergodicity_check(
    params: it.SimParams,
    x: sp.SpectralField,
    burn_in: float,
    horizon: float,
    n_members: int = 16,
    seed: int = 0,
    sigma_band: float = 3.0,
) -> dict:
    """Time average along one long path against an ensemble average over
    independent paths, for the mean-square velocity observable.

    The two estimates target the same stationary expectation; agreement
    within combined standard errors is the ergodicity proxy.
    """
    basis = x.basis
    long_p = replace(params, t_final=burn_in + horizon)
    long_path = nz.make_path(derive_key(seed, "ergodic-long"), long_p.dt_path,
                             0.0, long_p.t_final, long_p.noise, basis)
    cursor = nz.OUCursor(long_path, long_p.chi, long_p.nu)
    v0 = sp.SpectralField(basis, x.coeffs - cursor.advance_to(0.0))
    traj = it.solve_transformed(v0, long_path, long_p, record_every=1 << 30)
    keep = traj.ledger.t >= burn_in - 1e-12
    series = traj.ledger.u_H2[keep]
    time_avg = float(series.mean())
    batches = np.array_split(series, 16)
    time_se = float(np.array([b.mean() for b in batches]).std(ddof=1) / 4.0)

    short_p = replace(params, t_final=burn_in)
    values = []
    for m in range(n_members):
        path = nz.make_path(derive_key(seed, f"ergodic-{m}"), short_p.dt_path,
                            0.0, short_p.t_final, short_p.noise, basis)
        cur = nz.OUCursor(path, short_p.chi, short_p.nu)
        v0m = sp.SpectralField(basis, x.coeffs - cur.advance_to(0.0))
        tm = it.solve_transformed(v0m, path, short_p, record_every=1 << 30)
        values.append(float(tm.ledger.u_H2[-1]))
    ens_avg = float(np.mean(values))
    ens_se = float(np.std(values, ddof=1) / math.sqrt(n_members))
    gap = abs(time_avg - ens_avg)
    comb = math.hypot(time_se, ens_se)
    return {
        "time_average": time_avg,
        "time_se": time_se,
        "ensemble_average": ens_avg,
        "ensemble_se": ens_se,
        "gap": gap,
        "passed": bool(gap <= sigma_band * comb),
    }
