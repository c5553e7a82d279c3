"""Ensemble orchestration and estimators.

Runs trajectory ensembles over the event-driven engine and computes every
figure-level observable: moment series on log-spaced grids, power-law
exponents with bootstrap errors, lag correlations, uniformity tests,
diffusion constants, direction spreading and the 1D adiabatic-momentum
comparison.

Determinism contract: per-trajectory RNG streams are keyed by
(seed, p0-index, trajectory-index), reductions run in trajectory order, and
results are invariant under the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.stats import chi2 as _chi2

from ._kernels import STATUS_OK
from .dynamics import (ParticleState, ScattererModel, kicked_run,
                       run_hex_raw, run_line_raw)
from .errors import (ExclusionRateExceeded, InsufficientData, NonPositiveValue,
                     NotDiffusive)
from .lattice import LatticeSpec, build_lattice
from .randomwalk import ordinal_grid

TWO_PI = 2.0 * math.pi

MODES = ("pulsed2d", "elastic2d", "pulsed1d", "random_phase_1d", "kicked")
EXCLUSION_LIMIT = 0.01


@dataclass
class EnsembleConfig:
    mode: str
    n_traj: int
    p0_list: tuple
    t_max: float
    model: ScattererModel
    lattice: Optional[LatticeSpec] = None
    samples_per_decade: int = 8
    seed: int = 0
    q_star_1d: float = 1.0 / 3.0
    kick_dim: int = 1
    n_grid_cap: int = 100_000_000
    capture_window: Optional[tuple] = None
    max_events: int = 0
    n_workers: int = 1
    fit_window: Optional[tuple] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.t_max <= 1.0:
            raise ValueError("t_max must exceed 1")
        if not 4 <= self.samples_per_decade <= 32:
            raise ValueError("samples_per_decade must lie in [4, 32]")
        self.p0_list = tuple(float(p) for p in np.atleast_1d(self.p0_list))
        if self.mode in ("pulsed2d", "elastic2d") and self.lattice is None:
            self.lattice = build_lattice("hex2d", 0.45)


@dataclass
class ObservableSeries:
    """Ensemble moments on the log-spaced time grid."""

    t: np.ndarray
    mean_p2: np.ndarray
    stderr_p2: np.ndarray
    mean_q2: np.ndarray
    stderr_q2: np.ndarray
    mean_p1: np.ndarray
    stderr_p1: np.ndarray
    mean_p3: np.ndarray
    stderr_p3: np.ndarray
    n_valid: np.ndarray


@dataclass
class EventOrdinalSeries:
    """Ensemble moments indexed by collision ordinal."""

    n: np.ndarray
    mean_p2: np.ndarray
    stderr_p2: np.ndarray
    mean_q2: np.ndarray
    stderr_q2: np.ndarray
    n_valid: np.ndarray


@dataclass
class FitResult:
    exponent: float
    stderr: float
    window: tuple
    r_squared: float
    intercept: float = 0.0


@dataclass
class P0Result:
    p0: float
    series: ObservableSeries
    n_series: EventOrdinalSeries
    events: list
    per_traj_p2: np.ndarray = field(repr=False, default=None)
    per_traj_q2: np.ndarray = field(repr=False, default=None)
    per_traj_np2: np.ndarray = field(repr=False, default=None)
    per_traj_nq2: np.ndarray = field(repr=False, default=None)
    n_excluded: int = 0
    eta_star: float = math.nan
    max_ledger_err: float = 0.0
    max_energy_drift: float = 0.0


@dataclass
class EnsembleResult:
    config: EnsembleConfig
    t_grid: np.ndarray
    n_grid: np.ndarray
    per_p0: dict

    @property
    def single(self):
        (res,) = self.per_p0.values()
        return res


def time_grid(t_max, per_decade=8, t_lo=None):
    """Log-spaced sample times with an explicit t = 0 head."""
    if t_lo is None:
        t_lo = 1.0 if t_max > 10.0 else t_max / 100.0
    decades = math.log10(t_max / t_lo)
    count = max(2, int(round(per_decade * decades)) + 1)
    grid = np.logspace(math.log10(t_lo), math.log10(t_max), count)
    grid[-1] = t_max
    return np.concatenate([[0.0], grid])


def kick_grid(n_kicks, per_decade=8):
    """Integer kick counts: 0 plus a log-spaced ladder up to n_kicks."""
    return np.concatenate([[0], ordinal_grid(n_kicks, per_decade)])


def _traj_rng(seed, ip0, k):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, ip0, k, 0))))


def _traj_phase_seed(seed, ip0, k):
    return int(np.random.SeedSequence((seed, ip0, k, 1))
               .generate_state(1, np.uint64)[0])


def _initial_2d(rng, q_star, p0):
    theta = rng.uniform(0.0, TWO_PI)
    psi = rng.uniform(-0.5 * math.pi, 0.5 * math.pi)
    q = np.array([q_star * math.cos(theta), q_star * math.sin(theta)])
    ang = theta + psi
    p = np.array([p0 * math.cos(ang), p0 * math.sin(ang)])
    return q, p


def _initial_1d(rng, w, p0):
    side = int(rng.integers(0, 2))
    if side == 0:
        return 0.0, -p0
    return w, p0


def _initial_kicked(rng, dim, p0):
    q = rng.uniform(0.0, TWO_PI, dim)
    if dim == 1:
        sign = 2.0 * int(rng.integers(0, 2)) - 1.0
        return q, np.array([sign * p0])
    ang = rng.uniform(0.0, TWO_PI)
    return q, np.array([p0 * math.cos(ang), p0 * math.sin(ang)])


def _run_one(config, ip0, k, p0, t_grid, n_grid, cap):
    rng = _traj_rng(config.seed, ip0, k)
    model = config.model
    if model.phase_mode == "per_scatterer":
        model = ScattererModel(
            lam=model.lam, time_profile=model.time_profile,
            phase_mode="per_scatterer", phi0=model.phi0,
            phase_seed=_traj_phase_seed(config.seed, ip0, k))
    cap_lo, cap_hi = cap
    if config.mode in ("pulsed2d", "elastic2d"):
        q0, pvec = _initial_2d(rng, config.lattice.q_star, p0)
        return run_hex_raw(q0, pvec, 0.0, config.lattice, model,
                           config.t_max, t_grid, n_grid=n_grid,
                           cap_lo=cap_lo, cap_hi=cap_hi,
                           max_events=config.max_events)
    if config.mode in ("pulsed1d", "random_phase_1d"):
        x0, pscal = _initial_1d(rng, 2.0 * config.q_star_1d, p0)
        return run_line_raw(x0, pscal, 0.0, model, config.t_max, t_grid,
                            q_star=config.q_star_1d, n_grid=n_grid,
                            cap_lo=cap_lo, cap_hi=cap_hi,
                            max_events=config.max_events)
    raise ValueError(f"mode {config.mode} is not trajectory-driven")


def _moment_block(values, n_valid_mask):
    """(mean, stderr) over axis 0 honoring per-sample validity."""
    cnt = n_valid_mask.sum(axis=0)
    safe = np.where(cnt > 0, cnt, 1)
    vals = np.where(n_valid_mask, values, 0.0)
    mean = vals.sum(axis=0) / safe
    dev = np.where(n_valid_mask, values - mean, 0.0)
    var = (dev * dev).sum(axis=0) / np.where(cnt > 1, cnt - 1, 1)
    stderr = np.sqrt(var / safe)
    stderr[cnt < 2] = 0.0
    mean[cnt == 0] = np.nan
    return mean, stderr, cnt


def ensemble_run(config):
    """Run the configured ensemble for every p0 in p0_list.

    Initial conditions follow the boundary protocol: position uniform on the
    origin-scatterer boundary with outward direction uniform in angle (2D),
    the two support edges with outward sign (1D), position uniform on the
    torus (kicked).  Trajectories with a nonzero status are excluded from
    the moments; the run aborts if more than 1% are excluded.
    """
    if config.mode == "kicked":
        return _ensemble_kicked(config)
    t_grid = time_grid(config.t_max, config.samples_per_decade)
    n_grid = ordinal_grid(config.n_grid_cap, config.samples_per_decade)
    cap = config.capture_window or (0, 0)
    per_p0 = {}
    for ip0, p0 in enumerate(config.p0_list):
        raws = [None] * config.n_traj
        if config.n_workers > 1:
            with ThreadPoolExecutor(max_workers=config.n_workers) as pool:
                futures = {
                    pool.submit(_run_one, config, ip0, k, p0, t_grid,
                                n_grid, cap): k
                    for k in range(config.n_traj)}
                for fut, k in futures.items():
                    raws[k] = fut.result()
        else:
            for k in range(config.n_traj):
                raws[k] = _run_one(config, ip0, k, p0, t_grid, n_grid, cap)
        per_p0[p0] = _reduce_p0(config, p0, t_grid, n_grid, raws)
    return EnsembleResult(config=config, t_grid=t_grid, n_grid=n_grid,
                          per_p0=per_p0)


def _reduce_p0(config, p0, t_grid, n_grid, raws):
    n_traj = len(raws)
    statuses = np.array([r.status for r in raws])
    valid = statuses == STATUS_OK
    n_excluded = int((~valid).sum())
    if n_excluded > EXCLUSION_LIMIT * n_traj:
        raise ExclusionRateExceeded(
            f"{n_excluded}/{n_traj} trajectories flagged at p0={p0}")
    nt, nn = t_grid.shape[0], n_grid.shape[0]
    p2 = np.full((n_traj, nt), np.nan)
    q2 = np.full((n_traj, nt), np.nan)
    np2 = np.full((n_traj, nn), np.nan)
    nq2 = np.full((n_traj, nn), np.nan)
    free_sum = 0.0
    free_cnt = 0
    for k, r in enumerate(raws):
        if not valid[k]:
            continue
        p2[k] = (r.s_p * r.s_p).sum(axis=1)
        q2[k] = (r.s_q * r.s_q).sum(axis=1)
        np2[k] = r.sn_p2
        nq2[k] = r.sn_q2
        free_sum += r.free_sum
        free_cnt += r.free_cnt
    vmask_t = valid[:, None] & np.isfinite(p2)
    mean_p2, se_p2, cnt_t = _moment_block(p2, vmask_t)
    mean_q2, se_q2, _ = _moment_block(q2, valid[:, None] & np.isfinite(q2))
    p1 = np.sqrt(np.where(np.isfinite(p2), p2, np.nan))
    p3 = p1 * np.where(np.isfinite(p2), p2, np.nan)
    mean_p1, se_p1, _ = _moment_block(np.nan_to_num(p1), vmask_t)
    mean_p3, se_p3, _ = _moment_block(np.nan_to_num(p3), vmask_t)
    vmask_n = valid[:, None] & np.isfinite(np2)
    mean_np2, se_np2, cnt_n = _moment_block(np.nan_to_num(np2), vmask_n)
    mean_nq2, se_nq2, _ = _moment_block(np.nan_to_num(nq2), vmask_n)
    keep = cnt_n > 0
    series = ObservableSeries(
        t=t_grid, mean_p2=mean_p2, stderr_p2=se_p2,
        mean_q2=mean_q2, stderr_q2=se_q2,
        mean_p1=mean_p1, stderr_p1=se_p1,
        mean_p3=mean_p3, stderr_p3=se_p3, n_valid=cnt_t)
    n_series = EventOrdinalSeries(
        n=n_grid[keep], mean_p2=mean_np2[keep], stderr_p2=se_np2[keep],
        mean_q2=mean_nq2[keep], stderr_q2=se_nq2[keep], n_valid=cnt_n[keep])
    return P0Result(
        p0=p0, series=series, n_series=n_series,
        events=[r.events for r in raws],
        per_traj_p2=np.where(vmask_t, p2, np.nan),
        per_traj_q2=np.where(valid[:, None] & np.isfinite(q2), q2, np.nan),
        per_traj_np2=np.where(vmask_n, np2, np.nan),
        per_traj_nq2=np.where(vmask_n, nq2, np.nan),
        n_excluded=n_excluded,
        eta_star=(free_sum / free_cnt) if free_cnt else math.nan,
        max_ledger_err=max((r.max_ledger for r in raws), default=0.0),
        max_energy_drift=max((r.max_drift for r in raws), default=0.0))


def _ensemble_kicked(config):
    n_kicks = int(round(config.t_max))
    k_grid = kick_grid(n_kicks, config.samples_per_decade)
    t_grid = k_grid.astype(float)
    per_p0 = {}
    for ip0, p0 in enumerate(config.p0_list):
        nt = k_grid.shape[0]
        p2 = np.empty((config.n_traj, nt))
        q2 = np.empty((config.n_traj, nt))
        for k in range(config.n_traj):
            rng = _traj_rng(config.seed, ip0, k)
            q0, pvec = _initial_kicked(rng, config.kick_dim, p0)
            s_q, s_p, _ = kicked_run(q0, pvec, config.model.lam, n_kicks,
                                     k_grid)
            disp = s_q - q0[None, :]
            p2[k] = (s_p * s_p).sum(axis=1)
            q2[k] = (disp * disp).sum(axis=1)
        valid = np.ones((config.n_traj, nt), dtype=bool)
        mean_p2, se_p2, cnt = _moment_block(p2, valid)
        mean_q2, se_q2, _ = _moment_block(q2, valid)
        p1 = np.sqrt(p2)
        mean_p1, se_p1, _ = _moment_block(p1, valid)
        mean_p3, se_p3, _ = _moment_block(p1 * p2, valid)
        series = ObservableSeries(
            t=t_grid, mean_p2=mean_p2, stderr_p2=se_p2,
            mean_q2=mean_q2, stderr_q2=se_q2,
            mean_p1=mean_p1, stderr_p1=se_p1,
            mean_p3=mean_p3, stderr_p3=se_p3, n_valid=cnt)
        n_series = EventOrdinalSeries(
            n=k_grid[1:], mean_p2=mean_p2[1:], stderr_p2=se_p2[1:],
            mean_q2=mean_q2[1:], stderr_q2=se_q2[1:], n_valid=cnt[1:])
        per_p0[p0] = P0Result(
            p0=p0, series=series, n_series=n_series, events=[],
            per_traj_p2=p2, per_traj_q2=q2,
            per_traj_np2=p2[:, 1:], per_traj_nq2=q2[:, 1:])
    return EnsembleResult(config=config, t_grid=t_grid,
                          n_grid=k_grid[1:], per_p0=per_p0)


def fit_power_law(t, y, window):
    """OLS of log y on log t over the window; stderr from residuals."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    mask = (t >= lo) & (t <= hi) & (t > 0.0) & np.isfinite(y)
    if mask.sum() < 8:
        raise InsufficientData(
            f"only {int(mask.sum())} points in window [{lo}, {hi}]")
    yy = y[mask]
    if np.any(yy <= 0.0):
        raise NonPositiveValue("log-log fit needs positive values")
    x = np.log(t[mask])
    z = np.log(yy)
    n = x.shape[0]
    xbar = x.mean()
    zbar = z.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (z - zbar)).sum()) / sxx
    intercept = zbar - slope * xbar
    resid = z - (intercept + slope * x)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((z - zbar) ** 2).sum())
    stderr = math.sqrt(ss_res / max(n - 2, 1) / sxx)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return FitResult(exponent=slope, stderr=stderr, window=(lo, hi),
                     r_squared=r2, intercept=intercept)


def fit_series_exponent(per_traj, t, window, n_boot=200, seed=0):
    """Exponent of the ensemble-mean series with trajectory-bootstrap stderr.

    Time samples of one trajectory are cross-correlated, so the OLS residual
    stderr understates the error; resampling whole trajectories does not.
    """
    per_traj = np.asarray(per_traj, dtype=float)
    n_traj = per_traj.shape[0]
    t = np.asarray(t, dtype=float)
    lo, hi = window
    cols = (t >= lo) & (t <= hi) & (t > 0.0)
    t_w = t[cols]
    vals = per_traj[:, cols]
    mean = np.nanmean(vals, axis=0)
    base = fit_power_law(t_w, mean, window)
    if n_boot > 0 and n_traj > 1:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((seed, 0xB007))))
        exps = np.empty(n_boot)
        for i in range(n_boot):
            idx = rng.integers(0, n_traj, n_traj)
            m = np.nanmean(vals[idx], axis=0)
            exps[i] = fit_power_law(t_w, m, window).exponent
        stderr = float(exps.std(ddof=1))
    else:
        stderr = base.stderr
    return FitResult(exponent=base.exponent, stderr=stderr,
                     window=base.window, r_squared=base.r_squared,
                     intercept=base.intercept)


def complete_n_series(n_series):
    """Restrict an ordinal series to bins every surviving trajectory reached.

    Trajectories stop at different event counts for a shared t_max, so late
    bins keep only the faster particles and bias the moments upward; fits
    must use complete bins only.
    """
    full = n_series.n_valid == n_series.n_valid.max()
    return EventOrdinalSeries(
        n=n_series.n[full], mean_p2=n_series.mean_p2[full],
        stderr_p2=n_series.stderr_p2[full], mean_q2=n_series.mean_q2[full],
        stderr_q2=n_series.stderr_q2[full], n_valid=n_series.n_valid[full])


class CorrelationResult(NamedTuple):
    value: float
    stderr: float
    n_pairs: int


def correlation(sequence, k, n_boot=200, seed=0):
    """Lag-k covariance <x_n x_{n+k}> - <x_n><x_{n+k}>.

    1D input: time average over the sequence, pair-counting stderr.
    2D input (n_traj, L): ensemble covariance at fixed ordinal averaged over
    the window, with a trajectory bootstrap stderr.
    """
    x = np.asarray(sequence, dtype=float)
    k = int(k)
    if x.ndim == 1:
        if x.shape[0] <= k + 100:
            raise InsufficientData("sequence too short for this lag")
        a, b = x[:x.shape[0] - k], x[k:]
        prod = a * b
        val = float(prod.mean() - a.mean() * b.mean())
        stderr = float(prod.std(ddof=1) / math.sqrt(prod.shape[0]))
        return CorrelationResult(val, stderr, prod.shape[0])
    n_traj, L = x.shape
    if L <= k:
        raise InsufficientData("window too short for this lag")

    def estimate(rows):
        a = rows[:, :L - k]
        b = rows[:, k:]
        cov_n = (a * b).mean(axis=0) - a.mean(axis=0) * b.mean(axis=0)
        return float(cov_n.mean())

    val = estimate(x)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, 0xC0221))))
    boots = np.empty(n_boot)
    for i in range(n_boot):
        boots[i] = estimate(x[rng.integers(0, n_traj, n_traj)])
    return CorrelationResult(val, float(boots.std(ddof=1)),
                             n_traj * (L - k))


class UniformityResult(NamedTuple):
    chi2: float
    p_value: float
    n_bins: int


def uniformity_test(samples, n_bins, value_range):
    """Chi-square test of the samples against the uniform null."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n < 20 * n_bins:
        raise InsufficientData(
            f"need >= 20 expected per bin: {n} samples, {n_bins} bins")
    counts, _edges = np.histogram(samples, bins=n_bins, range=value_range)
    expected = n / n_bins
    stat = float(((counts - expected) ** 2 / expected).sum())
    pval = float(_chi2.sf(stat, n_bins - 1))
    return UniformityResult(stat, pval, n_bins)


class DiffusionResult(NamedTuple):
    value: float
    stderr: float
    fit: FitResult


def diffusion_constant(series, window):
    """D = mean of <|q|^2>/t over a window certified diffusive first."""
    fit = fit_power_law(series.t, series.mean_q2, window)
    if abs(fit.exponent - 1.0) > 0.1:
        raise NotDiffusive(
            f"window exponent {fit.exponent:.3f} outside 1 +- 0.1")
    lo, hi = window
    mask = (series.t >= lo) & (series.t <= hi) & (series.t > 0.0)
    ratio = series.mean_q2[mask] / series.t[mask]
    return DiffusionResult(float(ratio.mean()),
                           float(ratio.std(ddof=1) / math.sqrt(mask.sum())),
                           fit)


def direction_spread(direction_logs, m_list):
    """<|e_{n+m} - e_n|> per offset m from per-trajectory direction logs.

    Each log covers consecutive ordinals starting at the base n, row 0 being
    e_n itself.  Logs too short for max(m) are dropped; raises
    InsufficientData when none survive.
    """
    m_list = [int(m) for m in m_list]
    need = max(m_list) + 1
    usable = [e for e in direction_logs if e.shape[0] >= need]
    if not usable:
        raise InsufficientData("no direction log covers the largest offset")
    out = np.empty(len(m_list))
    for i, m in enumerate(m_list):
        acc = 0.0
        for e in usable:
            d = e[m] - e[0]
            acc += math.sqrt(float(d @ d))
        out[i] = acc / len(usable)
    return out


class PApResult(NamedTuple):
    max_dev: float
    dev: np.ndarray
    p_ap: np.ndarray


def p_ap_compare(t, p_series, q0, p0, lam, q_star=1.0 / 3.0,
                 time_profile="cos"):
    """Deviation of p(t) from the adiabatic approximant p_ap(t).

    p_ap(t) = p0 - lam*(V(q0 + p0 t, t) - V(q0, 0))/p0 with V the zero-
    spatial-mean potential f(t)*(chi_[0,w](q) - w); subtracting the spatial
    mean leaves the dynamics unchanged but is required in the formula.
    """
    t = np.asarray(t, dtype=float)
    p_series = np.asarray(p_series, dtype=float)
    w = 2.0 * q_star

    def vtilde(q, tt):
        frac = q - np.floor(q)
        chi = (frac < w).astype(float) - w
        if time_profile == "cos":
            return np.cos(tt) * chi
        if time_profile == "constant":
            return chi
        if time_profile == "quasiperiodic":
            return (np.cos(tt) + np.cos(math.sqrt(2.0) * tt)) * chi
        return 0.0 * chi

    p_ap = p0 - lam * (vtilde(q0 + p0 * t, t)
                       - float(vtilde(np.array([q0]), 0.0)[0])) / p0
    dev = np.abs(p_series - p_ap)
    return PApResult(float(dev.max()), dev, p_ap)


def measure_eta_star(lattice, model, p0=1.0, seed=0, n_traj=8,
                     max_events=2000, t_max=1e9):
    """Mean free path between exits and next entries, from short runs."""
    t_grid = np.array([0.0])
    total = 0.0
    count = 0
    for k in range(n_traj):
        rng = _traj_rng(seed, 0, k)
        q0, pvec = _initial_2d(rng, lattice.q_star, p0)
        raw = run_hex_raw(q0, pvec, 0.0, lattice, model, t_max, t_grid,
                          max_events=max_events)
        total += raw.free_sum
        count += raw.free_cnt
    if count == 0:
        raise InsufficientData("no free flights recorded")
    return total / count
