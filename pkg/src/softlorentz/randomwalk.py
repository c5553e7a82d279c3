"""Surrogate Markov chain for the scattering dynamics.

One chain step applies a single-scatterer transfer with i.i.d. impact
parameter and phase draws, then advances the clock by eta_star/|p'| and the
position by eta_star along the new direction.  The chain reproduces the
ensemble scaling laws of the full dynamics without any lattice geometry;
phases here are random by construction, whereas the deterministic dynamics
has to randomize them on its own.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import STATUS_DEGENERATE, STATUS_OK, active as _kern
from .dynamics import ScattererModel
from .errors import DegenerateMomentum
from .scattering import SmoothProfile

P_FLOOR = 1e-9
_EMPTY = np.empty(0)


@dataclass
class WalkState:
    p: np.ndarray
    q: np.ndarray
    t: float = 0.0
    n: int = 0

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)


@dataclass
class KernelChoice:
    """Transfer kernel and mean free path of the chain.

    variant: 'exact_step' (step-model visit), 'perturbative_smooth'
    (leading-order kernels on a smooth profile) or 'zero' (R = 0, for
    calibration tests).
    """

    variant: str = "exact_step"
    eta_star: float = 0.26
    q_star: float = 0.45
    model: Optional[ScattererModel] = None
    profile: Optional[SmoothProfile] = None
    lam: float = 1.0 / 6.0

    def __post_init__(self):
        if self.eta_star <= 0.0:
            raise ValueError("eta_star must be positive")
        if self.variant not in ("exact_step", "perturbative_smooth", "zero"):
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == "exact_step" and self.model is None:
            self.model = ScattererModel(lam=self.lam, time_profile="cos")
        if self.variant == "perturbative_smooth" and self.profile is None:
            self.profile = SmoothProfile()

    @property
    def n_freq(self):
        if self.variant == "exact_step":
            return self.model.n_freq
        if self.variant == "perturbative_smooth":
            return len(self.profile.omega)
        return 1


def transfer(p, b, phi, kernel):
    """Momentum transfer R(p, b, phi) under the chosen kernel."""
    if kernel.variant == "zero":
        return np.zeros(2)
    if kernel.variant == "exact_step":
        from .scattering import exact_scatter
        return exact_scatter(p, b, phi, kernel.model,
                             q_star=kernel.q_star).dp
    # perturbative: transverse kick alpha1/|p|, speed change beta1/|p|^2
    from .scattering import alpha1, beta1
    p = np.asarray(p, dtype=float)
    pn = math.sqrt(float(p @ p))
    e = p / pn
    a = alpha1(e, b, phi, kernel.profile, lam=kernel.lam)
    bt = beta1(e, b, phi, kernel.profile, lam=kernel.lam)
    p_turn = p + a / pn
    new_norm = pn + bt / (pn * pn)
    p_new = p_turn * (new_norm / math.sqrt(float(p_turn @ p_turn)))
    return p_new - p


def rw_step(state, kernel, draws):
    """One chain step from (b, phi) draws; returns the new WalkState."""
    b, phi = draws
    dp = transfer(state.p, b, phi, kernel)
    p_new = state.p + dp
    pn = math.sqrt(float(p_new @ p_new))
    if pn < P_FLOOR:
        raise DegenerateMomentum(f"|p| fell below {P_FLOOR}")
    e_new = p_new / pn
    return WalkState(p=p_new, q=state.q + kernel.eta_star * e_new,
                     t=state.t + kernel.eta_star / pn, n=state.n + 1)


@dataclass
class MomentTable:
    """Chain moments on a log-spaced ordinal grid."""

    n_grid: np.ndarray
    mean_p1: np.ndarray
    mean_p2: np.ndarray
    mean_p3: np.ndarray
    mean_t: np.ndarray
    mean_q2: np.ndarray
    stderr_p1: np.ndarray
    stderr_p2: np.ndarray
    stderr_p3: np.ndarray
    stderr_t: np.ndarray
    stderr_q2: np.ndarray
    n_valid: np.ndarray
    n_dropped: int
    per_chain_p3: np.ndarray = field(repr=False, default=None)
    per_chain_t: np.ndarray = field(repr=False, default=None)
    per_chain_p2: np.ndarray = field(repr=False, default=None)
    per_chain_q2: np.ndarray = field(repr=False, default=None)


def ordinal_grid(n_max, per_decade=8):
    """Log-spaced unique integer ordinals in [1, n_max]."""
    decades = math.log10(n_max)
    count = max(2, int(round(per_decade * decades)) + 1)
    raw = np.unique(np.round(np.logspace(0.0, decades, count)).astype(np.int64))
    raw[-1] = n_max
    return np.unique(raw)


def rw_run(n_steps, n_chains, p0, kernel, seed, per_decade=8):
    """Run independent chains and accumulate the |p| moments vs ordinal.

    Per-chain RNG streams are keyed by (seed, chain); moments are reduced in
    chain order.  Degenerate chains (|p| below the floor) are dropped and
    counted.
    """
    if n_chains < 100:
        raise ValueError("need at least 100 chains")
    n_grid = ordinal_grid(n_steps, per_decade)
    nn = n_grid.shape[0]
    acc = {k: np.empty((n_chains, nn)) for k in
           ("p1", "p2", "p3", "t", "q2")}
    valid = np.zeros(n_chains, dtype=bool)
    dropped = 0
    if kernel.variant == "exact_step":
        runner = _run_chain_exact
    elif kernel.variant == "zero":
        runner = _run_chain_zero
    else:
        tables = _chord_tables(kernel.profile)
        def runner(p0_, kernel_, b_, ph0_, ph1_, grid_):
            return _run_chain_perturbative(p0_, kernel_, b_, ph0_, ph1_,
                                           grid_, tables)
    for c in range(n_chains):
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((seed, c))))
        b = rng.uniform(-kernel.q_star, kernel.q_star, n_steps)
        ph0 = rng.uniform(0.0, 2.0 * math.pi, n_steps)
        ph1 = rng.uniform(0.0, 2.0 * math.pi, n_steps)
        ok, rows = runner(p0, kernel, b, ph0, ph1, n_grid)
        if ok:
            valid[c] = True
            for k, row in rows.items():
                acc[k][c] = row
        else:
            dropped += 1
    nv = int(valid.sum())
    if nv == 0:
        raise DegenerateMomentum("all chains degenerate")
    out = {}
    for k in acc:
        vals = acc[k][valid]
        out["mean_" + k] = vals.mean(axis=0)
        out["stderr_" + k] = vals.std(axis=0, ddof=1) / math.sqrt(nv) \
            if nv > 1 else np.zeros(nn)
    return MomentTable(
        n_grid=n_grid, n_valid=np.full(nn, nv), n_dropped=dropped,
        per_chain_p3=acc["p3"][valid], per_chain_t=acc["t"][valid],
        per_chain_p2=acc["p2"][valid], per_chain_q2=acc["q2"][valid],
        **out)


def _run_chain_exact(p0, kernel, b, ph0, ph1, n_grid):
    nn = n_grid.shape[0]
    s = {k: np.full(nn, np.nan) for k in ("p1", "p2", "p3", "t", "q2")}
    status, n_done, nptr = _kern.rw_chain(
        float(p0), 0.0, kernel.q_star, kernel.model.lam,
        kernel.model.profile_id, kernel.eta_star, P_FLOOR,
        b, ph0, ph1, n_grid,
        s["p1"], s["p2"], s["p3"], s["t"], s["q2"],
        _EMPTY, _EMPTY, _EMPTY, _EMPTY, _EMPTY)
    return status == STATUS_OK, s


def _run_chain_zero(p0, kernel, b, ph0, ph1, n_grid):
    # closed form: p constant, t and q advance uniformly
    nn = n_grid.shape[0]
    n = n_grid.astype(float)
    p0 = float(p0)
    return True, {
        "p1": np.full(nn, p0),
        "p2": np.full(nn, p0 * p0),
        "p3": np.full(nn, p0 ** 3),
        "t": n * (kernel.eta_star / p0),
        "q2": (n * kernel.eta_star) ** 2,
    }


def _chord_tables(profile):
    table_b = np.linspace(-profile.support, profile.support, 2001)
    chord = np.array([_chord_integral(profile, bb) for bb in table_b])
    return table_b, chord, np.gradient(chord, table_b)


def _run_chain_perturbative(p0, kernel, b, ph0, ph1, n_grid, tables):
    """Python chain with tabulated chord integrals (separable profile)."""
    prof = kernel.profile
    table_b, chord, dchord = tables
    quasi = prof.time_factor == "quasiperiodic"
    lam = kernel.lam
    eta = kernel.eta_star
    px, py = float(p0), 0.0
    t = 0.0
    qx = qy = 0.0
    nn = n_grid.shape[0]
    s = {k: np.full(nn, np.nan) for k in ("p1", "p2", "p3", "t", "q2")}
    nptr = 0
    for i in range(b.shape[0]):
        pn = math.hypot(px, py)
        ex, ey = px / pn, py / pn
        G = float(np.interp(b[i], table_b, chord))
        Gp = float(np.interp(b[i], table_b, dchord))
        if quasi:
            fv = math.cos(ph0[i]) + math.cos(ph1[i])
            wdot = -math.sin(ph0[i]) - math.sqrt(2.0) * math.sin(ph1[i])
        else:
            fv = math.cos(ph0[i])
            wdot = -math.sin(ph0[i])
        # alpha1 = -lam * fv * Gp * e_perp ; beta1 = lam * wdot * G
        ax = -lam * fv * Gp * (-ey)
        ay = -lam * fv * Gp * ex
        bt = lam * wdot * G
        tx = px + ax / pn
        ty = py + ay / pn
        new_norm = pn + bt / (pn * pn)
        tn = math.hypot(tx, ty)
        px = tx * (new_norm / tn)
        py = ty * (new_norm / tn)
        pn = math.hypot(px, py)
        if pn < P_FLOOR:
            return False, s
        t += eta / pn
        qx += eta * px / pn
        qy += eta * py / pn
        if nptr < nn and i + 1 == n_grid[nptr]:
            s["p1"][nptr] = pn
            s["p2"][nptr] = pn * pn
            s["p3"][nptr] = pn ** 3
            s["t"][nptr] = t
            s["q2"][nptr] = qx * qx + qy * qy
            nptr += 1
    return True, s


def _chord_integral(profile, b):
    """G(b) = integral of g(|b + mu e|) d mu (the line integral through g)."""
    from scipy.integrate import quad
    span = profile.support
    if abs(b) >= span:
        return 0.0
    val, _err = quad(lambda mu: profile.g(math.hypot(b, mu)),
                     -span, span, epsrel=1e-10, limit=200)
    return val
