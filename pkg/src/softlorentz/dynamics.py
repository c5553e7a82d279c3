"""Exact event-driven time evolution.

The flat circular scatterer gives closed-form dynamics: straight free
flights between disks, an instantaneous refraction at each rim crossing
(tangential momentum preserved, normal component set by the potential jump)
and straight chords inside.  Everything here is exact up to floating-point
roundoff; the only integrator in the package lives in ``oracle`` and is used
to cross-check this module, never to drive it.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._kernels import (BACKEND, PHASE_GLOBAL, PHASE_PER_SCATTERER,
                       PROFILE_CONST, PROFILE_COS, PROFILE_QUASI,
                       PROFILE_ZERO, STATUS_NO_HIT, STATUS_OK,
                       STATUS_STALLED, STATUS_TRAPPED, active as _kern,
                       pure as _pure)
from .errors import HorizonExceeded, TrappedGuard
from .lattice import LatticeSpec, build_lattice

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

PROFILE_IDS = {
    "zero": PROFILE_ZERO,
    "constant": PROFILE_CONST,
    "cos": PROFILE_COS,
    "quasiperiodic": PROFILE_QUASI,
}
PHASE_MODE_IDS = {
    "global": PHASE_GLOBAL,
    "per_scatterer": PHASE_PER_SCATTERER,
}


@dataclass
class ParticleState:
    """Unfolded position, momentum and absolute time of one trajectory."""

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same dimension")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("state components must be finite")

    @property
    def dim(self):
        return self.q.shape[0]

    @property
    def speed(self):
        return float(math.sqrt(np.dot(self.p, self.p)))


@dataclass
class ScattererModel:
    """Coupling, time profile and phase assignment of the scatterers.

    time_profile: 'cos' | 'quasiperiodic' (cos t + cos sqrt(2) t) |
    'constant' | 'zero'.  phase_mode 'global' uses phi0 everywhere;
    'per_scatterer' derives each scatterer's phase deterministically from
    (phase_seed, lattice_index).
    """

    lam: float
    time_profile: str = "cos"
    phase_mode: str = "global"
    phi0: tuple = (0.0, 0.0)
    phase_seed: int = 0

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("coupling must be nonnegative")
        if self.time_profile not in PROFILE_IDS:
            raise ValueError(f"unknown time_profile {self.time_profile!r}")
        if self.phase_mode not in PHASE_MODE_IDS:
            raise ValueError(f"unknown phase_mode {self.phase_mode!r}")
        if np.isscalar(self.phi0):
            self.phi0 = (float(self.phi0), 0.0)
        else:
            phi = tuple(float(v) for v in self.phi0)
            self.phi0 = (phi + (0.0, 0.0))[:2]

    @property
    def omega(self):
        if self.time_profile == "quasiperiodic":
            return (1.0, SQRT2)
        return (1.0,)

    @property
    def n_freq(self):
        return len(self.omega)

    @property
    def profile_id(self):
        return PROFILE_IDS[self.time_profile]

    @property
    def phase_mode_id(self):
        return PHASE_MODE_IDS[self.phase_mode]

    def f(self, t, phase=None):
        """Evaluate the time factor at absolute time t."""
        ph0, ph1 = self._offsets(phase)
        return _pure.profile_value(self.profile_id, t, ph0, ph1)

    def _offsets(self, phase):
        if phase is None:
            return self.phi0
        if np.isscalar(phase):
            return (float(phase), 0.0)
        phase = tuple(float(v) for v in phase)
        return (phase + (0.0, 0.0))[:2]

    def scatterer_phase(self, lattice_index):
        """Phase offsets of one scatterer under the current phase mode."""
        if self.phase_mode == "per_scatterer":
            i, j = (int(lattice_index[0]),
                    int(lattice_index[1]) if len(lattice_index) > 1 else 0)
            return (_pure.scatterer_phase(self.phase_seed, i, j, 0),
                    _pure.scatterer_phase(self.phase_seed, i, j, 1))
        return self.phi0


class EventRecord(NamedTuple):
    """One scatterer visit, mirroring the per-collision bookkeeping."""

    n: int
    t: float
    b: float
    phi: tuple
    lattice_index: tuple
    dp: np.ndarray
    ke_in: float
    ke_out: float


class EventLog:
    """Column-packed sequence of EventRecord.

    Stores events as flat arrays (cheap for millions of events) and
    materializes EventRecord tuples on access.  The extra ``ex``/``ey``
    columns hold the incoming unit direction for direction statistics; they
    are not part of the record tuple or the CSV schema.
    """

    _COLS = ("n", "t", "b", "phi0", "phi1", "lat_i", "lat_j",
             "dpx", "dpy", "ke_in", "ke_out", "ex", "ey")

    def __init__(self, dim, **cols):
        self.dim = dim
        for name in self._COLS:
            setattr(self, name, cols.get(name))

    @classmethod
    def empty(cls, dim):
        icols = {"n": np.empty(0, dtype=np.int64),
                 "lat_i": np.empty(0, dtype=np.int64),
                 "lat_j": np.empty(0, dtype=np.int64)}
        fcols = {k: np.empty(0) for k in
                 ("t", "b", "phi0", "phi1", "dpx", "dpy", "ke_in", "ke_out",
                  "ex", "ey")}
        return cls(dim, **icols, **fcols)

    def __len__(self):
        return int(self.n.shape[0])

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if self.dim == 1:
            dp = np.array([self.dpx[i]])
        else:
            dp = np.array([self.dpx[i], self.dpy[i]])
        phi1 = self.phi1[i]
        phi = (self.phi0[i],) if math.isnan(phi1) else (self.phi0[i], phi1)
        return EventRecord(
            n=int(self.n[i]), t=float(self.t[i]), b=float(self.b[i]),
            phi=phi, lattice_index=(int(self.lat_i[i]), int(self.lat_j[i])),
            dp=dp, ke_in=float(self.ke_in[i]), ke_out=float(self.ke_out[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def directions(self):
        """(n_events, 2) incoming unit directions (2D logs only)."""
        return np.column_stack([self.ex, self.ey])


@dataclass
class TrajectoryResult:
    """Sampled series plus the event log of one trajectory."""

    t_grid: np.ndarray
    q: np.ndarray               # (n_samples, dim), unfolded
    p: np.ndarray               # (n_samples, dim)
    n_filled: int
    events: EventLog
    n_events: int
    status: int
    final: ParticleState
    n_grid: np.ndarray
    n_p2: np.ndarray
    n_q2: np.ndarray
    n_grid_filled: int
    free_path_mean: float
    max_free_path: float
    max_ledger_err: float
    max_energy_drift: float

    @property
    def flagged(self):
        return self.status != STATUS_OK

    @property
    def series(self):
        return self.q[:self.n_filled], self.p[:self.n_filled]


def cross_step_boundary(p, normal, dv):
    """Momentum across a potential step of height dv (ahead minus behind).

    Tangential component is preserved exactly; the normal component is
    sqrt(pn^2 - 2 dv) on transmission and -pn on total reflection.
    """
    p = np.asarray(p, dtype=float)
    normal = np.asarray(normal, dtype=float)
    nn = float(np.dot(normal, normal))
    if abs(nn - 1.0) > 1e-12:
        raise ValueError("normal must be a unit vector")
    pn = float(np.dot(p, normal))
    if pn <= 0.0:
        raise ValueError("momentum must point into the surface")
    rad = pn * pn - 2.0 * dv
    if rad <= _pure.REFLECT_BAND:
        return p - 2.0 * pn * normal
    return p + (math.sqrt(rad) - pn) * normal


_EMPTY_F = np.empty(0)
_EMPTY_I = np.empty(0, dtype=np.int64)


def traverse_scatterer(state, center, model, phase=None, q_star=0.45,
                       lattice_index=(0, 0), n=0):
    """One full scatterer visit from a state on the rim moving inward.

    Returns (state_at_exit, EventRecord).  Raises TrappedGuard when the
    interior hit cap is exceeded (bounded profiles with sign changes escape
    within a half-period, so this flags corrupt input).
    """
    if state.dim != 2:
        raise ValueError("traverse_scatterer expects a 2D state")
    center = np.asarray(center, dtype=float)
    rel = state.q - center
    rn = float(np.linalg.norm(rel))
    if abs(rn - q_star) > 1e-10:
        raise ValueError("entry point must lie on the scatterer boundary")
    if float(np.dot(state.p, rel)) >= 0.0:
        raise ValueError("incoming momentum must point into the disk")
    rel = rel * (q_star / rn)
    if phase is None:
        ph0, ph1 = model.scatterer_phase(lattice_index)
    else:
        ph0, ph1 = model._offsets(phase)
    pnorm = state.speed
    ex, ey = state.p[0] / pnorm, state.p[1] / pnorm
    b_sig = ex * rel[1] - ey * rel[0]
    (outcome, px, py, rx, ry, t_exit, ke_in, ke_out, hits, err, _tp) = \
        _kern.visit_disk(state.p[0], state.p[1], rel[0], rel[1], state.t,
                         q_star, model.lam, model.profile_id, ph0, ph1,
                         math.inf, 0.0, 0.0,
                         _EMPTY_F, 0, _EMPTY_F, _EMPTY_F, _EMPTY_F, _EMPTY_F)
    if outcome == _pure._VISIT_TRAPPED:
        raise TrappedGuard(f"interior hits exceeded {_pure.TRAP_CAP}")
    exit_state = ParticleState(q=center + np.array([rx, ry]),
                               p=np.array([px, py]), t=t_exit)
    phi1 = (_pure.reduced_phase2(state.t, ph1)
            if model.profile_id == PROFILE_QUASI else math.nan)
    phi0 = _pure.reduced_phase(state.t, ph0)
    record = EventRecord(
        n=n, t=state.t, b=b_sig,
        phi=(phi0,) if math.isnan(phi1) else (phi0, phi1),
        lattice_index=tuple(lattice_index),
        dp=exit_state.p - state.p, ke_in=ke_in, ke_out=ke_out)
    return exit_state, record


def _hex_anchor_local(q):
    aj = round(q[1] * _pure.TWO_INV_SQRT3)
    ai = round(q[0] - aj * 0.5)
    lx = q[0] - (ai + aj * 0.5)
    ly = q[1] - aj * _pure.HALF_SQRT3
    return int(ai), int(aj), lx, ly


def _check_outside_hex(q, p, q_star):
    ai, aj, lx, ly = _hex_anchor_local(q)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            cx = di + dj * 0.5
            cy = dj * _pure.HALF_SQRT3
            rx, ry = lx - cx, ly - cy
            d = math.hypot(rx, ry)
            if d < q_star - 1e-10:
                raise ValueError("initial position lies inside a scatterer")
            if d < q_star + 1e-10 and rx * p[0] + ry * p[1] < 0.0:
                raise ValueError(
                    "initial position on a rim must move outward")


@dataclass
class RawTrajectory:
    """Plain-array engine output shared by evolve wrappers and ensembles."""

    status: int
    n_events: int
    t_filled: int
    n_filled: int
    s_q: np.ndarray
    s_p: np.ndarray
    sn_p2: np.ndarray
    sn_q2: np.ndarray
    events: EventLog
    free_sum: float
    free_cnt: int
    max_free: float
    max_ledger: float
    max_drift: float
    final_q: np.ndarray
    final_p: np.ndarray
    final_t: float


def run_hex_raw(q0, p0, t0, lattice, model, t_max, t_grid, n_grid=None,
                cap_lo=0, cap_hi=0, max_events=0):
    """Drive the hex-lattice kernel once; no validation, no exceptions."""
    t_grid = np.ascontiguousarray(t_grid, dtype=float)
    n_grid = (_EMPTY_I if n_grid is None
              else np.ascontiguousarray(n_grid, dtype=np.int64))
    nt = t_grid.shape[0]
    nn = n_grid.shape[0]
    ncap_max = max(0, int(cap_hi) - int(cap_lo))
    s_qx, s_qy = np.full(nt, np.nan), np.full(nt, np.nan)
    s_px, s_py = np.full(nt, np.nan), np.full(nt, np.nan)
    sn_p2, sn_q2 = np.full(nn, np.nan), np.full(nn, np.nan)
    ev_n = np.empty(ncap_max, dtype=np.int64)
    ev_i = np.empty(ncap_max, dtype=np.int64)
    ev_j = np.empty(ncap_max, dtype=np.int64)
    ev_t, ev_b = np.empty(ncap_max), np.empty(ncap_max)
    ev_ph0, ev_ph1 = np.empty(ncap_max), np.empty(ncap_max)
    ev_dpx, ev_dpy = np.empty(ncap_max), np.empty(ncap_max)
    ev_kein, ev_keout = np.empty(ncap_max), np.empty(ncap_max)
    ev_ex, ev_ey = np.empty(ncap_max), np.empty(ncap_max)
    ai, aj, lx, ly = _hex_anchor_local(np.asarray(q0, dtype=float))
    (status, nev, tptr, nptr, ncap, free_sum, free_cnt, max_free,
     max_ledger, max_drift, lx, ly, ai, aj, px, py, t) = _kern.evolve_hex(
        lx, ly, ai, aj, float(p0[0]), float(p0[1]), float(t0),
        lattice.q_star, lattice.horizon_bound,
        model.lam, model.profile_id, model.phase_mode_id,
        model.phi0[0], model.phi0[1], model.phase_seed,
        float(t_max), int(max_events),
        t_grid, n_grid, int(cap_lo), int(cap_hi),
        s_qx, s_qy, s_px, s_py, sn_p2, sn_q2,
        ev_n, ev_t, ev_b, ev_ph0, ev_ph1, ev_i, ev_j,
        ev_dpx, ev_dpy, ev_kein, ev_keout, ev_ex, ev_ey)
    events = EventLog(
        2, n=ev_n[:ncap], t=ev_t[:ncap], b=ev_b[:ncap],
        phi0=ev_ph0[:ncap], phi1=ev_ph1[:ncap],
        lat_i=ev_i[:ncap], lat_j=ev_j[:ncap],
        dpx=ev_dpx[:ncap], dpy=ev_dpy[:ncap],
        ke_in=ev_kein[:ncap], ke_out=ev_keout[:ncap],
        ex=ev_ex[:ncap], ey=ev_ey[:ncap])
    final_q = np.array([ai + aj * 0.5 + lx, aj * _pure.HALF_SQRT3 + ly])
    return RawTrajectory(
        status=status, n_events=nev, t_filled=tptr, n_filled=nptr,
        s_q=np.column_stack([s_qx, s_qy]), s_p=np.column_stack([s_px, s_py]),
        sn_p2=sn_p2, sn_q2=sn_q2, events=events,
        free_sum=free_sum, free_cnt=free_cnt, max_free=max_free,
        max_ledger=max_ledger, max_drift=max_drift,
        final_q=final_q, final_p=np.array([px, py]), final_t=t)


def run_line_raw(q0, p0, t0, model, t_max, t_grid, q_star=1.0 / 3.0,
                 n_grid=None, cap_lo=0, cap_hi=0, max_events=0):
    """Drive the 1D circle kernel once; no validation, no exceptions."""
    t_grid = np.ascontiguousarray(t_grid, dtype=float)
    n_grid = (_EMPTY_I if n_grid is None
              else np.ascontiguousarray(n_grid, dtype=np.int64))
    nt = t_grid.shape[0]
    nn = n_grid.shape[0]
    ncap_max = max(0, int(cap_hi) - int(cap_lo))
    s_q, s_p = np.full(nt, np.nan), np.full(nt, np.nan)
    sn_p2, sn_q2 = np.full(nn, np.nan), np.full(nn, np.nan)
    ev_n = np.empty(ncap_max, dtype=np.int64)
    ev_i = np.empty(ncap_max, dtype=np.int64)
    ev_t = np.empty(ncap_max)
    ev_ph0, ev_ph1 = np.empty(ncap_max), np.empty(ncap_max)
    ev_dp = np.empty(ncap_max)
    ev_kein, ev_keout = np.empty(ncap_max), np.empty(ncap_max)
    x0 = float(q0 if np.isscalar(q0) else np.asarray(q0).reshape(-1)[0])
    p0 = float(p0 if np.isscalar(p0) else np.asarray(p0).reshape(-1)[0])
    m = int(math.floor(x0))
    x_loc = x0 - m
    w = 2.0 * q_star
    (status, nev, tptr, nptr, ncap, free_sum, free_cnt, max_free,
     max_ledger, max_drift, m, x_loc, p, t) = _kern.evolve_line(
        m, x_loc, p0, float(t0), w,
        model.lam, model.profile_id, model.phase_mode_id,
        model.phi0[0], model.phi0[1], model.phase_seed,
        float(t_max), int(max_events),
        t_grid, n_grid, int(cap_lo), int(cap_hi),
        s_q, s_p, sn_p2, sn_q2,
        ev_n, ev_t, ev_ph0, ev_ph1, ev_i, ev_dp, ev_kein, ev_keout)
    zeros = np.zeros(ncap)
    events = EventLog(
        1, n=ev_n[:ncap], t=ev_t[:ncap], b=zeros[:ncap],
        phi0=ev_ph0[:ncap], phi1=ev_ph1[:ncap],
        lat_i=ev_i[:ncap], lat_j=np.zeros(ncap, dtype=np.int64),
        dpx=ev_dp[:ncap], dpy=zeros[:ncap],
        ke_in=ev_kein[:ncap], ke_out=ev_keout[:ncap],
        ex=zeros[:ncap], ey=zeros[:ncap])
    return RawTrajectory(
        status=status, n_events=nev, t_filled=tptr, n_filled=nptr,
        s_q=s_q.reshape(-1, 1), s_p=s_p.reshape(-1, 1),
        sn_p2=sn_p2, sn_q2=sn_q2, events=events,
        free_sum=free_sum, free_cnt=free_cnt, max_free=max_free,
        max_ledger=max_ledger, max_drift=max_drift,
        final_q=np.array([m + x_loc]), final_p=np.array([p]), final_t=t)


def _validate_samples(samples, t0, t_max):
    samples = np.ascontiguousarray(samples, dtype=float)
    if samples.size and (np.any(np.diff(samples) < 0.0)
                         or samples[-1] > t_max or samples[0] < t0):
        raise ValueError("samples must ascend within [t0, t_max]")
    return samples


def evolve_trajectory(init, lattice, model, t_max, samples,
                      n_samples=None, event_window=None,
                      capture_limit=100_000, max_events=0):
    """Alternate free flights and scatterer visits until t_max.

    Positions are unfolded; sampled states are exact piecewise-linear
    interpolations along free-flight and chord segments.  Raises
    TrappedGuard / HorizonExceeded; a stalled trajectory (speed below the
    floor in free flight) is returned flagged rather than raised so
    ensembles can count and exclude it.
    """
    if init.dim != 2 or lattice.dim != 2:
        raise ValueError("evolve_trajectory expects 2D state and lattice")
    samples = _validate_samples(samples, init.t, t_max)
    _check_outside_hex(init.q, init.p, lattice.q_star)
    if event_window is None:
        cap_lo, cap_hi = 1, 1 + int(capture_limit)
    else:
        cap_lo, cap_hi = int(event_window[0]), int(event_window[1])
    raw = run_hex_raw(init.q, init.p, init.t, lattice, model, t_max,
                      samples, n_grid=n_samples,
                      cap_lo=cap_lo, cap_hi=cap_hi, max_events=max_events)
    if raw.status == STATUS_TRAPPED:
        raise TrappedGuard(f"interior hits exceeded {_pure.TRAP_CAP}")
    if raw.status == STATUS_NO_HIT:
        raise HorizonExceeded("free flight exceeded the certified horizon")
    return _package_result(raw, samples, n_samples)


def evolve_1d(init, model, t_max, samples, q_star=1.0 / 3.0,
              n_samples=None, event_window=None, capture_limit=100_000,
              max_events=0):
    """1D pulsed-rotor evolution on the circle of circumference 1."""
    samples = _validate_samples(samples, init.t, t_max)
    x0 = float(init.q[0])
    frac = x0 - math.floor(x0)
    w = 2.0 * q_star
    if 1e-12 < frac < w - 1e-12:
        raise ValueError("initial position lies inside the support")
    if event_window is None:
        cap_lo, cap_hi = 1, 1 + int(capture_limit)
    else:
        cap_lo, cap_hi = int(event_window[0]), int(event_window[1])
    raw = run_line_raw(x0, init.p, init.t, model, t_max, samples,
                       q_star=q_star, n_grid=n_samples,
                       cap_lo=cap_lo, cap_hi=cap_hi, max_events=max_events)
    if raw.status == STATUS_TRAPPED:
        raise TrappedGuard(f"interior hits exceeded {_pure.TRAP_CAP}")
    return _package_result(raw, samples, n_samples)


def _package_result(raw, samples, n_samples):
    n_grid = (_EMPTY_I if n_samples is None
              else np.asarray(n_samples, dtype=np.int64))
    return TrajectoryResult(
        t_grid=samples, q=raw.s_q, p=raw.s_p, n_filled=raw.t_filled,
        events=raw.events, n_events=raw.n_events, status=raw.status,
        final=ParticleState(q=raw.final_q, p=raw.final_p, t=raw.final_t),
        n_grid=n_grid, n_p2=raw.sn_p2, n_q2=raw.sn_q2,
        n_grid_filled=raw.n_filled,
        free_path_mean=(raw.free_sum / raw.free_cnt if raw.free_cnt else
                        math.nan),
        max_free_path=raw.max_free, max_ledger_err=raw.max_ledger,
        max_energy_drift=raw.max_drift)


def kicked_step(q, p, lam, potential="product_cos"):
    """One Floquet step of the kicked rotor: p' = p - lam grad v, q' = q + p'.

    v(q) = prod_i cos(q_i); q is reduced mod 2 pi per component for the
    force, the returned q' keeps the unfolded value.
    """
    if potential != "product_cos":
        raise ValueError(f"unknown kick potential {potential!r}")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    qr = np.mod(q, TWO_PI)
    d = q.shape[0]
    grad = np.empty(d)
    for i in range(d):
        g = -math.sin(qr[i])
        for k in range(d):
            if k != i:
                g *= math.cos(qr[k])
        grad[i] = g
    p_new = p - lam * grad
    return q + p_new, p_new


def kicked_run(q0, p0, lam, n_kicks, k_grid):
    """Iterate the kick map, sampling (q, p) at the kick counts in k_grid."""
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    k_grid = np.ascontiguousarray(k_grid, dtype=np.int64)
    nk = k_grid.shape[0]
    d = q0.shape[0]
    if d == 1:
        s_q, s_p = np.full(nk, np.nan), np.full(nk, np.nan)
        q, p, kptr = _kern.kicked_1d(float(q0[0]), float(p0[0]), float(lam),
                                     int(n_kicks), k_grid, s_q, s_p)
        return s_q.reshape(-1, 1), s_p.reshape(-1, 1), kptr
    if d == 2:
        s_qx, s_qy = np.full(nk, np.nan), np.full(nk, np.nan)
        s_px, s_py = np.full(nk, np.nan), np.full(nk, np.nan)
        qx, qy, px, py, kptr = _kern.kicked_2d(
            float(q0[0]), float(q0[1]), float(p0[0]), float(p0[1]),
            float(lam), int(n_kicks), k_grid, s_qx, s_qy, s_px, s_py)
        return (np.column_stack([s_qx, s_qy]),
                np.column_stack([s_px, s_py]), kptr)
    raise ValueError("kicked_run supports d in {1, 2}")
