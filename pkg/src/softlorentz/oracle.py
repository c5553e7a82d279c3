"""Mollified-step reference integrator.

Regularizes the flat disk profile by a C^2 quintic ramp of width ``w`` and
integrates the smooth Hamiltonian flow with an adaptive RK45 controller.
As w -> 0 this converges (first order in w) to the event-driven dynamics, so
it serves as an independent oracle for the production engine.  Slow by
design; never used on the hot path.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

from ._kernels import pure as _pure
from .errors import StepUnderflow

_RTOL = 1e-10
_ATOL = 1e-12
W_MIN, W_MAX = 1e-4, 1e-2


def smoothstep(x):
    """Quintic ramp: 0 -> 1 on [0, 1] with two vanishing derivatives."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def smoothstep_deriv(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return 30.0 * x * x * (1.0 - x) * (1.0 - x)


class MollifiedDisk:
    """Flat disk of radius q_star with the rim step smeared over width w."""

    def __init__(self, q_star, width):
        if not (W_MIN <= width <= W_MAX):
            raise ValueError(f"mollifier width must lie in [{W_MIN}, {W_MAX}]")
        self.q_star = q_star
        self.width = width

    def value(self, r):
        return smoothstep((self.q_star - r) / self.width)

    def radial_deriv(self, r):
        return -smoothstep_deriv((self.q_star - r) / self.width) / self.width


def _check_solution(sol):
    if sol.status == -1:
        raise StepUnderflow(sol.message)


def _profile_f(model, t):
    return _pure.profile_value(model.profile_id, t, model.phi0[0],
                               model.phi0[1])


def integrate_lone_disk(p, b, phi, model, width, q_star=0.45,
                        t0=0.0, max_time=200.0, rtol=_RTOL):
    """Integrate one scattering event off a mollified lone disk.

    Entry geometry follows the per-collision convention: start half a unit
    ahead of the center at impact parameter b, phase offsets phi applying
    from that start instant.  Returns (p_out, t_exit, sol).
    """
    disk = MollifiedDisk(q_star, width)
    p = np.asarray(p, dtype=float)
    pn = math.sqrt(float(p @ p))
    e = p / pn
    eperp = np.array([-e[1], e[0]])
    if np.isscalar(phi):
        ph0, ph1 = float(phi), 0.0
    else:
        ph0, ph1 = (tuple(float(v) for v in phi) + (0.0, 0.0))[:2]
    q0 = b * eperp - 0.5 * e
    lam = model.lam
    profile = model.profile_id

    def rhs(t, y):
        qx, qy, px, py = y
        r = math.hypot(qx, qy)
        if r >= q_star or r == 0.0:
            return (px, py, 0.0, 0.0)
        g = disk.radial_deriv(r)
        if g == 0.0:
            return (px, py, 0.0, 0.0)
        f = _pure.profile_value(profile, t, ph0, ph1)
        c = -lam * f * g / r
        return (px, py, c * qx, c * qy)

    def escaped(t, y):
        return math.hypot(y[0], y[1]) - 0.55

    escaped.terminal = True
    escaped.direction = 1.0
    sol = solve_ivp(rhs, (t0, t0 + max_time),
                    [q0[0], q0[1], p[0], p[1]],
                    method="RK45", rtol=rtol, atol=_ATOL, events=escaped,
                    max_step=0.25 * width / max(pn, 1e-6))
    _check_solution(sol)
    if not sol.t_events[0].size:
        raise StepUnderflow("oracle event never fired: particle stuck inside")
    y = sol.y_events[0][0]
    return np.array([y[2], y[3]]), float(sol.t_events[0][0]), sol


def integrate_smooth_oracle(init, lattice, model, mollifier_width, t_max,
                            t_eval=None, rtol=_RTOL):
    """Integrate the mollified lattice flow from a ParticleState.

    The force vanishes identically outside the thin rim band
    [q_star - w, q_star], so flight segments there are advanced exactly and
    the adaptive controller only runs through band transits.  Disk lookup
    reuses the lattice ray query; the crossing physics itself is pure ODE.
    Returns (t_eval, q samples (n, 2), p samples (n, 2)).
    """
    from ._kernels import active as _kern

    disk = MollifiedDisk(lattice.q_star, mollifier_width)
    if t_eval is None:
        t_eval = np.linspace(init.t, t_max, 101)
    t_eval = np.asarray(t_eval, dtype=float)
    q_star = lattice.q_star
    w = mollifier_width
    out_q = np.full((t_eval.shape[0], 2), np.nan)
    out_p = np.full((t_eval.shape[0], 2), np.nan)
    ptr = 0
    qx, qy = float(init.q[0]), float(init.q[1])
    px, py = float(init.p[0]), float(init.p[1])
    t = float(init.t)

    def sample_linear(t_a, t_b):
        nonlocal ptr
        while ptr < t_eval.shape[0] and t_eval[ptr] <= t_b:
            dt = t_eval[ptr] - t_a
            out_q[ptr] = (qx + px * dt, qy + py * dt)
            out_p[ptr] = (px, py)
            ptr += 1

    while t < t_max:
        pn = math.hypot(px, py)
        ex, ey = px / pn, py / pn
        # nearest band entry along the ray (anchor-local coordinates)
        aj = round(qy * _pure.TWO_INV_SQRT3)
        ai = round(qx - aj * 0.5)
        lx = qx - (ai + aj * 0.5)
        ly = qy - aj * _pure.HALF_SQRT3
        dist, di, dj, rx, ry = _kern.free_flight_hex(lx, ly, ex, ey,
                                                     q_star, 64.0)
        t_hit = t + dist / pn if dist >= 0.0 else math.inf
        if t_hit > t_max:
            sample_linear(t, t_max)
            dtl = t_max - t
            qx += px * dtl
            qy += py * dtl
            t = t_max
            break
        sample_linear(t, t_hit)
        cx = (ai + di) + (aj + dj) * 0.5
        cy = (aj + dj) * _pure.HALF_SQRT3
        qx, qy = cx + rx, cy + ry
        t = t_hit
        # alternate band transits and exact interior chords until back out
        while True:
            done, ptr, qx, qy, px, py, t = _band_transit(
                (cx, cy), disk, model, lattice, qx, qy, px, py, t, t_max,
                t_eval, ptr, out_q, out_p, rtol)
            if done or t >= t_max:
                break
            # inside the flat core: exact chord to the core boundary
            pn = math.hypot(px, py)
            ex, ey = px / pn, py / pn
            relx, rely = qx - cx, qy - cy
            bdot = relx * ex + rely * ey
            core = q_star - w
            disc = bdot * bdot - (relx * relx + rely * rely - core * core)
            s = -bdot + math.sqrt(max(disc, 0.0))
            t_end = t + s / pn
            if t_end > t_max:
                sample_linear(t, t_max)
                dtl = t_max - t
                qx += px * dtl
                qy += py * dtl
                t = t_max
                break
            sample_linear(t, t_end)
            qx += s * ex
            qy += s * ey
            t = t_end
        if t >= t_max:
            break
    sample_linear(t, t_max)
    return t_eval, out_q, out_p


def _band_transit(center, disk, model, lattice, qx, qy, px, py, t, t_max,
                  t_eval, ptr, out_q, out_p, rtol):
    """ODE through the rim band until leaving it on either side.

    Returns (left_disk, ptr, qx, qy, px, py, t); left_disk is True when the
    particle exited outward (visit over), False when it entered the core.
    """
    cx, cy = center
    q_star = disk.q_star
    core = q_star - disk.width
    if model.phase_mode == "per_scatterer":
        raise ValueError("oracle supports global phases only")
    ph0, ph1 = model.phi0
    lam = model.lam
    profile = model.profile_id

    def rhs(tt, y):
        rx, ry = y[0] - cx, y[1] - cy
        r = math.hypot(rx, ry)
        if r >= q_star or r <= core or r == 0.0:
            return (y[2], y[3], 0.0, 0.0)
        g = disk.radial_deriv(r)
        f = _pure.profile_value(profile, tt, ph0, ph1)
        c = -lam * f * g / r
        return (y[2], y[3], c * rx, c * ry)

    def hit_outer(tt, y):
        return math.hypot(y[0] - cx, y[1] - cy) - (q_star + 1e-9)

    hit_outer.terminal = True
    hit_outer.direction = 1.0

    def hit_core(tt, y):
        return math.hypot(y[0] - cx, y[1] - cy) - (core - 1e-9)

    hit_core.terminal = True
    hit_core.direction = -1.0

    pn = math.hypot(px, py)
    sol = solve_ivp(rhs, (t, t + 50.0),
                    [qx, qy, px, py], method="RK45", rtol=rtol, atol=_ATOL,
                    events=(hit_outer, hit_core), dense_output=True,
                    max_step=max(disk.width / (2.0 * pn), 1e-9))
    _check_solution(sol)
    # sample along the transit
    while ptr < t_eval.shape[0] and t_eval[ptr] <= sol.t[-1]:
        y = sol.sol(t_eval[ptr])
        out_q[ptr] = (y[0], y[1])
        out_p[ptr] = (y[2], y[3])
        ptr += 1
    if sol.t_events[0].size:
        y = sol.y_events[0][0]
        return True, ptr, y[0], y[1], y[2], y[3], float(sol.t_events[0][0])
    if sol.t_events[1].size:
        y = sol.y_events[1][0]
        return False, ptr, y[0], y[1], y[2], y[3], float(sol.t_events[1][0])
    if sol.t[-1] >= t_max:
        y = sol.y[:, -1]
        return True, ptr, y[0], y[1], y[2], y[3], float(sol.t[-1])
    raise StepUnderflow("band transit ended without an exit event")
