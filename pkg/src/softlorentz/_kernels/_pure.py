"""Pure-Python reference implementation of the hot simulation kernels.

The compiled extension (``softlorentz._kernels._core``) mirrors this module
statement for statement; with fused multiply-add contraction disabled at
compile time the two backends produce bit-identical trajectories.  Keep any
change here in lockstep with the ``.pyx`` source.

Conventions shared by both backends:

* positions are stored as an integer lattice anchor plus a local offset so
  that geometry never loses precision as unfolded coordinates grow;
* a scatterer visit starts at the instant the particle impinges on the disk
  boundary and ends when it transmits back out (possibly after interior
  reflections);
* all sampling (time grid, event-ordinal grid, event capture) happens inside
  the event loop on exact piecewise-linear segments.
"""

import math

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
INV_SQRT3 = 1.0 / SQRT3
TWO_INV_SQRT3 = 2.0 / SQRT3
HALF_SQRT3 = SQRT3 / 2.0

# time profile ids
PROFILE_ZERO = 0
PROFILE_CONST = 1
PROFILE_COS = 2
PROFILE_QUASI = 3

# phase modes
PHASE_GLOBAL = 0
PHASE_PER_SCATTERER = 1

# trajectory / chain status codes
STATUS_OK = 0
STATUS_STALLED = 1
STATUS_TRAPPED = 2
STATUS_NO_HIT = 3
STATUS_DEGENERATE = 4

# internal visit outcomes
_VISIT_DONE = 0
_VISIT_TMAX = 1
_VISIT_TRAPPED = 2

GRAZE_DISC = 1e-12      # ray-circle discriminant below which a disk is skipped
MIN_ENTRY = 1e-12       # entry parameter must exceed this to count as a hit
REFLECT_BAND = 1e-24    # transmitted pn^2 at or below this reflects instead
SPEED_FLOOR = 1e-9      # |p| below this in free flight flags the trajectory
TRAP_CAP = 1000000      # interior boundary hits allowed per visit

_MASK64 = (1 << 64) - 1


def mix64(z):
    """SplitMix64 finalizer; uint64 semantics."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def scatterer_phase(seed, i, j, comp):
    """Deterministic per-scatterer phase in [0, 2*pi) from (seed, index)."""
    h = mix64((seed & _MASK64) ^ mix64((i & _MASK64) ^ mix64((j & _MASK64) ^ comp)))
    return TWO_PI * ((h >> 11) * 1.1102230246251565e-16)  # 2^-53


def profile_value(profile, t, ph0, ph1):
    """Time factor f at absolute time t with phase offsets (ph0, ph1)."""
    if profile == PROFILE_COS:
        return math.cos(t + ph0)
    if profile == PROFILE_QUASI:
        return math.cos(t + ph0) + math.cos(SQRT2 * t + ph1)
    if profile == PROFILE_CONST:
        return 1.0
    return 0.0


def reduced_phase(t, ph):
    th = math.fmod(t + ph, TWO_PI)
    if th < 0.0:
        th += TWO_PI
    return th


def reduced_phase2(t, ph):
    th = math.fmod(SQRT2 * t + ph, TWO_PI)
    if th < 0.0:
        th += TWO_PI
    return th


def _sample_segment(t_grid, tptr, t_a, t_b, ux, uy, vx, vy, s_qx, s_qy, s_px, s_py):
    """Record samples with t_grid[tptr] <= t_b along a linear segment."""
    nt = t_grid.shape[0]
    while tptr < nt and t_grid[tptr] <= t_b:
        dt = t_grid[tptr] - t_a
        s_qx[tptr] = ux + vx * dt
        s_qy[tptr] = uy + vy * dt
        s_px[tptr] = vx
        s_py[tptr] = vy
        tptr += 1
    return tptr


def _sample_segment_1d(t_grid, tptr, t_a, t_b, u, v, s_q, s_p):
    nt = t_grid.shape[0]
    while tptr < nt and t_grid[tptr] <= t_b:
        s_q[tptr] = u + v * (t_grid[tptr] - t_a)
        s_p[tptr] = v
        tptr += 1
    return tptr


def free_flight_hex(lx, ly, ex, ey, q_star, bound):
    """March a ray through the hexagonal lattice to the first disk entry.

    (lx, ly) is the origin relative to the anchor lattice point and (ex, ey)
    the unit direction.  Returns (dist, di, dj, rx, ry) with (di, dj) the hit
    disk index relative to the anchor and (rx, ry) the entry point relative
    to the hit center, renormalized onto the circle.  dist < 0 means no hit
    within bound.
    """
    qs2 = q_star * q_star
    fa = lx - ly * INV_SQRT3
    fb = ly * TWO_INV_SQRT3
    va = ex - ey * INV_SQRT3
    vb = ey * TWO_INV_SQRT3
    ca = math.floor(fa)
    cb = math.floor(fb)
    if va > 0.0:
        ta = (ca + 1.0 - fa) / va
        da_step = 1
        dta = 1.0 / va
    elif va < 0.0:
        ta = (ca - fa) / va
        da_step = -1
        dta = -1.0 / va
    else:
        ta = math.inf
        da_step = 0
        dta = math.inf
    if vb > 0.0:
        tb = (cb + 1.0 - fb) / vb
        db_step = 1
        dtb = 1.0 / vb
    elif vb < 0.0:
        tb = (cb - fb) / vb
        db_step = -1
        dtb = -1.0 / vb
    else:
        tb = math.inf
        db_step = 0
        dtb = math.inf
    ia = int(ca)
    ib = int(cb)
    best = math.inf
    bi = 0
    bj = 0
    while True:
        for db in (-1, 0, 1):
            mj = ib + db
            cy = mj * HALF_SQRT3
            base = mj * 0.5
            for da in (-1, 0, 1):
                mi = ia + da
                cx = mi + base
                rx0 = lx - cx
                ry0 = ly - cy
                bdot = rx0 * ex + ry0 * ey
                cval = rx0 * rx0 + ry0 * ry0 - qs2
                disc = bdot * bdot - cval
                if disc < GRAZE_DISC:
                    continue
                s = -bdot - math.sqrt(disc)
                if s > MIN_ENTRY and s < best:
                    best = s
                    bi = mi
                    bj = mj
        cell_exit = ta if ta <= tb else tb
        if best <= cell_exit:
            break
        if cell_exit > bound:
            return (-1.0, 0, 0, 0.0, 0.0)
        if ta <= tb:
            ia += da_step
            ta += dta
        else:
            ib += db_step
            tb += dtb
    cx = bi + bj * 0.5
    cy = bj * HALF_SQRT3
    rx = (lx - cx) + best * ex
    ry = (ly - cy) + best * ey
    rn = math.sqrt(rx * rx + ry * ry)
    sc = q_star / rn
    return (best, bi, bj, rx * sc, ry * sc)


def visit_disk(px, py, rx, ry, t, q_star, lam, profile, ph0, ph1,
               t_max, bx, by, t_grid, tptr, s_qx, s_qy, s_px, s_py):
    """One scatterer visit starting from the entry point (rx, ry) on the rim.

    Returns (outcome, px, py, rx, ry, t, ke_in, ke_out, hits, ledger_err,
    tptr).  ledger_err is |delta KE - lam*(f_exit - f_entry)|, the exact
    step-model energy bookkeeping residual.
    """
    f_in = profile_value(profile, t, ph0, ph1)
    ke_in = 0.5 * (px * px + py * py)
    inx = -rx / q_star
    iny = -ry / q_star
    pn = px * inx + py * iny
    rad = pn * pn - 2.0 * (lam * f_in)
    if rad <= REFLECT_BAND:
        # total reflection off the outside of the rim
        px -= 2.0 * pn * inx
        py -= 2.0 * pn * iny
        ke_out = 0.5 * (px * px + py * py)
        err = abs(ke_out - ke_in)
        return (_VISIT_DONE, px, py, rx, ry, t, ke_in, ke_out, 0, err, tptr)
    dpn = math.sqrt(rad) - pn
    px += dpn * inx
    py += dpn * iny
    hits = 0
    while True:
        p2 = px * px + py * py
        pnorm = math.sqrt(p2)
        ex = px / pnorm
        ey = py / pnorm
        s = -2.0 * (rx * ex + ry * ey)
        t_end = t + s / pnorm
        if t_end > t_max:
            tptr = _sample_segment(t_grid, tptr, t, t_max, bx + rx, by + ry,
                                   px, py, s_qx, s_qy, s_px, s_py)
            dt = t_max - t
            rx += px * dt
            ry += py * dt
            return (_VISIT_TMAX, px, py, rx, ry, t_max, ke_in, 0.5 * p2,
                    hits, 0.0, tptr)
        tptr = _sample_segment(t_grid, tptr, t, t_end, bx + rx, by + ry,
                               px, py, s_qx, s_qy, s_px, s_py)
        rx += s * ex
        ry += s * ey
        rn = math.sqrt(rx * rx + ry * ry)
        sc = q_star / rn
        rx *= sc
        ry *= sc
        t = t_end
        f_out = profile_value(profile, t, ph0, ph1)
        onx = rx / q_star
        ony = ry / q_star
        pn = px * onx + py * ony
        rad = pn * pn + 2.0 * (lam * f_out)
        if rad > REFLECT_BAND:
            dpn = math.sqrt(rad) - pn
            px += dpn * onx
            py += dpn * ony
            ke_out = 0.5 * (px * px + py * py)
            err = abs((ke_out - ke_in) - lam * (f_out - f_in))
            return (_VISIT_DONE, px, py, rx, ry, t, ke_in, ke_out, hits,
                    err, tptr)
        px -= 2.0 * pn * onx
        py -= 2.0 * pn * ony
        hits += 1
        if hits >= TRAP_CAP:
            return (_VISIT_TRAPPED, px, py, rx, ry, t, ke_in,
                    0.5 * (px * px + py * py), hits, 0.0, tptr)


def evolve_hex(lx, ly, ai, aj, px, py, t,
               q_star, horizon,
               lam, profile, phase_mode, ph_g0, ph_g1, phase_seed,
               t_max, max_events,
               t_grid, n_grid, cap_lo, cap_hi,
               s_qx, s_qy, s_px, s_py,
               sn_p2, sn_q2,
               ev_n, ev_t, ev_b, ev_ph0, ev_ph1, ev_i, ev_j,
               ev_dpx, ev_dpy, ev_kein, ev_keout, ev_ex, ev_ey):
    """Event-driven evolution on the 2D hexagonal lattice.

    Position is anchor lattice point (ai, aj) plus local offset (lx, ly).
    Returns (status, n_events, tptr, nptr, ncap, free_sum, free_cnt,
    max_free, max_ledger, max_drift, lx, ly, ai, aj, px, py, t).
    """
    status = STATUS_OK
    nev = 0
    ncap = 0
    tptr = 0
    nptr = 0
    free_sum = 0.0
    free_cnt = 0
    max_free = 0.0
    max_ledger = 0.0
    max_drift = 0.0
    nn = n_grid.shape[0]
    ke0 = 0.5 * (px * px + py * py)
    elastic = profile == PROFILE_CONST
    if lam == 0.0 or profile == PROFILE_ZERO:
        # scatterers are transparent: one free segment
        bx = ai + aj * 0.5
        by = aj * HALF_SQRT3
        tptr = _sample_segment(t_grid, tptr, t, t_max, bx + lx, by + ly,
                               px, py, s_qx, s_qy, s_px, s_py)
        dt = t_max - t
        lx += px * dt
        ly += py * dt
        t = t_max
        return (status, nev, tptr, nptr, ncap, free_sum, free_cnt, max_free,
                max_ledger, max_drift, lx, ly, ai, aj, px, py, t)
    ph0 = ph_g0
    ph1 = ph_g1
    while True:
        p2 = px * px + py * py
        pnorm = math.sqrt(p2)
        if pnorm < SPEED_FLOOR:
            status = STATUS_STALLED
            break
        ex = px / pnorm
        ey = py / pnorm
        dist, di, dj, rx, ry = free_flight_hex(lx, ly, ex, ey, q_star, horizon)
        if dist < 0.0:
            status = STATUS_NO_HIT
            break
        bx = ai + aj * 0.5
        by = aj * HALF_SQRT3
        t_arr = t + dist / pnorm
        if t_arr > t_max:
            tptr = _sample_segment(t_grid, tptr, t, t_max, bx + lx, by + ly,
                                   px, py, s_qx, s_qy, s_px, s_py)
            dt = t_max - t
            lx += px * dt
            ly += py * dt
            t = t_max
            break
        tptr = _sample_segment(t_grid, tptr, t, t_arr, bx + lx, by + ly,
                               px, py, s_qx, s_qy, s_px, s_py)
        t = t_arr
        free_sum += dist
        free_cnt += 1
        if dist > max_free:
            max_free = dist
        ai += di
        aj += dj
        lx = rx
        ly = ry
        nev += 1
        b_sig = ex * ry - ey * rx
        if nptr < nn and nev == n_grid[nptr]:
            bxn = ai + aj * 0.5
            byn = aj * HALF_SQRT3
            uxn = bxn + rx
            uyn = byn + ry
            sn_p2[nptr] = p2
            sn_q2[nptr] = uxn * uxn + uyn * uyn
            nptr += 1
        if phase_mode == PHASE_PER_SCATTERER:
            ph0 = scatterer_phase(phase_seed, ai, aj, 0)
            ph1 = scatterer_phase(phase_seed, ai, aj, 1)
        bx = ai + aj * 0.5
        by = aj * HALF_SQRT3
        px_in = px
        py_in = py
        t_in = t
        (outcome, px, py, lx, ly, t, ke_in, ke_out, hits, err, tptr) = \
            visit_disk(px, py, lx, ly, t, q_star, lam, profile, ph0, ph1,
                       t_max, bx, by, t_grid, tptr, s_qx, s_qy, s_px, s_py)
        if outcome == _VISIT_TRAPPED:
            status = STATUS_TRAPPED
            break
        if outcome == _VISIT_TMAX:
            break
        denom = ke_in if ke_in > ke_out else ke_out
        if denom < 1e-300:
            denom = 1e-300
        rel = err / denom
        if rel > max_ledger:
            max_ledger = rel
        if elastic:
            drift = abs(ke_out - ke0) / ke0
            if drift > max_drift:
                max_drift = drift
        if cap_lo <= nev < cap_hi:
            ev_n[ncap] = nev
            ev_t[ncap] = t_in
            ev_b[ncap] = b_sig
            ev_ph0[ncap] = reduced_phase(t_in, ph0)
            if profile == PROFILE_QUASI:
                ev_ph1[ncap] = reduced_phase2(t_in, ph1)
            else:
                ev_ph1[ncap] = math.nan
            ev_i[ncap] = ai
            ev_j[ncap] = aj
            ev_dpx[ncap] = px - px_in
            ev_dpy[ncap] = py - py_in
            ev_kein[ncap] = ke_in
            ev_keout[ncap] = ke_out
            ev_ex[ncap] = ex
            ev_ey[ncap] = ey
            ncap += 1
        if max_events > 0 and nev >= max_events:
            break
        if t >= t_max:
            break
    return (status, nev, tptr, nptr, ncap, free_sum, free_cnt, max_free,
            max_ledger, max_drift, lx, ly, ai, aj, px, py, t)


def visit_interval(p, x0, t, w, lam, profile, ph0, ph1,
                   t_max, ubase, t_grid, tptr, s_q, s_p):
    """1D analogue of visit_disk: one visit of the support [0, w].

    x0 is the entry edge (0.0 or w).  Returns (outcome, p, x, t, ke_in,
    ke_out, hits, ledger_err, tptr).
    """
    f_in = profile_value(profile, t, ph0, ph1)
    ke_in = 0.5 * p * p
    inward = 1.0 if x0 == 0.0 else -1.0
    pn = p * inward
    rad = pn * pn - 2.0 * (lam * f_in)
    if rad <= REFLECT_BAND:
        p = -p
        return (_VISIT_DONE, p, x0, t, ke_in, 0.5 * p * p, 0,
                abs(0.5 * p * p - ke_in), tptr)
    p = math.sqrt(rad) * inward
    pos = x0
    hits = 0
    while True:
        target = w if p > 0.0 else 0.0
        s = target - pos if p > 0.0 else pos - target
        pabs = p if p > 0.0 else -p
        t_end = t + s / pabs
        if t_end > t_max:
            tptr = _sample_segment_1d(t_grid, tptr, t, t_max, ubase + pos, p,
                                      s_q, s_p)
            pos += p * (t_max - t)
            return (_VISIT_TMAX, p, pos, t_max, ke_in, 0.5 * p * p, hits,
                    0.0, tptr)
        tptr = _sample_segment_1d(t_grid, tptr, t, t_end, ubase + pos, p,
                                  s_q, s_p)
        pos = target
        t = t_end
        f_out = profile_value(profile, t, ph0, ph1)
        rad = p * p + 2.0 * (lam * f_out)
        if rad > REFLECT_BAND:
            p_out = math.sqrt(rad) if p > 0.0 else -math.sqrt(rad)
            ke_out = 0.5 * p_out * p_out
            err = abs((ke_out - ke_in) - lam * (f_out - f_in))
            return (_VISIT_DONE, p_out, pos, t, ke_in, ke_out, hits, err, tptr)
        p = -p
        hits += 1
        if hits >= TRAP_CAP:
            return (_VISIT_TRAPPED, p, pos, t, ke_in, 0.5 * p * p, hits,
                    0.0, tptr)


def evolve_line(m, x, p, t, w, lam, profile, phase_mode, ph_g0, ph_g1,
                phase_seed,
                t_max, max_events, t_grid, n_grid, cap_lo, cap_hi,
                s_q, s_p, sn_p2, sn_q2,
                ev_n, ev_t, ev_ph0, ev_ph1, ev_i,
                ev_dp, ev_kein, ev_keout):
    """Event-driven evolution on the circle of circumference 1.

    The scatterer support is [0, w] in every cell; position is cell index m
    plus local x in [0, 1).  Returns (status, n_events, tptr, nptr, ncap,
    free_sum, free_cnt, max_free, max_ledger, max_drift, m, x, p, t).
    """
    status = STATUS_OK
    nev = 0
    ncap = 0
    tptr = 0
    nptr = 0
    free_sum = 0.0
    free_cnt = 0
    max_free = 0.0
    max_ledger = 0.0
    max_drift = 0.0
    nn = n_grid.shape[0]
    ke0 = 0.5 * p * p
    elastic = profile == PROFILE_CONST
    if lam == 0.0 or profile == PROFILE_ZERO:
        tptr = _sample_segment_1d(t_grid, tptr, t, t_max, m + x, p, s_q, s_p)
        x += p * (t_max - t)
        t = t_max
        return (status, nev, tptr, nptr, ncap, free_sum, free_cnt, max_free,
                max_ledger, max_drift, m, x, p, t)
    ph0 = ph_g0
    ph1 = ph_g1
    while True:
        pabs = p if p > 0.0 else -p
        if pabs < SPEED_FLOOR:
            status = STATUS_STALLED
            break
        if p > 0.0:
            dist = 1.0 - x
            m_ent = m + 1
            edge = 0.0
        elif x == 0.0:
            dist = 1.0 - w
            m_ent = m - 1
            edge = w
        else:
            dist = x - w
            m_ent = m
            edge = w
        t_arr = t + dist / pabs
        if t_arr > t_max:
            tptr = _sample_segment_1d(t_grid, tptr, t, t_max, m + x, p,
                                      s_q, s_p)
            x += p * (t_max - t)
            t = t_max
            break
        tptr = _sample_segment_1d(t_grid, tptr, t, t_arr, m + x, p, s_q, s_p)
        t = t_arr
        free_sum += dist
        free_cnt += 1
        if dist > max_free:
            max_free = dist
        m = m_ent
        x = edge
        nev += 1
        if nptr < nn and nev == n_grid[nptr]:
            u = m + x
            sn_p2[nptr] = p * p
            sn_q2[nptr] = u * u
            nptr += 1
        if phase_mode == PHASE_PER_SCATTERER:
            ph0 = scatterer_phase(phase_seed, m, 0, 0)
            ph1 = scatterer_phase(phase_seed, m, 0, 1)
        p_in = p
        t_in = t
        (outcome, p, x, t, ke_in, ke_out, hits, err, tptr) = \
            visit_interval(p, x, t, w, lam, profile, ph0, ph1,
                           t_max, float(m), t_grid, tptr, s_q, s_p)
        if outcome == _VISIT_TRAPPED:
            status = STATUS_TRAPPED
            break
        if outcome == _VISIT_TMAX:
            break
        denom = ke_in if ke_in > ke_out else ke_out
        if denom < 1e-300:
            denom = 1e-300
        rel = err / denom
        if rel > max_ledger:
            max_ledger = rel
        if elastic:
            drift = abs(ke_out - ke0) / ke0
            if drift > max_drift:
                max_drift = drift
        if cap_lo <= nev < cap_hi:
            ev_n[ncap] = nev
            ev_t[ncap] = t_in
            ev_ph0[ncap] = reduced_phase(t_in, ph0)
            if profile == PROFILE_QUASI:
                ev_ph1[ncap] = reduced_phase2(t_in, ph1)
            else:
                ev_ph1[ncap] = math.nan
            ev_i[ncap] = m
            ev_dp[ncap] = p - p_in
            ev_kein[ncap] = ke_in
            ev_keout[ncap] = ke_out
            ncap += 1
        if max_events > 0 and nev >= max_events:
            break
        if t >= t_max:
            break
    return (status, nev, tptr, nptr, ncap, free_sum, free_cnt, max_free,
            max_ledger, max_drift, m, x, p, t)


def kicked_1d(q, p, lam, n_kicks, k_grid, s_q, s_p):
    """Iterate the 1D kick map p' = p - lam*grad v(q), q' = q + p'.

    v(q) = cos q; q is kept unfolded, the force uses the reduced copy.
    k_grid holds the kick counts (ascending, may start at 0) at which
    (q, p) are sampled.
    """
    nk = k_grid.shape[0]
    kptr = 0
    while kptr < nk and k_grid[kptr] <= 0:
        s_q[kptr] = q
        s_p[kptr] = p
        kptr += 1
    qr = math.fmod(q, TWO_PI)
    if qr < 0.0:
        qr += TWO_PI
    for k in range(1, n_kicks + 1):
        p = p + lam * math.sin(qr)
        q = q + p
        qr = math.fmod(qr + p, TWO_PI)
        if qr < 0.0:
            qr += TWO_PI
        if kptr < nk and k == k_grid[kptr]:
            s_q[kptr] = q
            s_p[kptr] = p
            kptr += 1
    return (q, p, kptr)


def kicked_2d(qx, qy, px, py, lam, n_kicks, k_grid, s_qx, s_qy, s_px, s_py):
    """2D kick map with v(q) = cos(q1) cos(q2)."""
    nk = k_grid.shape[0]
    kptr = 0
    while kptr < nk and k_grid[kptr] <= 0:
        s_qx[kptr] = qx
        s_qy[kptr] = qy
        s_px[kptr] = px
        s_py[kptr] = py
        kptr += 1
    qxr = math.fmod(qx, TWO_PI)
    if qxr < 0.0:
        qxr += TWO_PI
    qyr = math.fmod(qy, TWO_PI)
    if qyr < 0.0:
        qyr += TWO_PI
    for k in range(1, n_kicks + 1):
        px = px + lam * (math.sin(qxr) * math.cos(qyr))
        py = py + lam * (math.cos(qxr) * math.sin(qyr))
        qx = qx + px
        qy = qy + py
        qxr = math.fmod(qxr + px, TWO_PI)
        if qxr < 0.0:
            qxr += TWO_PI
        qyr = math.fmod(qyr + py, TWO_PI)
        if qyr < 0.0:
            qyr += TWO_PI
        if kptr < nk and k == k_grid[kptr]:
            s_qx[kptr] = qx
            s_qy[kptr] = qy
            s_px[kptr] = px
            s_py[kptr] = py
            kptr += 1
    return (qx, qy, px, py, kptr)


def visit_lone(px, py, b, t0, q_star, lam, profile, ph0, ph1,
               t_grid, s_qx, s_qy, s_px, s_py):
    """Single visit of a lone disk at the origin, entry set by (p, b).

    The phase offsets apply from the conventional start point half a unit
    ahead of the center.  Returns (outcome, px, py, t_entry, t_exit, ke_in,
    ke_out, hits, ledger_err); a grazing b returns the state unchanged with
    outcome _VISIT_DONE and zero transfer.
    """
    disc = q_star * q_star - b * b
    if disc < GRAZE_DISC:
        ke = 0.5 * (px * px + py * py)
        return (_VISIT_DONE, px, py, t0, t0, ke, ke, 0, 0.0)
    half = math.sqrt(disc)
    pnorm = math.sqrt(px * px + py * py)
    ex = px / pnorm
    ey = py / pnorm
    t_entry = t0 + (0.5 - half) / pnorm
    rx = -b * ey - half * ex
    ry = b * ex - half * ey
    (outcome, opx, opy, orx, ory, t_exit, ke_in, ke_out, hits, err, _tp) = \
        visit_disk(px, py, rx, ry, t_entry, q_star, lam, profile, ph0, ph1,
                   math.inf, 0.0, 0.0, t_grid, 0, s_qx, s_qy, s_px, s_py)
    return (outcome, opx, opy, t_entry, t_exit, ke_in, ke_out, hits, err)


def rw_chain(px, py, q_star, lam, profile, eta_star, p_floor,
             b_draws, ph0_draws, ph1_draws, n_grid,
             s_p1, s_p2, s_p3, s_t, s_q2,
             empty_grid, e0, e1, e2, e3):
    """Surrogate Markov chain: one scatterer transfer per step.

    Per step n: p += R(p, b_n, phi_n) via the exact step-model transfer,
    t += eta_star/|p'|, q += eta_star*e'.  Samples the |p| moments, t and
    |q|^2 at the ordinals in n_grid.  Returns (status, steps_done, nptr).
    """
    t = 0.0
    qx = 0.0
    qy = 0.0
    n_steps = b_draws.shape[0]
    nn = n_grid.shape[0]
    nptr = 0
    n_done = 0
    status = STATUS_OK
    for n in range(1, n_steps + 1):
        (outcome, px, py, _te, _tx, _ki, _ko, _h, _err) = \
            visit_lone(px, py, b_draws[n - 1], 0.0, q_star, lam, profile,
                       ph0_draws[n - 1], ph1_draws[n - 1],
                       empty_grid, e0, e1, e2, e3)
        if outcome == _VISIT_TRAPPED:
            status = STATUS_TRAPPED
            break
        pnorm = math.sqrt(px * px + py * py)
        if pnorm < p_floor:
            status = STATUS_DEGENERATE
            break
        t += eta_star / pnorm
        qx += eta_star * px / pnorm
        qy += eta_star * py / pnorm
        n_done = n
        if nptr < nn and n == n_grid[nptr]:
            p2 = px * px + py * py
            s_p1[nptr] = pnorm
            s_p2[nptr] = p2
            s_p3[nptr] = p2 * pnorm
            s_t[nptr] = t
            s_q2[nptr] = qx * qx + qy * qy
            nptr += 1
    return (status, n_done, nptr)
