# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event-loop core.

Statement-for-statement mirror of ``softlorentz._kernels._pure``; compiled
with -ffp-contract=off so both backends produce bit-identical trajectories.
Any change here must be mirrored in the pure module.
"""

from libc.math cimport INFINITY, NAN, cos, fabs, floor, fmod, sin, sqrt
from libc.stdint cimport int64_t, uint64_t

cdef double TWO_PI_C = 6.283185307179586
cdef double SQRT2_C = sqrt(2.0)
cdef double SQRT3_C = sqrt(3.0)
cdef double INV_SQRT3_C = 1.0 / SQRT3_C
cdef double TWO_INV_SQRT3_C = 2.0 / SQRT3_C
cdef double HALF_SQRT3_C = SQRT3_C / 2.0
cdef double INV_2_53 = 1.1102230246251565e-16   # 2^-53

TWO_PI = TWO_PI_C
SQRT2 = SQRT2_C
SQRT3 = SQRT3_C
INV_SQRT3 = INV_SQRT3_C
TWO_INV_SQRT3 = TWO_INV_SQRT3_C
HALF_SQRT3 = HALF_SQRT3_C

PROFILE_ZERO = 0
PROFILE_CONST = 1
PROFILE_COS = 2
PROFILE_QUASI = 3
PHASE_GLOBAL = 0
PHASE_PER_SCATTERER = 1
STATUS_OK = 0
STATUS_STALLED = 1
STATUS_TRAPPED = 2
STATUS_NO_HIT = 3
STATUS_DEGENERATE = 4

_VISIT_DONE = 0
_VISIT_TMAX = 1
_VISIT_TRAPPED = 2

GRAZE_DISC = 1e-12
MIN_ENTRY = 1e-12
REFLECT_BAND = 1e-24
SPEED_FLOOR = 1e-9
TRAP_CAP = 1000000

cdef double C_GRAZE = 1e-12
cdef double C_MIN_ENTRY = 1e-12
cdef double C_REFLECT = 1e-24
cdef double C_SPEED_FLOOR = 1e-9
cdef int64_t C_TRAP_CAP = 1000000

cdef int C_PROFILE_ZERO = 0
cdef int C_PROFILE_CONST = 1
cdef int C_PROFILE_COS = 2
cdef int C_PROFILE_QUASI = 3
cdef int C_PHASE_PER = 1


cdef inline uint64_t c_mix64(uint64_t z) nogil:
    z = z + <uint64_t>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double c_scatterer_phase(uint64_t seed, int64_t i, int64_t j,
                                     uint64_t comp) nogil:
    cdef uint64_t h = c_mix64(seed ^ c_mix64((<uint64_t>i) ^
                                             c_mix64((<uint64_t>j) ^ comp)))
    return TWO_PI_C * ((h >> 11) * INV_2_53)


cdef inline double c_profile_value(int profile, double t, double ph0,
                                   double ph1) nogil:
    if profile == C_PROFILE_COS:
        return cos(t + ph0)
    if profile == C_PROFILE_QUASI:
        return cos(t + ph0) + cos(SQRT2_C * t + ph1)
    if profile == C_PROFILE_CONST:
        return 1.0
    return 0.0


cdef inline double c_reduced_phase(double t, double ph) nogil:
    cdef double th = fmod(t + ph, TWO_PI_C)
    if th < 0.0:
        th += TWO_PI_C
    return th


cdef inline double c_reduced_phase2(double t, double ph) nogil:
    cdef double th = fmod(SQRT2_C * t + ph, TWO_PI_C)
    if th < 0.0:
        th += TWO_PI_C
    return th


def mix64(z):
    return int(c_mix64(<uint64_t>(z & 0xFFFFFFFFFFFFFFFF)))


def scatterer_phase(seed, i, j, comp):
    return c_scatterer_phase(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                             <int64_t>i, <int64_t>j, <uint64_t>comp)


def profile_value(profile, t, ph0, ph1):
    return c_profile_value(<int>profile, <double>t, <double>ph0, <double>ph1)


def reduced_phase(t, ph):
    return c_reduced_phase(<double>t, <double>ph)


def reduced_phase2(t, ph):
    return c_reduced_phase2(<double>t, <double>ph)


cdef inline int64_t c_sample_segment(const double[::1] t_grid, int64_t tptr,
                                     double t_a, double t_b,
                                     double ux, double uy,
                                     double vx, double vy,
                                     double[::1] s_qx, double[::1] s_qy,
                                     double[::1] s_px, double[::1] s_py) nogil:
    cdef int64_t nt = t_grid.shape[0]
    cdef double dt
    while tptr < nt and t_grid[tptr] <= t_b:
        dt = t_grid[tptr] - t_a
        s_qx[tptr] = ux + vx * dt
        s_qy[tptr] = uy + vy * dt
        s_px[tptr] = vx
        s_py[tptr] = vy
        tptr += 1
    return tptr


cdef inline int64_t c_sample_segment_1d(const double[::1] t_grid,
                                        int64_t tptr, double t_a, double t_b,
                                        double u, double v,
                                        double[::1] s_q,
                                        double[::1] s_p) nogil:
    cdef int64_t nt = t_grid.shape[0]
    while tptr < nt and t_grid[tptr] <= t_b:
        s_q[tptr] = u + v * (t_grid[tptr] - t_a)
        s_p[tptr] = v
        tptr += 1
    return tptr


cdef struct FlightHit:
    double dist
    int64_t di
    int64_t dj
    double rx
    double ry


cdef void c_free_flight_hex(double lx, double ly, double ex, double ey,
                            double q_star, double bound,
                            FlightHit* out) nogil:
    cdef double qs2 = q_star * q_star
    cdef double fa = lx - ly * INV_SQRT3_C
    cdef double fb = ly * TWO_INV_SQRT3_C
    cdef double va = ex - ey * INV_SQRT3_C
    cdef double vb = ey * TWO_INV_SQRT3_C
    cdef double ca = floor(fa)
    cdef double cb = floor(fb)
    cdef double ta, tb, dta, dtb
    cdef int64_t da_step, db_step
    if va > 0.0:
        ta = (ca + 1.0 - fa) / va
        da_step = 1
        dta = 1.0 / va
    elif va < 0.0:
        ta = (ca - fa) / va
        da_step = -1
        dta = -1.0 / va
    else:
        ta = INFINITY
        da_step = 0
        dta = INFINITY
    if vb > 0.0:
        tb = (cb + 1.0 - fb) / vb
        db_step = 1
        dtb = 1.0 / vb
    elif vb < 0.0:
        tb = (cb - fb) / vb
        db_step = -1
        dtb = -1.0 / vb
    else:
        tb = INFINITY
        db_step = 0
        dtb = INFINITY
    cdef int64_t ia = <int64_t>ca
    cdef int64_t ib = <int64_t>cb
    cdef double best = INFINITY
    cdef int64_t bi = 0
    cdef int64_t bj = 0
    cdef int64_t mi, mj
    cdef int da, db
    cdef double cx, cy, base, rx0, ry0, bdot, cval, disc, s, cell_exit
    cdef double rx, ry, rn, sc
    while True:
        for db in range(-1, 2):
            mj = ib + db
            cy = mj * HALF_SQRT3_C
            base = mj * 0.5
            for da in range(-1, 2):
                mi = ia + da
                cx = mi + base
                rx0 = lx - cx
                ry0 = ly - cy
                bdot = rx0 * ex + ry0 * ey
                cval = rx0 * rx0 + ry0 * ry0 - qs2
                disc = bdot * bdot - cval
                if disc < C_GRAZE:
                    continue
                s = -bdot - sqrt(disc)
                if s > C_MIN_ENTRY and s < best:
                    best = s
                    bi = mi
                    bj = mj
        cell_exit = ta if ta <= tb else tb
        if best <= cell_exit:
            break
        if cell_exit > bound:
            out.dist = -1.0
            out.di = 0
            out.dj = 0
            out.rx = 0.0
            out.ry = 0.0
            return
        if ta <= tb:
            ia += da_step
            ta += dta
        else:
            ib += db_step
            tb += dtb
    cx = bi + bj * 0.5
    cy = bj * HALF_SQRT3_C
    rx = (lx - cx) + best * ex
    ry = (ly - cy) + best * ey
    rn = sqrt(rx * rx + ry * ry)
    sc = q_star / rn
    out.dist = best
    out.di = bi
    out.dj = bj
    out.rx = rx * sc
    out.ry = ry * sc


def free_flight_hex(lx, ly, ex, ey, q_star, bound):
    cdef FlightHit hit
    c_free_flight_hex(<double>lx, <double>ly, <double>ex, <double>ey,
                      <double>q_star, <double>bound, &hit)
    return (hit.dist, int(hit.di), int(hit.dj), hit.rx, hit.ry)


cdef struct VisitOut:
    int outcome
    double px
    double py
    double rx
    double ry
    double t
    double ke_in
    double ke_out
    int64_t hits
    double err
    int64_t tptr


cdef void c_visit_disk(double px, double py, double rx, double ry, double t,
                       double q_star, double lam, int profile,
                       double ph0, double ph1,
                       double t_max, double bx, double by,
                       const double[::1] t_grid, int64_t tptr,
                       double[::1] s_qx, double[::1] s_qy,
                       double[::1] s_px, double[::1] s_py,
                       VisitOut* out) nogil:
    cdef double f_in = c_profile_value(profile, t, ph0, ph1)
    cdef double ke_in = 0.5 * (px * px + py * py)
    cdef double inx = -rx / q_star
    cdef double iny = -ry / q_star
    cdef double pn = px * inx + py * iny
    cdef double rad = pn * pn - 2.0 * (lam * f_in)
    cdef double dpn, ke_out, p2, pnorm, ex, ey, s, t_end, rn, sc, dt
    cdef double f_out, onx, ony
    cdef int64_t hits
    if rad <= C_REFLECT:
        px -= 2.0 * pn * inx
        py -= 2.0 * pn * iny
        ke_out = 0.5 * (px * px + py * py)
        out.outcome = 0
        out.px = px
        out.py = py
        out.rx = rx
        out.ry = ry
        out.t = t
        out.ke_in = ke_in
        out.ke_out = ke_out
        out.hits = 0
        out.err = fabs(ke_out - ke_in)
        out.tptr = tptr
        return
    dpn = sqrt(rad) - pn
    px += dpn * inx
    py += dpn * iny
    hits = 0
    while True:
        p2 = px * px + py * py
        pnorm = sqrt(p2)
        ex = px / pnorm
        ey = py / pnorm
        s = -2.0 * (rx * ex + ry * ey)
        t_end = t + s / pnorm
        if t_end > t_max:
            tptr = c_sample_segment(t_grid, tptr, t, t_max, bx + rx, by + ry,
                                    px, py, s_qx, s_qy, s_px, s_py)
            dt = t_max - t
            rx += px * dt
            ry += py * dt
            out.outcome = 1
            out.px = px
            out.py = py
            out.rx = rx
            out.ry = ry
            out.t = t_max
            out.ke_in = ke_in
            out.ke_out = 0.5 * p2
            out.hits = hits
            out.err = 0.0
            out.tptr = tptr
            return
        tptr = c_sample_segment(t_grid, tptr, t, t_end, bx + rx, by + ry,
                                px, py, s_qx, s_qy, s_px, s_py)
        rx += s * ex
        ry += s * ey
        rn = sqrt(rx * rx + ry * ry)
        sc = q_star / rn
        rx *= sc
        ry *= sc
        t = t_end
        f_out = c_profile_value(profile, t, ph0, ph1)
        onx = rx / q_star
        ony = ry / q_star
        pn = px * onx + py * ony
        rad = pn * pn + 2.0 * (lam * f_out)
        if rad > C_REFLECT:
            dpn = sqrt(rad) - pn
            px += dpn * onx
            py += dpn * ony
            ke_out = 0.5 * (px * px + py * py)
            out.outcome = 0
            out.px = px
            out.py = py
            out.rx = rx
            out.ry = ry
            out.t = t
            out.ke_in = ke_in
            out.ke_out = ke_out
            out.hits = hits
            out.err = fabs((ke_out - ke_in) - lam * (f_out - f_in))
            out.tptr = tptr
            return
        px -= 2.0 * pn * onx
        py -= 2.0 * pn * ony
        hits += 1
        if hits >= C_TRAP_CAP:
            out.outcome = 2
            out.px = px
            out.py = py
            out.rx = rx
            out.ry = ry
            out.t = t
            out.ke_in = ke_in
            out.ke_out = 0.5 * (px * px + py * py)
            out.hits = hits
            out.err = 0.0
            out.tptr = tptr
            return


def visit_disk(px, py, rx, ry, t, q_star, lam, profile, ph0, ph1,
               t_max, bx, by, const double[::1] t_grid, tptr,
               double[::1] s_qx, double[::1] s_qy,
               double[::1] s_px, double[::1] s_py):
    cdef VisitOut out
    c_visit_disk(<double>px, <double>py, <double>rx, <double>ry, <double>t,
                 <double>q_star, <double>lam, <int>profile,
                 <double>ph0, <double>ph1, <double>t_max,
                 <double>bx, <double>by, t_grid, <int64_t>tptr,
                 s_qx, s_qy, s_px, s_py, &out)
    return (out.outcome, out.px, out.py, out.rx, out.ry, out.t,
            out.ke_in, out.ke_out, int(out.hits), out.err, int(out.tptr))


cdef struct EvolveOut:
    int status
    int64_t nev
    int64_t tptr
    int64_t nptr
    int64_t ncap
    double free_sum
    int64_t free_cnt
    double max_free
    double max_ledger
    double max_drift
    double lx
    double ly
    int64_t ai
    int64_t aj
    double px
    double py
    double t


cdef void c_evolve_hex(double lx, double ly, int64_t ai, int64_t aj,
                       double px, double py, double t,
                       double q_star, double horizon,
                       double lam, int profile, int phase_mode,
                       double ph_g0, double ph_g1, uint64_t phase_seed,
                       double t_max, int64_t max_events,
                       const double[::1] t_grid, const long[::1] n_grid,
                       int64_t cap_lo, int64_t cap_hi,
                       double[::1] s_qx, double[::1] s_qy,
                       double[::1] s_px, double[::1] s_py,
                       double[::1] sn_p2, double[::1] sn_q2,
                       long[::1] ev_n, double[::1] ev_t, double[::1] ev_b,
                       double[::1] ev_ph0, double[::1] ev_ph1,
                       long[::1] ev_i, long[::1] ev_j,
                       double[::1] ev_dpx, double[::1] ev_dpy,
                       double[::1] ev_kein, double[::1] ev_keout,
                       double[::1] ev_ex, double[::1] ev_ey,
                       EvolveOut* o) nogil:
    cdef int status = 0
    cdef int64_t nev = 0
    cdef int64_t ncap = 0
    cdef int64_t tptr = 0
    cdef int64_t nptr = 0
    cdef double free_sum = 0.0
    cdef int64_t free_cnt = 0
    cdef double max_free = 0.0
    cdef double max_ledger = 0.0
    cdef double max_drift = 0.0
    cdef int64_t nn = n_grid.shape[0]
    cdef double ke0 = 0.5 * (px * px + py * py)
    cdef bint elastic = profile == C_PROFILE_CONST
    cdef double bx, by, dt, p2, pnorm, ex, ey, t_arr, b_sig
    cdef double bxn, byn, uxn, uyn, ph0, ph1, px_in, py_in, t_in
    cdef double denom, rel, drift
    cdef FlightHit hit
    cdef VisitOut v
    if lam == 0.0 or profile == C_PROFILE_ZERO:
        bx = ai + aj * 0.5
        by = aj * HALF_SQRT3_C
        tptr = c_sample_segment(t_grid, tptr, t, t_max, bx + lx, by + ly,
                                px, py, s_qx, s_qy, s_px, s_py)
        dt = t_max - t
        lx += px * dt
        ly += py * dt
        t = t_max
        o.status = status; o.nev = nev; o.tptr = tptr; o.nptr = nptr
        o.ncap = ncap; o.free_sum = free_sum; o.free_cnt = free_cnt
        o.max_free = max_free; o.max_ledger = max_ledger
        o.max_drift = max_drift
        o.lx = lx; o.ly = ly; o.ai = ai; o.aj = aj
        o.px = px; o.py = py; o.t = t
        return
    ph0 = ph_g0
    ph1 = ph_g1
    while True:
        p2 = px * px + py * py
        pnorm = sqrt(p2)
        if pnorm < C_SPEED_FLOOR:
            status = 1
            break
        ex = px / pnorm
        ey = py / pnorm
        c_free_flight_hex(lx, ly, ex, ey, q_star, horizon, &hit)
        if hit.dist < 0.0:
            status = 3
            break
        bx = ai + aj * 0.5
        by = aj * HALF_SQRT3_C
        t_arr = t + hit.dist / pnorm
        if t_arr > t_max:
            tptr = c_sample_segment(t_grid, tptr, t, t_max, bx + lx, by + ly,
                                    px, py, s_qx, s_qy, s_px, s_py)
            dt = t_max - t
            lx += px * dt
            ly += py * dt
            t = t_max
            break
        tptr = c_sample_segment(t_grid, tptr, t, t_arr, bx + lx, by + ly,
                                px, py, s_qx, s_qy, s_px, s_py)
        t = t_arr
        free_sum += hit.dist
        free_cnt += 1
        if hit.dist > max_free:
            max_free = hit.dist
        ai += hit.di
        aj += hit.dj
        lx = hit.rx
        ly = hit.ry
        nev += 1
        b_sig = ex * ly - ey * lx
        if nptr < nn and nev == n_grid[nptr]:
            bxn = ai + aj * 0.5
            byn = aj * HALF_SQRT3_C
            uxn = bxn + lx
            uyn = byn + ly
            sn_p2[nptr] = p2
            sn_q2[nptr] = uxn * uxn + uyn * uyn
            nptr += 1
        if phase_mode == C_PHASE_PER:
            ph0 = c_scatterer_phase(phase_seed, ai, aj, 0)
            ph1 = c_scatterer_phase(phase_seed, ai, aj, 1)
        bx = ai + aj * 0.5
        by = aj * HALF_SQRT3_C
        px_in = px
        py_in = py
        t_in = t
        c_visit_disk(px, py, lx, ly, t, q_star, lam, profile, ph0, ph1,
                     t_max, bx, by, t_grid, tptr, s_qx, s_qy, s_px, s_py, &v)
        px = v.px; py = v.py; lx = v.rx; ly = v.ry; t = v.t; tptr = v.tptr
        if v.outcome == 2:
            status = 2
            break
        if v.outcome == 1:
            break
        denom = v.ke_in if v.ke_in > v.ke_out else v.ke_out
        if denom < 1e-300:
            denom = 1e-300
        rel = v.err / denom
        if rel > max_ledger:
            max_ledger = rel
        if elastic:
            drift = fabs(v.ke_out - ke0) / ke0
            if drift > max_drift:
                max_drift = drift
        if cap_lo <= nev and nev < cap_hi:
            ev_n[ncap] = nev
            ev_t[ncap] = t_in
            ev_b[ncap] = b_sig
            ev_ph0[ncap] = c_reduced_phase(t_in, ph0)
            if profile == C_PROFILE_QUASI:
                ev_ph1[ncap] = c_reduced_phase2(t_in, ph1)
            else:
                ev_ph1[ncap] = NAN
            ev_i[ncap] = ai
            ev_j[ncap] = aj
            ev_dpx[ncap] = px - px_in
            ev_dpy[ncap] = py - py_in
            ev_kein[ncap] = v.ke_in
            ev_keout[ncap] = v.ke_out
            ev_ex[ncap] = ex
            ev_ey[ncap] = ey
            ncap += 1
        if max_events > 0 and nev >= max_events:
            break
        if t >= t_max:
            break
    o.status = status; o.nev = nev; o.tptr = tptr; o.nptr = nptr
    o.ncap = ncap; o.free_sum = free_sum; o.free_cnt = free_cnt
    o.max_free = max_free; o.max_ledger = max_ledger; o.max_drift = max_drift
    o.lx = lx; o.ly = ly; o.ai = ai; o.aj = aj
    o.px = px; o.py = py; o.t = t


def evolve_hex(lx, ly, ai, aj, px, py, t,
               q_star, horizon,
               lam, profile, phase_mode, ph_g0, ph_g1, phase_seed,
               t_max, max_events,
               const double[::1] t_grid, const long[::1] n_grid,
               cap_lo, cap_hi,
               double[::1] s_qx, double[::1] s_qy,
               double[::1] s_px, double[::1] s_py,
               double[::1] sn_p2, double[::1] sn_q2,
               long[::1] ev_n, double[::1] ev_t, double[::1] ev_b,
               double[::1] ev_ph0, double[::1] ev_ph1,
               long[::1] ev_i, long[::1] ev_j,
               double[::1] ev_dpx, double[::1] ev_dpy,
               double[::1] ev_kein, double[::1] ev_keout,
               double[::1] ev_ex, double[::1] ev_ey):
    cdef EvolveOut o
    cdef double c_lx = lx, c_ly = ly, c_px = px, c_py = py, c_t = t
    cdef int64_t c_ai = ai, c_aj = aj
    cdef double c_qs = q_star, c_hz = horizon, c_lam = lam
    cdef int c_prof = profile, c_pm = phase_mode
    cdef double c_p0 = ph_g0, c_p1 = ph_g1
    cdef uint64_t c_seed = <uint64_t>(phase_seed & 0xFFFFFFFFFFFFFFFF)
    cdef double c_tmax = t_max
    cdef int64_t c_maxev = max_events, c_lo = cap_lo, c_hi = cap_hi
    with nogil:
        c_evolve_hex(c_lx, c_ly, c_ai, c_aj, c_px, c_py, c_t,
                     c_qs, c_hz, c_lam, c_prof, c_pm, c_p0, c_p1, c_seed,
                     c_tmax, c_maxev, t_grid, n_grid, c_lo, c_hi,
                     s_qx, s_qy, s_px, s_py, sn_p2, sn_q2,
                     ev_n, ev_t, ev_b, ev_ph0, ev_ph1, ev_i, ev_j,
                     ev_dpx, ev_dpy, ev_kein, ev_keout, ev_ex, ev_ey, &o)
    return (o.status, int(o.nev), int(o.tptr), int(o.nptr), int(o.ncap),
            o.free_sum, int(o.free_cnt), o.max_free, o.max_ledger,
            o.max_drift, o.lx, o.ly, int(o.ai), int(o.aj), o.px, o.py, o.t)


cdef struct Visit1dOut:
    int outcome
    double p
    double x
    double t
    double ke_in
    double ke_out
    int64_t hits
    double err
    int64_t tptr


cdef void c_visit_interval(double p, double x0, double t, double w,
                           double lam, int profile, double ph0, double ph1,
                           double t_max, double ubase,
                           const double[::1] t_grid, int64_t tptr,
                           double[::1] s_q, double[::1] s_p,
                           Visit1dOut* out) nogil:
    cdef double f_in = c_profile_value(profile, t, ph0, ph1)
    cdef double ke_in = 0.5 * p * p
    cdef double inward = 1.0 if x0 == 0.0 else -1.0
    cdef double pn = p * inward
    cdef double rad = pn * pn - 2.0 * (lam * f_in)
    cdef double pos, target, s, pabs, t_end, f_out, p_out, ke_out
    cdef int64_t hits
    if rad <= C_REFLECT:
        p = -p
        out.outcome = 0
        out.p = p
        out.x = x0
        out.t = t
        out.ke_in = ke_in
        out.ke_out = 0.5 * p * p
        out.hits = 0
        out.err = fabs(0.5 * p * p - ke_in)
        out.tptr = tptr
        return
    p = sqrt(rad) * inward
    pos = x0
    hits = 0
    while True:
        target = w if p > 0.0 else 0.0
        s = target - pos if p > 0.0 else pos - target
        pabs = p if p > 0.0 else -p
        t_end = t + s / pabs
        if t_end > t_max:
            tptr = c_sample_segment_1d(t_grid, tptr, t, t_max, ubase + pos, p,
                                       s_q, s_p)
            pos += p * (t_max - t)
            out.outcome = 1
            out.p = p
            out.x = pos
            out.t = t_max
            out.ke_in = ke_in
            out.ke_out = 0.5 * p * p
            out.hits = hits
            out.err = 0.0
            out.tptr = tptr
            return
        tptr = c_sample_segment_1d(t_grid, tptr, t, t_end, ubase + pos, p,
                                   s_q, s_p)
        pos = target
        t = t_end
        f_out = c_profile_value(profile, t, ph0, ph1)
        rad = p * p + 2.0 * (lam * f_out)
        if rad > C_REFLECT:
            p_out = sqrt(rad) if p > 0.0 else -sqrt(rad)
            ke_out = 0.5 * p_out * p_out
            out.outcome = 0
            out.p = p_out
            out.x = pos
            out.t = t
            out.ke_in = ke_in
            out.ke_out = ke_out
            out.hits = hits
            out.err = fabs((ke_out - ke_in) - lam * (f_out - f_in))
            out.tptr = tptr
            return
        p = -p
        hits += 1
        if hits >= C_TRAP_CAP:
            out.outcome = 2
            out.p = p
            out.x = pos
            out.t = t
            out.ke_in = ke_in
            out.ke_out = 0.5 * p * p
            out.hits = hits
            out.err = 0.0
            out.tptr = tptr
            return


def visit_interval(p, x0, t, w, lam, profile, ph0, ph1,
                   t_max, ubase, const double[::1] t_grid, tptr,
                   double[::1] s_q, double[::1] s_p):
    cdef Visit1dOut out
    c_visit_interval(<double>p, <double>x0, <double>t, <double>w,
                     <double>lam, <int>profile, <double>ph0, <double>ph1,
                     <double>t_max, <double>ubase, t_grid, <int64_t>tptr,
                     s_q, s_p, &out)
    return (out.outcome, out.p, out.x, out.t, out.ke_in, out.ke_out,
            int(out.hits), out.err, int(out.tptr))


cdef struct Evolve1dOut:
    int status
    int64_t nev
    int64_t tptr
    int64_t nptr
    int64_t ncap
    double free_sum
    int64_t free_cnt
    double max_free
    double max_ledger
    double max_drift
    int64_t m
    double x
    double p
    double t


cdef void c_evolve_line(int64_t m, double x, double p, double t, double w,
                        double lam, int profile, int phase_mode,
                        double ph_g0, double ph_g1, uint64_t phase_seed,
                        double t_max, int64_t max_events,
                        const double[::1] t_grid, const long[::1] n_grid,
                        int64_t cap_lo, int64_t cap_hi,
                        double[::1] s_q, double[::1] s_p,
                        double[::1] sn_p2, double[::1] sn_q2,
                        long[::1] ev_n, double[::1] ev_t,
                        double[::1] ev_ph0, double[::1] ev_ph1,
                        long[::1] ev_i, double[::1] ev_dp,
                        double[::1] ev_kein, double[::1] ev_keout,
                        Evolve1dOut* o) nogil:
    cdef int status = 0
    cdef int64_t nev = 0
    cdef int64_t ncap = 0
    cdef int64_t tptr = 0
    cdef int64_t nptr = 0
    cdef double free_sum = 0.0
    cdef int64_t free_cnt = 0
    cdef double max_free = 0.0
    cdef double max_ledger = 0.0
    cdef double max_drift = 0.0
    cdef int64_t nn = n_grid.shape[0]
    cdef double ke0 = 0.5 * p * p
    cdef bint elastic = profile == C_PROFILE_CONST
    cdef double ph0, ph1, pabs, dist, edge, t_arr, u, p_in, t_in
    cdef double denom, rel, drift
    cdef int64_t m_ent
    cdef Visit1dOut v
    if lam == 0.0 or profile == C_PROFILE_ZERO:
        tptr = c_sample_segment_1d(t_grid, tptr, t, t_max, m + x, p, s_q, s_p)
        x += p * (t_max - t)
        t = t_max
        o.status = status; o.nev = nev; o.tptr = tptr; o.nptr = nptr
        o.ncap = ncap; o.free_sum = free_sum; o.free_cnt = free_cnt
        o.max_free = max_free; o.max_ledger = max_ledger
        o.max_drift = max_drift
        o.m = m; o.x = x; o.p = p; o.t = t
        return
    ph0 = ph_g0
    ph1 = ph_g1
    while True:
        pabs = p if p > 0.0 else -p
        if pabs < C_SPEED_FLOOR:
            status = 1
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
            tptr = c_sample_segment_1d(t_grid, tptr, t, t_max, m + x, p,
                                       s_q, s_p)
            x += p * (t_max - t)
            t = t_max
            break
        tptr = c_sample_segment_1d(t_grid, tptr, t, t_arr, m + x, p, s_q, s_p)
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
        if phase_mode == C_PHASE_PER:
            ph0 = c_scatterer_phase(phase_seed, m, 0, 0)
            ph1 = c_scatterer_phase(phase_seed, m, 0, 1)
        p_in = p
        t_in = t
        c_visit_interval(p, x, t, w, lam, profile, ph0, ph1, t_max,
                         <double>m, t_grid, tptr, s_q, s_p, &v)
        p = v.p; x = v.x; t = v.t; tptr = v.tptr
        if v.outcome == 2:
            status = 2
            break
        if v.outcome == 1:
            break
        denom = v.ke_in if v.ke_in > v.ke_out else v.ke_out
        if denom < 1e-300:
            denom = 1e-300
        rel = v.err / denom
        if rel > max_ledger:
            max_ledger = rel
        if elastic:
            drift = fabs(v.ke_out - ke0) / ke0
            if drift > max_drift:
                max_drift = drift
        if cap_lo <= nev and nev < cap_hi:
            ev_n[ncap] = nev
            ev_t[ncap] = t_in
            ev_ph0[ncap] = c_reduced_phase(t_in, ph0)
            if profile == C_PROFILE_QUASI:
                ev_ph1[ncap] = c_reduced_phase2(t_in, ph1)
            else:
                ev_ph1[ncap] = NAN
            ev_i[ncap] = m
            ev_dp[ncap] = p - p_in
            ev_kein[ncap] = v.ke_in
            ev_keout[ncap] = v.ke_out
            ncap += 1
        if max_events > 0 and nev >= max_events:
            break
        if t >= t_max:
            break
    o.status = status; o.nev = nev; o.tptr = tptr; o.nptr = nptr
    o.ncap = ncap; o.free_sum = free_sum; o.free_cnt = free_cnt
    o.max_free = max_free; o.max_ledger = max_ledger; o.max_drift = max_drift
    o.m = m; o.x = x; o.p = p; o.t = t


def evolve_line(m, x, p, t, w, lam, profile, phase_mode, ph_g0, ph_g1,
                phase_seed, t_max, max_events,
                const double[::1] t_grid, const long[::1] n_grid,
                cap_lo, cap_hi,
                double[::1] s_q, double[::1] s_p,
                double[::1] sn_p2, double[::1] sn_q2,
                long[::1] ev_n, double[::1] ev_t,
                double[::1] ev_ph0, double[::1] ev_ph1,
                long[::1] ev_i, double[::1] ev_dp,
                double[::1] ev_kein, double[::1] ev_keout):
    cdef Evolve1dOut o
    cdef int64_t c_m = m
    cdef double c_x = x, c_p = p, c_t = t, c_w = w, c_lam = lam
    cdef int c_prof = profile, c_pm = phase_mode
    cdef double c_p0 = ph_g0, c_p1 = ph_g1
    cdef uint64_t c_seed = <uint64_t>(phase_seed & 0xFFFFFFFFFFFFFFFF)
    cdef double c_tmax = t_max
    cdef int64_t c_maxev = max_events, c_lo = cap_lo, c_hi = cap_hi
    with nogil:
        c_evolve_line(c_m, c_x, c_p, c_t, c_w, c_lam, c_prof, c_pm,
                      c_p0, c_p1, c_seed, c_tmax, c_maxev,
                      t_grid, n_grid, c_lo, c_hi, s_q, s_p, sn_p2, sn_q2,
                      ev_n, ev_t, ev_ph0, ev_ph1, ev_i, ev_dp,
                      ev_kein, ev_keout, &o)
    return (o.status, int(o.nev), int(o.tptr), int(o.nptr), int(o.ncap),
            o.free_sum, int(o.free_cnt), o.max_free, o.max_ledger,
            o.max_drift, int(o.m), o.x, o.p, o.t)


def kicked_1d(q, p, lam, n_kicks, const long[::1] k_grid,
              double[::1] s_q, double[::1] s_p):
    cdef double c_q = q, c_p = p, c_lam = lam
    cdef int64_t nk = k_grid.shape[0]
    cdef int64_t kptr = 0
    cdef int64_t n = n_kicks
    cdef int64_t k
    cdef double qr
    with nogil:
        while kptr < nk and k_grid[kptr] <= 0:
            s_q[kptr] = c_q
            s_p[kptr] = c_p
            kptr += 1
        qr = fmod(c_q, TWO_PI_C)
        if qr < 0.0:
            qr += TWO_PI_C
        for k in range(1, n + 1):
            c_p = c_p + c_lam * sin(qr)
            c_q = c_q + c_p
            qr = fmod(qr + c_p, TWO_PI_C)
            if qr < 0.0:
                qr += TWO_PI_C
            if kptr < nk and k == k_grid[kptr]:
                s_q[kptr] = c_q
                s_p[kptr] = c_p
                kptr += 1
    return (c_q, c_p, int(kptr))


def kicked_2d(qx, qy, px, py, lam, n_kicks, const long[::1] k_grid,
              double[::1] s_qx, double[::1] s_qy,
              double[::1] s_px, double[::1] s_py):
    cdef double c_qx = qx, c_qy = qy, c_px = px, c_py = py, c_lam = lam
    cdef int64_t nk = k_grid.shape[0]
    cdef int64_t kptr = 0
    cdef int64_t n = n_kicks
    cdef int64_t k
    cdef double qxr, qyr
    with nogil:
        while kptr < nk and k_grid[kptr] <= 0:
            s_qx[kptr] = c_qx
            s_qy[kptr] = c_qy
            s_px[kptr] = c_px
            s_py[kptr] = c_py
            kptr += 1
        qxr = fmod(c_qx, TWO_PI_C)
        if qxr < 0.0:
            qxr += TWO_PI_C
        qyr = fmod(c_qy, TWO_PI_C)
        if qyr < 0.0:
            qyr += TWO_PI_C
        for k in range(1, n + 1):
            c_px = c_px + c_lam * (sin(qxr) * cos(qyr))
            c_py = c_py + c_lam * (cos(qxr) * sin(qyr))
            c_qx = c_qx + c_px
            c_qy = c_qy + c_py
            qxr = fmod(qxr + c_px, TWO_PI_C)
            if qxr < 0.0:
                qxr += TWO_PI_C
            qyr = fmod(qyr + c_py, TWO_PI_C)
            if qyr < 0.0:
                qyr += TWO_PI_C
            if kptr < nk and k == k_grid[kptr]:
                s_qx[kptr] = c_qx
                s_qy[kptr] = c_qy
                s_px[kptr] = c_px
                s_py[kptr] = c_py
                kptr += 1
    return (c_qx, c_qy, c_px, c_py, int(kptr))


cdef struct LoneOut:
    int outcome
    double px
    double py
    double t_entry
    double t_exit
    double ke_in
    double ke_out
    int64_t hits
    double err


cdef void c_visit_lone(double px, double py, double b, double t0,
                       double q_star, double lam, int profile,
                       double ph0, double ph1,
                       const double[::1] t_grid,
                       double[::1] s_qx, double[::1] s_qy,
                       double[::1] s_px, double[::1] s_py,
                       LoneOut* out) nogil:
    cdef double disc = q_star * q_star - b * b
    cdef double ke, half, pnorm, ex, ey, t_entry, rx, ry
    cdef VisitOut v
    if disc < C_GRAZE:
        ke = 0.5 * (px * px + py * py)
        out.outcome = 0
        out.px = px
        out.py = py
        out.t_entry = t0
        out.t_exit = t0
        out.ke_in = ke
        out.ke_out = ke
        out.hits = 0
        out.err = 0.0
        return
    half = sqrt(disc)
    pnorm = sqrt(px * px + py * py)
    ex = px / pnorm
    ey = py / pnorm
    t_entry = t0 + (0.5 - half) / pnorm
    rx = -b * ey - half * ex
    ry = b * ex - half * ey
    c_visit_disk(px, py, rx, ry, t_entry, q_star, lam, profile, ph0, ph1,
                 INFINITY, 0.0, 0.0, t_grid, 0, s_qx, s_qy, s_px, s_py, &v)
    out.outcome = v.outcome
    out.px = v.px
    out.py = v.py
    out.t_entry = t_entry
    out.t_exit = v.t
    out.ke_in = v.ke_in
    out.ke_out = v.ke_out
    out.hits = v.hits
    out.err = v.err


def visit_lone(px, py, b, t0, q_star, lam, profile, ph0, ph1,
               const double[::1] t_grid,
               double[::1] s_qx, double[::1] s_qy,
               double[::1] s_px, double[::1] s_py):
    cdef LoneOut out
    c_visit_lone(<double>px, <double>py, <double>b, <double>t0,
                 <double>q_star, <double>lam, <int>profile,
                 <double>ph0, <double>ph1, t_grid,
                 s_qx, s_qy, s_px, s_py, &out)
    return (out.outcome, out.px, out.py, out.t_entry, out.t_exit,
            out.ke_in, out.ke_out, int(out.hits), out.err)


def rw_chain(px, py, q_star, lam, profile, eta_star, p_floor,
             const double[::1] b_draws, const double[::1] ph0_draws,
             const double[::1] ph1_draws, const long[::1] n_grid,
             double[::1] s_p1, double[::1] s_p2, double[::1] s_p3,
             double[::1] s_t, double[::1] s_q2,
             const double[::1] empty_grid,
             double[::1] e0, double[::1] e1, double[::1] e2, double[::1] e3):
    cdef double c_px = px, c_py = py
    cdef double c_qs = q_star, c_lam = lam, c_eta = eta_star
    cdef double c_floor = p_floor
    cdef int c_prof = profile
    cdef double t = 0.0, qx = 0.0, qy = 0.0
    cdef int64_t n_steps = b_draws.shape[0]
    cdef int64_t nn = n_grid.shape[0]
    cdef int64_t nptr = 0
    cdef int64_t n_done = 0
    cdef int status = 0
    cdef int64_t n
    cdef double pnorm, p2
    cdef LoneOut lo
    with nogil:
        for n in range(1, n_steps + 1):
            c_visit_lone(c_px, c_py, b_draws[n - 1], 0.0, c_qs, c_lam,
                         c_prof, ph0_draws[n - 1], ph1_draws[n - 1],
                         empty_grid, e0, e1, e2, e3, &lo)
            c_px = lo.px
            c_py = lo.py
            if lo.outcome == 2:
                status = 2
                break
            pnorm = sqrt(c_px * c_px + c_py * c_py)
            if pnorm < c_floor:
                status = 4
                break
            t += c_eta / pnorm
            qx += c_eta * c_px / pnorm
            qy += c_eta * c_py / pnorm
            n_done = n
            if nptr < nn and n == n_grid[nptr]:
                p2 = c_px * c_px + c_py * c_py
                s_p1[nptr] = pnorm
                s_p2[nptr] = p2
                s_p3[nptr] = p2 * pnorm
                s_t[nptr] = t
                s_q2[nptr] = qx * qx + qy * qy
                nptr += 1
    return (status, int(n_done), int(nptr))
