"""Single-scatterer momentum transfer.

Two routes to the same physics: ``exact_scatter`` runs the step-model visit
(the production path), while ``alpha1``/``beta1`` evaluate the leading-order
perturbative transfer kernels for a smooth profile.  For fast particles the
exact transverse kick approaches alpha1/|p| and the speed change approaches
beta1/|p|^2, which the tests verify by halving.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from ._kernels import active as _kern, pure as _pure
from .errors import QuadratureFailure, StepUnderflow, TrappedGuard
from .oracle import smoothstep, smoothstep_deriv

SQRT2 = math.sqrt(2.0)
_QUAD_LIMIT = 200
_QUAD_RTOL = 1e-8


@dataclass
class TransferResult:
    """Momentum transfer of one visit, split along the incoming direction."""

    dp: np.ndarray
    dp_parallel: float
    dp_perp: np.ndarray
    dwell: float


@dataclass
class SmoothProfile:
    """C^2 radial bump with plateau + quintic ramp, times a phase factor.

    g(r) = 1 on [0, plateau], ramps to 0 at plateau + ramp.  time_factor
    picks F(phi): 'cos' -> cos(phi_1), 'quasiperiodic' -> cos(phi_1) +
    cos(phi_2), 'constant' -> 1.
    """

    plateau: float = 0.3
    ramp: float = 0.1
    time_factor: str = "cos"

    def __post_init__(self):
        if self.plateau < 0.0 or self.ramp <= 0.0:
            raise ValueError("plateau must be >= 0 and ramp > 0")
        if self.support > 0.5:
            raise ValueError("support radius must not exceed 1/2")
        if self.time_factor not in ("cos", "quasiperiodic", "constant"):
            raise ValueError(f"unknown time_factor {self.time_factor!r}")

    @property
    def support(self):
        return self.plateau + self.ramp

    @property
    def omega(self):
        if self.time_factor == "quasiperiodic":
            return (1.0, SQRT2)
        return (1.0,)

    def g(self, r):
        return smoothstep((self.support - r) / self.ramp)

    def g_prime(self, r):
        return -smoothstep_deriv((self.support - r) / self.ramp) / self.ramp

    def f(self, phi):
        ph0, ph1 = _phi2(phi)
        if self.time_factor == "cos":
            return math.cos(ph0)
        if self.time_factor == "quasiperiodic":
            return math.cos(ph0) + math.cos(ph1)
        return 1.0

    def f_phase_grad(self, phi):
        """Gradient of F on the phase torus (one entry per frequency)."""
        ph0, ph1 = _phi2(phi)
        if self.time_factor == "cos":
            return (-math.sin(ph0),)
        if self.time_factor == "quasiperiodic":
            return (-math.sin(ph0), -math.sin(ph1))
        return (0.0,)


def _phi2(phi):
    if phi is None:
        return 0.0, 0.0
    if np.isscalar(phi):
        return float(phi), 0.0
    phi = tuple(float(v) for v in phi)
    return (phi + (0.0, 0.0))[:2]


def _impact_vector(b, e):
    """Accept a signed scalar (along e-perp) or an explicit vector."""
    e = np.asarray(e, dtype=float)
    if np.isscalar(b):
        return float(b) * np.array([-e[1], e[0]])
    b = np.asarray(b, dtype=float)
    if abs(float(b @ e)) > 1e-10:
        raise ValueError("impact vector must be perpendicular to e")
    return b


def exact_scatter(p, b, phi, model, q_star=0.45):
    """Step-model transfer R(p, b, phi) off a lone disk at the origin."""
    p = np.asarray(p, dtype=float)
    pnorm = math.sqrt(float(p @ p))
    if pnorm <= 0.0:
        raise ValueError("momentum must be nonzero")
    if abs(float(b)) > q_star:
        raise ValueError("impact parameter outside [-q_star, q_star]")
    ph0, ph1 = _phi2(phi)
    (outcome, px, py, t_entry, t_exit, _ki, _ko, _hits, _err) = \
        _kern.visit_lone(p[0], p[1], float(b), 0.0, q_star, model.lam,
                         model.profile_id, ph0, ph1,
                         _EMPTY, _EMPTY, _EMPTY, _EMPTY, _EMPTY)
    if outcome == _pure._VISIT_TRAPPED:
        raise TrappedGuard(f"interior hits exceeded {_pure.TRAP_CAP}")
    dp = np.array([px, py]) - p
    e = p / pnorm
    dp_par = float(dp @ e)
    return TransferResult(dp=dp, dp_parallel=dp_par,
                          dp_perp=dp - dp_par * e,
                          dwell=t_exit - t_entry)


_EMPTY = np.empty(0)


def _quad_chord(f, half_span, breakpoints=None):
    # QUADPACK flags epsrel starvation on integrals that vanish by
    # symmetry; the tolerance contract is enforced below instead.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(f, -half_span, half_span, epsrel=_QUAD_RTOL,
                        epsabs=1e-14, limit=_QUAD_LIMIT, points=breakpoints)
    scale = max(abs(val), 1e-30)
    if err > 10.0 * _QUAD_RTOL * scale and err > 1e-12:
        raise QuadratureFailure(
            f"chord quadrature error {err:.3e} exceeds tolerance")
    return val


def _chord_breakpoints(profile, b_abs, half_span):
    """Chord positions where the radial bump changes branch."""
    pts = []
    for r in (profile.plateau, profile.support):
        if r > b_abs:
            mu = math.sqrt(r * r - b_abs * b_abs)
            if mu < half_span:
                pts.extend((-mu, mu))
    return sorted(pts) or None


def beta1(e, b, phi, profile, omega=None, lam=1.0):
    """Leading-order energy-transfer rate along the chord b + mu*e.

    Integrates (omega . grad_phi) W over the chord through the support for
    W(q, phi) = g(|q|) F(phi).
    """
    e = np.asarray(e, dtype=float)
    bvec = _impact_vector(b, e)
    if omega is None:
        omega = profile.omega
    grad = profile.f_phase_grad(phi)
    wdot = sum(w * g for w, g in zip(omega, grad))
    if wdot == 0.0:
        return 0.0
    span = profile.support + profile.ramp
    babs = math.hypot(bvec[0], bvec[1])

    def integrand(mu):
        q = bvec + mu * e
        return profile.g(math.hypot(q[0], q[1]))

    return lam * wdot * _quad_chord(integrand, span,
                                    _chord_breakpoints(profile, babs, span))


def alpha1(e, b, phi, profile, lam=1.0):
    """Leading-order transverse momentum transfer (componentwise chord quad).

    alpha1 . e telescopes to zero over the compact support; the transverse
    component is what turns the particle.
    """
    e = np.asarray(e, dtype=float)
    bvec = _impact_vector(b, e)
    fval = profile.f(phi)
    span = profile.support + profile.ramp
    out = np.zeros(2)
    if fval == 0.0:
        return out
    babs = math.hypot(bvec[0], bvec[1])
    breaks = _chord_breakpoints(profile, babs, span)
    for comp in range(2):
        def integrand(mu, comp=comp):
            qx = bvec[0] + mu * e[0]
            qy = bvec[1] + mu * e[1]
            r = math.hypot(qx, qy)
            if r == 0.0:
                return 0.0
            gp = profile.g_prime(r)
            qc = qx if comp == 0 else qy
            return gp * qc / r
        out[comp] = -lam * fval * _quad_chord(integrand, span, breaks)
    return out


def smooth_scatter(p, b, phi, profile, lam=1.0, rtol=1e-10, max_time=200.0):
    """Integrate the true flow through the smooth profile (oracle route).

    Same entry convention as exact_scatter; the potential is
    lam * g(|q|) F(omega t + phi).
    """
    p = np.asarray(p, dtype=float)
    pnorm = math.sqrt(float(p @ p))
    e = p / pnorm
    bvec = _impact_vector(b, e)
    q0 = bvec - 0.5 * e
    ph0, ph1 = _phi2(phi)
    omega = profile.omega
    quasi = profile.time_factor == "quasiperiodic"

    def fval(t):
        if profile.time_factor == "constant":
            return 1.0
        if quasi:
            return math.cos(omega[0] * t + ph0) + math.cos(omega[1] * t + ph1)
        return math.cos(omega[0] * t + ph0)

    def rhs(t, y):
        qx, qy, px, py = y
        r = math.hypot(qx, qy)
        if r >= profile.support or r == 0.0:
            return (px, py, 0.0, 0.0)
        gp = profile.g_prime(r)
        if gp == 0.0:
            return (px, py, 0.0, 0.0)
        c = -lam * fval(t) * gp / r
        return (px, py, c * qx, c * qy)

    def escaped(t, y):
        return math.hypot(y[0], y[1]) - 0.55

    escaped.terminal = True
    escaped.direction = 1.0
    sol = solve_ivp(rhs, (0.0, max_time), [q0[0], q0[1], p[0], p[1]],
                    method="RK45", rtol=rtol, atol=1e-12, events=escaped,
                    max_step=0.25 * profile.ramp / max(pnorm, 1e-6))
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    if not sol.t_events[0].size:
        raise StepUnderflow("smooth scatter never escaped the support")
    y = sol.y_events[0][0]
    dp = np.array([y[2], y[3]]) - p
    dp_par = float(dp @ e)
    return TransferResult(dp=dp, dp_parallel=dp_par,
                          dp_perp=dp - dp_par * e,
                          dwell=float(sol.t_events[0][0]))
