import math

import numpy as np
import pytest

from softlorentz import oracle
from softlorentz.dynamics import ScattererModel
from softlorentz.scattering import exact_scatter


def test_smoothstep_is_c2():
    s = oracle.smoothstep
    ds = oracle.smoothstep_deriv
    assert s(0.0) == 0.0 and s(1.0) == 1.0
    assert ds(0.0) == 0.0 and ds(1.0) == 0.0
    # derivative consistency in the interior
    for x in (0.2, 0.5, 0.8):
        fd = (s(x + 1e-7) - s(x - 1e-7)) / 2e-7
        assert abs(fd - ds(x)) < 1e-6


def test_width_window_enforced():
    with pytest.raises(ValueError):
        oracle.MollifiedDisk(0.45, 1e-5)
    with pytest.raises(ValueError):
        oracle.MollifiedDisk(0.45, 0.1)


def test_free_motion_uncoupled():
    model = ScattererModel(lam=0.0, time_profile="cos")
    p = np.array([1.3, -0.4])
    p_out, t_exit, sol = oracle.integrate_lone_disk(p, 0.1, 0.3, model, 1e-3)
    assert np.abs(p_out - p).max() < 1e-10


def test_elastic_disk_energy_conservation():
    # autonomous Hamiltonian: energy exact, and outside the support the
    # kinetic energy returns to its incoming value
    model = ScattererModel(lam=0.12, time_profile="constant")
    p = np.array([1.1, 0.0])
    p_out, _t, _sol = oracle.integrate_lone_disk(p, 0.2, 0.0, model, 1e-3)
    ke_in = 0.5 * float(p @ p)
    ke_out = 0.5 * float(p_out @ p_out)
    assert abs(ke_out - ke_in) < 1e-8 * ke_in


def test_first_order_convergence_in_width(cos_model):
    """Halving the mollifier width halves the dp discrepancy (factor 1.5)."""
    p = np.array([2.0, 0.0])
    b, phi = 0.2, 1.0
    exact = exact_scatter(p, b, phi, cos_model, q_star=0.45)
    diffs = []
    for w in (1e-3, 5e-4):
        p_out, _t, _sol = oracle.integrate_lone_disk(p, b, phi, cos_model, w,
                                                     q_star=0.45)
        diffs.append(float(np.abs((p_out - p) - exact.dp).max()))
    ratio = diffs[0] / diffs[1]
    assert 2.0 / 1.5 < ratio < 2.0 * 1.5
