"""Bit-level equivalence of the compiled core and the pure fallback.

The extension is built with FMA contraction and the sincos merge disabled,
so both backends execute the same IEEE operations in the same order; after
thousands of chaotic events every output must still match exactly.
"""

import math

import numpy as np
import pytest

from softlorentz import _kernels
from softlorentz._kernels import pure as _pure

core = pytest.importorskip("softlorentz._kernels._core")


def _run_hex(kern, profile, lam, phase_mode, seed=7, t_max=2000.0):
    t_grid = np.concatenate([[0.0], np.logspace(0.0, math.log10(t_max), 40)])
    n_grid = np.array([1, 10, 100, 1000, 5000], dtype=np.int64)
    ncap = 5000
    s = [np.full(t_grid.shape[0], np.nan) for _ in range(4)]
    sn = [np.full(n_grid.shape[0], np.nan) for _ in range(2)]
    ei = [np.zeros(ncap, dtype=np.int64) for _ in range(3)]
    ef = [np.zeros(ncap) for _ in range(10)]
    out = kern.evolve_hex(0.45, 0.0, 0, 0, 0.7, 0.42, 0.0,
                          0.45, 1.52, lam, profile, phase_mode, 0.0, 0.0,
                          seed, t_max, 0, t_grid, n_grid, 1, 1 + ncap,
                          s[0], s[1], s[2], s[3], sn[0], sn[1],
                          ei[0], ef[0], ef[1], ef[2], ef[3], ei[1], ei[2],
                          ef[4], ef[5], ef[6], ef[7], ef[8], ef[9])
    ncap_f, tf, nf = out[4], out[2], out[3]
    arrays = ([a[:tf] for a in s] + [a[:nf] for a in sn]
              + [a[:ncap_f] for a in ei + ef])
    return out, arrays


@pytest.mark.parametrize("profile,lam,phase_mode", [
    (_pure.PROFILE_COS, 1.0 / 6.0, _pure.PHASE_GLOBAL),
    (_pure.PROFILE_QUASI, 1.0 / 6.0, _pure.PHASE_GLOBAL),
    (_pure.PROFILE_CONST, 0.49 ** 2 / 2.0, _pure.PHASE_GLOBAL),
    (_pure.PROFILE_COS, 1.0 / 6.0, _pure.PHASE_PER_SCATTERER),
    (_pure.PROFILE_COS, 1.0, _pure.PHASE_GLOBAL),
])
def test_evolve_hex_bit_identical(profile, lam, phase_mode):
    o1, a1 = _run_hex(_pure, profile, lam, phase_mode)
    o2, a2 = _run_hex(core, profile, lam, phase_mode)
    assert o1 == o2
    for x, y in zip(a1, a2):
        assert np.array_equal(x, y, equal_nan=True)
    assert o1[1] > 1000      # the comparison covered a long chaotic run


def _run_line(kern, profile, lam, phase_mode, t_max=3000.0):
    t_grid = np.concatenate([[0.0], np.logspace(0.0, math.log10(t_max), 40)])
    n_grid = np.array([1, 10, 100, 1000], dtype=np.int64)
    ncap = 9000
    s_q = np.full(t_grid.shape[0], np.nan)
    s_p = np.full(t_grid.shape[0], np.nan)
    sn = [np.full(n_grid.shape[0], np.nan) for _ in range(2)]
    ev_n = np.zeros(ncap, dtype=np.int64)
    ev_i = np.zeros(ncap, dtype=np.int64)
    ef = [np.zeros(ncap) for _ in range(6)]
    out = kern.evolve_line(0, 2.0 / 3.0, 2.0, 0.0, 2.0 / 3.0, lam, profile,
                           phase_mode, 0.0, 0.0, 99, t_max, 0,
                           t_grid, n_grid, 1, 1 + ncap, s_q, s_p,
                           sn[0], sn[1], ev_n, ef[0], ef[1], ef[2], ev_i,
                           ef[3], ef[4], ef[5])
    nc, tf, nf = out[4], out[2], out[3]
    arrays = ([s_q[:tf], s_p[:tf]] + [a[:nf] for a in sn]
              + [ev_n[:nc], ev_i[:nc]] + [a[:nc] for a in ef])
    return out, arrays


@pytest.mark.parametrize("profile,lam,phase_mode", [
    (_pure.PROFILE_COS, 1.0, _pure.PHASE_GLOBAL),
    (_pure.PROFILE_COS, 1.0, _pure.PHASE_PER_SCATTERER),
    (_pure.PROFILE_CONST, 0.3, _pure.PHASE_GLOBAL),
])
def test_evolve_line_bit_identical(profile, lam, phase_mode):
    o1, a1 = _run_line(_pure, profile, lam, phase_mode)
    o2, a2 = _run_line(core, profile, lam, phase_mode)
    assert o1 == o2
    for x, y in zip(a1, a2):
        assert np.array_equal(x, y, equal_nan=True)


def test_kicked_bit_identical():
    kg = np.array([0, 1, 10, 100, 1000, 10000, 100000], dtype=np.int64)
    a = [np.zeros(kg.shape[0]) for _ in range(6)]
    b = [np.zeros(kg.shape[0]) for _ in range(6)]
    o1 = _pure.kicked_1d(0.3, 1.0, 10.0, 100000, kg, a[0], a[1])
    o2 = core.kicked_1d(0.3, 1.0, 10.0, 100000, kg, b[0], b[1])
    assert o1 == o2
    assert all(np.array_equal(x, y) for x, y in zip(a[:2], b[:2]))
    o1 = _pure.kicked_2d(0.3, 1.1, 1.0, 0.2, 10.0, 100000, kg,
                         a[2], a[3], a[4], a[5])
    o2 = core.kicked_2d(0.3, 1.1, 1.0, 0.2, 10.0, 100000, kg,
                        b[2], b[3], b[4], b[5])
    assert o1 == o2
    assert all(np.array_equal(x, y) for x, y in zip(a[2:], b[2:]))


def test_rw_chain_bit_identical():
    rng = np.random.default_rng(5)
    n = 20000
    b = rng.uniform(-0.45, 0.45, n)
    ph0 = rng.uniform(0.0, 2.0 * math.pi, n)
    ph1 = rng.uniform(0.0, 2.0 * math.pi, n)
    ng = np.array([1, 10, 100, 1000, 10000, 20000], dtype=np.int64)
    outs = []
    samples = []
    for kern in (_pure, core):
        s = [np.full(ng.shape[0], np.nan) for _ in range(5)]
        eg = np.empty(0)
        e = [np.empty(0) for _ in range(4)]
        outs.append(kern.rw_chain(1.0, 0.0, 0.45, 1.0 / 6.0,
                                  _pure.PROFILE_COS, 0.26, 1e-9,
                                  b, ph0, ph1, ng, s[0], s[1], s[2], s[3],
                                  s[4], eg, e[0], e[1], e[2], e[3]))
        samples.append(s)
    assert outs[0] == outs[1]
    for x, y in zip(samples[0], samples[1]):
        assert np.array_equal(x, y, equal_nan=True)


def test_phase_hash_matches():
    for seed, i, j, c in ((0, 0, 0, 0), (7, -3, 12, 1), (2 ** 63, 5, -9, 0)):
        assert _pure.scatterer_phase(seed, i, j, c) == \
            core.scatterer_phase(seed, i, j, c)


def test_pure_env_override(monkeypatch):
    # the selection shim honors SOFTLORENTZ_PURE=1
    import importlib
    import os
    monkeypatch.setenv("SOFTLORENTZ_PURE", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "pure"
    finally:
        monkeypatch.delenv("SOFTLORENTZ_PURE")
        importlib.reload(_kernels)
