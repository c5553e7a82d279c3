import json
import math
import os

import numpy as np
import pytest


def _f17(x):
    return f"{x:.17g}"


def write_series(path, t, p2, q2):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t,mean_p2,stderr_p2,mean_q2,stderr_q2,"
                 "mean_p1,mean_p3,n_valid\n")
        for i in range(len(t)):
            p1 = math.sqrt(p2[i])
            fh.write(",".join([_f17(t[i]), _f17(p2[i]), _f17(0.01 * p2[i]),
                               _f17(q2[i]), _f17(0.01 * q2[i]), _f17(p1),
                               _f17(p1 * p2[i]), "100"]) + "\n")


def write_series_n(path, n, p2, q2):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("n,mean_p2,stderr_p2,mean_q2,stderr_q2,n_valid\n")
        for i in range(len(n)):
            fh.write(",".join([str(int(n[i])), _f17(p2[i]),
                               _f17(0.01 * p2[i]), _f17(q2[i]),
                               _f17(0.01 * q2[i]), "100"]) + "\n")


def write_pap(path, t, p, p_ap):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t,p,p_ap,deviation\n")
        for i in range(len(t)):
            fh.write(",".join([_f17(t[i]), _f17(p[i]), _f17(p_ap[i]),
                               _f17(abs(p[i] - p_ap[i]))]) + "\n")


def synthetic_chain(n_events, theta0=0.7, speed=1.3, seed=5, n0=1):
    """Physically consistent event chain: |p| from the energies, dp in the
    lab frame, so heading reconstruction has a unique answer."""
    rng = np.random.Generator(np.random.PCG64(seed))
    px, py = speed * math.cos(theta0), speed * math.sin(theta0)
    rows = []
    dirs = []
    for k in range(n_events):
        pn = math.hypot(px, py)
        dirs.append((px / pn, py / pn))
        ke_in = 0.5 * pn * pn
        dth = rng.normal(0.0, 0.12)
        scale = 1.0 + rng.normal(0.0, 0.02)
        c, s = math.cos(dth), math.sin(dth)
        npx = scale * (c * px - s * py)
        npy = scale * (s * px + c * py)
        ke_out = 0.5 * (npx * npx + npy * npy)
        rows.append({
            "n": n0 + k, "t_n": 0.5 * (n0 + k),
            "b_n": rng.uniform(-0.45, 0.45),
            "phi_n_0": rng.uniform(0.0, 2.0 * math.pi), "phi_n_1": None,
            "lat_i": k, "lat_j": 0, "dp_x": npx - px, "dp_y": npy - py,
            "ke_in": ke_in, "ke_out": ke_out})
        px, py = npx, npy
    return rows, np.array(dirs)


def write_events(path, per_traj_rows):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("traj_id,n,t_n,b_n,phi_n_0,phi_n_1,lat_i,lat_j,"
                 "dp_x,dp_y,ke_in,ke_out\n")
        for traj_id, rows in per_traj_rows.items():
            for r in rows:
                phi1 = "" if r["phi_n_1"] is None else _f17(r["phi_n_1"])
                fh.write(",".join([
                    str(traj_id), str(r["n"]), _f17(r["t_n"]),
                    _f17(r["b_n"]), _f17(r["phi_n_0"]), phi1,
                    str(r["lat_i"]), str(r["lat_j"]), _f17(r["dp_x"]),
                    _f17(r["dp_y"]), _f17(r["ke_in"]), _f17(r["ke_out"]),
                ]) + "\n")


@pytest.fixture()
def run_dir_factory(tmp_path):
    counter = [0]

    def make(p0=0.82, exp_p2=0.4, exp_q2=2.0, n_exp_p2=0.33, n_exp_q2=1.67,
             diffusion=None, with_series_n=True, with_pap=False):
        d = tmp_path / f"run{counter[0]}"
        counter[0] += 1
        d.mkdir()
        t = np.logspace(0.0, 5.0, 41)
        write_series(d / "series.csv", np.concatenate([[0.0], t]),
                     np.concatenate([[p0 ** 2], p0 ** 2 * t ** exp_p2]),
                     np.concatenate([[0.2], 0.2 * t ** exp_q2]))
        if with_series_n:
            n = np.unique(np.round(np.logspace(0, 5, 35)).astype(int))
            write_series_n(d / "series_n.csv", n,
                           p0 ** 2 * n.astype(float) ** n_exp_p2,
                           0.2 * n.astype(float) ** n_exp_q2)
        fits = {"p0": p0,
                "mean_p2": {"exponent": exp_p2, "stderr": 0.01,
                            "window": [1e3, 1e5], "r_squared": 0.999,
                            "intercept": 0.0},
                "mean_q2": {"exponent": exp_q2, "stderr": 0.02,
                            "window": [1e3, 1e5], "r_squared": 0.999,
                            "intercept": 0.0},
                "n_mean_p2": {"exponent": n_exp_p2, "stderr": 0.01,
                              "window": [1e3, 1e5], "r_squared": 0.999,
                              "intercept": 0.0},
                "n_mean_q2": {"exponent": n_exp_q2, "stderr": 0.01,
                              "window": [1e3, 1e5], "r_squared": 0.999,
                              "intercept": 0.0}}
        if diffusion is not None:
            fits["diffusion"] = {"value": diffusion, "stderr": 0.05}
        with open(d / "fits.json", "w") as fh:
            json.dump(fits, fh)
        if with_pap:
            tt = np.linspace(0.0, 20.0, 501)
            p = p0 + 0.1 * np.sin(tt)
            write_pap(d / "papcompare.csv", tt, p, p + 0.01 * np.cos(tt))
        return str(d)

    return make
