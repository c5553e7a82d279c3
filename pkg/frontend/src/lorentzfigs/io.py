"""Schema-validated readers for the simulator's output files.

Every reader checks the header against the documented schema and reports
mismatches by column name.
"""

import json
import math
import os

import numpy as np

SERIES_HEADER = ("t,mean_p2,stderr_p2,mean_q2,stderr_q2,"
                 "mean_p1,mean_p3,n_valid")
SERIES_N_HEADER = "n,mean_p2,stderr_p2,mean_q2,stderr_q2,n_valid"
EVENTS_HEADER = ("traj_id,n,t_n,b_n,phi_n_0,phi_n_1,lat_i,lat_j,"
                 "dp_x,dp_y,ke_in,ke_out")
PAP_HEADER = "t,p,p_ap,deviation"

_INT_COLS = {"n_valid", "traj_id", "n", "lat_i", "lat_j"}


class SchemaError(Exception):
    """Input file does not match the documented schema."""


def _check_header(found, expected, path):
    f = found.strip().split(",")
    e = expected.split(",")
    if f == e:
        return
    for i, name in enumerate(e):
        if i >= len(f):
            raise SchemaError(f"{path}: missing column {name!r}")
        if f[i] != name:
            raise SchemaError(
                f"{path}: expected column {name!r} at position {i}, "
                f"found {f[i]!r}")
    raise SchemaError(f"{path}: unexpected extra columns {f[len(e):]}")


def _read_table(path, header):
    with open(path, "r", encoding="ascii") as fh:
        _check_header(fh.readline(), header, path)
        names = header.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {}
    for i, name in enumerate(names):
        vals = [row[i] for row in rows]
        if name in _INT_COLS:
            cols[name] = np.array([int(v) for v in vals], dtype=np.int64)
        else:
            cols[name] = np.array(
                [float(v) if v else math.nan for v in vals])
    return cols


def read_series(path):
    return _read_table(path, SERIES_HEADER)


def read_series_n(path):
    return _read_table(path, SERIES_N_HEADER)


def read_papcompare(path):
    return _read_table(path, PAP_HEADER)


def read_events(path):
    """events.csv split per trajectory, each a dict of column arrays."""
    flat = _read_table(path, EVENTS_HEADER)
    out = {}
    for traj in np.unique(flat["traj_id"]):
        mask = flat["traj_id"] == traj
        out[int(traj)] = {k: v[mask] for k, v in flat.items()
                          if k != "traj_id"}
    return out


def read_fits(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


def read_manifest(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


def run_dir_inputs(run_dir, want_series_n=False, want_pap=False):
    """Collect and validate the standard files of one run directory."""
    out = {"series": read_series(os.path.join(run_dir, "series.csv"))}
    fits_path = os.path.join(run_dir, "fits.json")
    out["fits"] = read_fits(fits_path) if os.path.exists(fits_path) else {}
    sn = os.path.join(run_dir, "series_n.csv")
    if want_series_n:
        if not os.path.exists(sn):
            raise SchemaError(f"{sn}: required series_n.csv is missing")
        out["series_n"] = read_series_n(sn)
    elif os.path.exists(sn):
        out["series_n"] = read_series_n(sn)
    pap = os.path.join(run_dir, "papcompare.csv")
    if want_pap:
        if not os.path.exists(pap):
            raise SchemaError(f"{pap}: required papcompare.csv is missing")
        out["pap"] = read_papcompare(pap)
    elif os.path.exists(pap):
        out["pap"] = read_papcompare(pap)
    man = os.path.join(run_dir, "manifest.json")
    if os.path.exists(man):
        out["manifest"] = read_manifest(man)
    return out


def reconstruct_directions(events, max_n=None):
    """Rebuild incoming unit directions of one trajectory's event chain.

    The log stores |p| (through the kinetic energies) and the lab-frame
    transfers dp, which fixes the chain up to the initial heading; the two
    candidate headings from event 1 are disambiguated against the recorded
    energies of the following events.
    """
    ke_in = events["ke_in"]
    ke_out = events["ke_out"]
    dpx = events["dp_x"]
    dpy = events["dp_y"]
    n_ev = ke_in.shape[0] if max_n is None else min(max_n, ke_in.shape[0])
    if n_ev < 3:
        raise SchemaError("need at least 3 events to fix the heading")
    p1 = math.sqrt(2.0 * ke_in[0])
    dp0 = math.hypot(dpx[0], dpy[0])
    if dp0 == 0.0:
        raise SchemaError("first event has zero transfer; heading ambiguous")
    # |p1 + dp|^2 = 2 ke_out  =>  p1 . dp known
    s = ke_out[0] - ke_in[0] - 0.5 * dp0 * dp0
    c = max(-1.0, min(1.0, s / (p1 * dp0)))
    base = math.atan2(dpy[0], dpx[0])
    best = None
    for theta in (base + math.acos(c), base - math.acos(c)):
        px, py = p1 * math.cos(theta), p1 * math.sin(theta)
        err = 0.0
        ex = np.empty(n_ev)
        ey = np.empty(n_ev)
        for k in range(n_ev):
            pn = math.hypot(px, py)
            err += (0.5 * pn * pn - ke_in[k]) ** 2
            ex[k] = px / pn
            ey[k] = py / pn
            px += dpx[k]
            py += dpy[k]
        if best is None or err < best[0]:
            best = (err, ex, ey)
    return np.column_stack([best[1], best[2]])
