"""Configuration-driven command line front end and data emitters.

Config files are flat ``key = value`` text (comments with '#'); command-line
``--set key=value`` overrides take precedence.  Every run directory receives
a manifest with the config hash, seed and code version, sufficient to re-run
the experiment identically.

Exit codes: 0 success, 2 config error (offending key named), 3 runtime abort
(trajectory exclusion threshold).
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .dynamics import ScattererModel, run_line_raw
from .errors import ConfigError, ExclusionRateExceeded, SoftLorentzError
from .lattice import build_lattice, validate_horizon
from .randomwalk import KernelChoice, rw_run
from .stats import (EnsembleConfig, ensemble_run, diffusion_constant,
                    fit_power_law, fit_series_exponent, p_ap_compare,
                    time_grid, uniformity_test, correlation)

SERIES_HEADER = ("t,mean_p2,stderr_p2,mean_q2,stderr_q2,"
                 "mean_p1,mean_p3,n_valid")
SERIES_N_HEADER = "n,mean_p2,stderr_p2,mean_q2,stderr_q2,n_valid"
EVENTS_HEADER = ("traj_id,n,t_n,b_n,phi_n_0,phi_n_1,lat_i,lat_j,"
                 "dp_x,dp_y,ke_in,ke_out")
RW_HEADER = "n,mean_p1,mean_p2,mean_p3,mean_t,mean_q2,n_valid"
PAP_HEADER = "t,p,p_ap,deviation"

# key -> (type tag, default); the canonical serialization order is this order
CONFIG_KEYS = {
    "mode": ("str", "pulsed2d"),
    "preset": ("str", "hex2d"),
    "q_star": ("float", 0.45),
    "lam": ("float", 1.0 / 6.0),
    "time_profile": ("str", "cos"),
    "phase_mode": ("str", "global"),
    "phi0": ("float", 0.0),
    "phase_seed": ("int", 0),
    "n_traj": ("int", 1000),
    "p0_list": ("floatlist", (1.0,)),
    "t_max": ("float", 1e4),
    "samples_per_decade": ("int", 8),
    "seed": ("int", 0),
    "kick_dim": ("int", 1),
    "n_workers": ("int", 1),
    "events": ("bool", False),
    "events_cap": ("int", 100_000),
    "capture_lo": ("int", 0),
    "capture_hi": ("int", 0),
    "max_events": ("int", 0),
    "fit_lo": ("float", 0.0),
    "fit_hi": ("float", 0.0),
    "rw_steps": ("int", 10_000),
    "rw_chains": ("int", 1000),
    "rw_p0": ("float", 1.0),
    "eta_star": ("float", 0.0),
    "pap_q0": ("float", 5.0 / 6.0),
    "output_dir": ("str", "out"),
}


def _parse_value(key, tag, raw):
    raw = raw.strip()
    try:
        if tag == "str":
            return raw
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "bool":
            if raw.lower() in ("1", "true", "on", "yes"):
                return True
            if raw.lower() in ("0", "false", "off", "no"):
                return False
            raise ValueError(raw)
        if tag == "floatlist":
            return tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r} as {tag}") from exc
    raise ConfigError(key, f"unknown type tag {tag}")


def _format_value(tag, value):
    if tag == "floatlist":
        return ", ".join(repr(float(v)) for v in value)
    if tag == "bool":
        return "on" if value else "off"
    if tag == "float":
        return repr(float(value))
    return str(value)


class RunConfig(dict):
    """Flat run configuration with canonical text round-tripping."""

    @classmethod
    def defaults(cls):
        cfg = cls()
        for key, (_tag, default) in CONFIG_KEYS.items():
            cfg[key] = default
        return cfg

    @classmethod
    def from_text(cls, text):
        cfg = cls.defaults()
        for lineno, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
            key, raw = body.split("=", 1)
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(key, "unknown key")
            cfg[key] = _parse_value(key, CONFIG_KEYS[key][0], raw)
        return cfg

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_text(fh.read())

    def apply_overrides(self, pairs):
        for pair in pairs or ():
            if "=" not in pair:
                raise ConfigError(pair, "override must be key=value")
            key, raw = pair.split("=", 1)
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(key, "unknown key")
            self[key] = _parse_value(key, CONFIG_KEYS[key][0], raw)

    def to_text(self):
        lines = [f"{key} = {_format_value(CONFIG_KEYS[key][0], self[key])}"
                 for key in CONFIG_KEYS]
        return "\n".join(lines) + "\n"

    def sha256(self):
        return hashlib.sha256(self.to_text().encode("ascii")).hexdigest()


def _f17(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def emit_series_csv(series, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(SERIES_HEADER + "\n")
        for i in range(series.t.shape[0]):
            if series.n_valid[i] == 0:
                continue
            fh.write(",".join([
                _f17(float(series.t[i])),
                _f17(float(series.mean_p2[i])),
                _f17(float(series.stderr_p2[i])),
                _f17(float(series.mean_q2[i])),
                _f17(float(series.stderr_q2[i])),
                _f17(float(series.mean_p1[i])),
                _f17(float(series.mean_p3[i])),
                str(int(series.n_valid[i])),
            ]) + "\n")


def emit_series_n_csv(n_series, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(SERIES_N_HEADER + "\n")
        for i in range(n_series.n.shape[0]):
            fh.write(",".join([
                str(int(n_series.n[i])),
                _f17(float(n_series.mean_p2[i])),
                _f17(float(n_series.stderr_p2[i])),
                _f17(float(n_series.mean_q2[i])),
                _f17(float(n_series.stderr_q2[i])),
                str(int(n_series.n_valid[i])),
            ]) + "\n")


def _reservoir_indices(n_total, cap, seed, traj_id):
    if n_total <= cap:
        return np.arange(n_total)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, traj_id, 0xE7E27))))
    return np.sort(rng.choice(n_total, size=cap, replace=False))


def emit_events_csv(event_logs, path, cap=100_000, seed=0):
    """Write per-trajectory event logs; over-long logs are subsampled
    deterministically (seed-keyed) down to the cap."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(EVENTS_HEADER + "\n")
        for traj_id, log in enumerate(event_logs):
            idx = _reservoir_indices(len(log), cap, seed, traj_id)
            for i in idx:
                phi1 = float(log.phi1[i])
                fh.write(",".join([
                    str(traj_id),
                    str(int(log.n[i])),
                    _f17(float(log.t[i])),
                    _f17(float(log.b[i])),
                    _f17(float(log.phi0[i])),
                    "" if math.isnan(phi1) else _f17(phi1),
                    str(int(log.lat_i[i])),
                    str(int(log.lat_j[i])),
                    _f17(float(log.dpx[i])),
                    _f17(float(log.dpy[i])),
                    _f17(float(log.ke_in[i])),
                    _f17(float(log.ke_out[i])),
                ]) + "\n")


def read_series_csv(path):
    cols = {}
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != SERIES_HEADER:
            raise SoftLorentzError(f"unexpected series header {header!r}")
        names = header.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    for j, name in enumerate(names):
        vals = [row[j] for row in rows]
        if name == "n_valid":
            cols[name] = np.array([int(v) for v in vals], dtype=np.int64)
        else:
            cols[name] = np.array([float(v) for v in vals])
    return cols


def read_events_csv(path):
    """Parse events.csv into per-trajectory column dicts."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != EVENTS_HEADER:
            raise SoftLorentzError(f"unexpected events header {header!r}")
        per_traj = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            f = line.split(",")
            traj = int(f[0])
            rec = per_traj.setdefault(traj, {k: [] for k in (
                "n", "t", "b", "phi0", "phi1", "lat_i", "lat_j",
                "dpx", "dpy", "ke_in", "ke_out")})
            rec["n"].append(int(f[1]))
            rec["t"].append(float(f[2]))
            rec["b"].append(float(f[3]))
            rec["phi0"].append(float(f[4]))
            rec["phi1"].append(float(f[5]) if f[5] else math.nan)
            rec["lat_i"].append(int(f[6]))
            rec["lat_j"].append(int(f[7]))
            rec["dpx"].append(float(f[8]))
            rec["dpy"].append(float(f[9]))
            rec["ke_in"].append(float(f[10]))
            rec["ke_out"].append(float(f[11]))
    out = {}
    for traj in sorted(per_traj):
        out[traj] = {k: np.asarray(v) for k, v in per_traj[traj].items()}
    return out


def write_manifest(outdir, cfg, extra=None):
    manifest = {
        "config_sha256": cfg.sha256(),
        "seed": cfg["seed"],
        "version": __version__,
        "backend": BACKEND,
        "config": cfg.to_text(),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(outdir, "manifest.json"), "w",
              encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fit_to_dict(fit):
    return {"exponent": fit.exponent, "stderr": fit.stderr,
            "window": list(fit.window), "r_squared": fit.r_squared,
            "intercept": fit.intercept}


def _model_from_config(cfg):
    return ScattererModel(lam=cfg["lam"], time_profile=cfg["time_profile"],
                          phase_mode=cfg["phase_mode"], phi0=cfg["phi0"],
                          phase_seed=cfg["phase_seed"])


def _fit_window(cfg, t_max):
    if cfg["fit_lo"] > 0.0 and cfg["fit_hi"] > 0.0:
        return (cfg["fit_lo"], cfg["fit_hi"])
    return (t_max / 100.0, t_max)            # last two decades


def _cmd_simulate(cfg):
    model = _model_from_config(cfg)
    mode = cfg["mode"]
    lattice = None
    if mode in ("pulsed2d", "elastic2d"):
        lattice = build_lattice(cfg["preset"], cfg["q_star"])
    capture = None
    if cfg["capture_lo"] or cfg["capture_hi"]:
        capture = (cfg["capture_lo"], cfg["capture_hi"])
    elif cfg["events"]:
        capture = (1, cfg["events_cap"] + 1)
    econf = EnsembleConfig(
        mode=mode, n_traj=cfg["n_traj"], p0_list=cfg["p0_list"],
        t_max=cfg["t_max"], model=model, lattice=lattice,
        samples_per_decade=cfg["samples_per_decade"], seed=cfg["seed"],
        q_star_1d=cfg["q_star"] if mode.endswith("1d") else 1.0 / 3.0,
        kick_dim=cfg["kick_dim"], capture_window=capture,
        max_events=cfg["max_events"], n_workers=cfg["n_workers"])
    result = ensemble_run(econf)
    outdir = cfg["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    window = _fit_window(cfg, cfg["t_max"])
    multi = len(econf.p0_list) > 1
    fits = {}
    for p0, res in result.per_p0.items():
        sub = os.path.join(outdir, f"p0_{p0:g}") if multi else outdir
        os.makedirs(sub, exist_ok=True)
        emit_series_csv(res.series, os.path.join(sub, "series.csv"))
        if res.n_series.n.shape[0]:
            emit_series_n_csv(res.n_series, os.path.join(sub, "series_n.csv"))
        if cfg["events"]:
            emit_events_csv(res.events, os.path.join(sub, "events.csv"),
                            cap=cfg["events_cap"], seed=cfg["seed"])
        entry = {}
        for name in ("mean_p2", "mean_q2"):
            try:
                fit = fit_series_exponent(
                    getattr(res, "per_traj_" + name.split("_")[1]),
                    result.t_grid, window, seed=cfg["seed"])
                entry[name] = _fit_to_dict(fit)
            except SoftLorentzError as exc:
                entry[name] = {"error": str(exc)}
        if res.n_series.n.shape[0]:
            from .stats import complete_n_series
            full = complete_n_series(res.n_series)
            n_window = (full.n[-1] / 100.0, float(full.n[-1]))
            for name, vals in (("n_mean_p2", full.mean_p2),
                               ("n_mean_q2", full.mean_q2)):
                try:
                    entry[name] = _fit_to_dict(fit_power_law(
                        full.n.astype(float), vals, n_window))
                except SoftLorentzError as exc:
                    entry[name] = {"error": str(exc)}
        if mode == "elastic2d":
            try:
                dres = diffusion_constant(res.series, window)
                entry["diffusion"] = {"value": dres.value,
                                      "stderr": dres.stderr,
                                      "fit": _fit_to_dict(dres.fit)}
            except SoftLorentzError as exc:
                entry["diffusion"] = {"error": str(exc)}
        entry["eta_star"] = res.eta_star
        entry["n_excluded"] = res.n_excluded
        fits[f"{p0:g}"] = entry
        with open(os.path.join(sub, "fits.json"), "w",
                  encoding="ascii") as fh:
            json.dump({"p0": p0, **entry}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_manifest(sub, cfg, {"p0": p0})
    if mode == "elastic2d" and len(econf.p0_list) >= 3:
        pts = [(p0, entry["diffusion"]["value"])
               for p0, entry in ((p, fits[f"{p:g}"]) for p in econf.p0_list)
               if "value" in entry.get("diffusion", {})]
        if len(pts) >= 3:
            coef = np.polyfit(np.log([p for p, _ in pts]),
                              np.log([d for _, d in pts]), 1)
            fits["diffusion_slope"] = {"exponent": float(coef[0]),
                                       "intercept": float(coef[1])}
    with open(os.path.join(outdir, "fits.json"), "w", encoding="ascii") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(outdir, cfg)
    if mode == "pulsed1d" and len(econf.p0_list) == 1 and cfg["n_traj"] == 1:
        _emit_pap_compare(cfg, outdir)
    return 0


def _emit_pap_compare(cfg, outdir):
    """Single-trajectory 1D run compared against the adiabatic approximant."""
    p0 = cfg["p0_list"][0]
    q0 = cfg["pap_q0"]
    t_hi = min(cfg["t_max"], 200.0)
    t_lin = np.linspace(0.0, t_hi, 4001)
    model = _model_from_config(cfg)
    raw = run_line_raw(q0, p0, 0.0, model, t_hi, t_lin,
                       q_star=cfg["q_star"])
    p_t = raw.s_p[:, 0]
    res = p_ap_compare(t_lin, p_t, q0, p0, model.lam,
                       q_star=cfg["q_star"],
                       time_profile=model.time_profile)
    with open(os.path.join(outdir, "papcompare.csv"), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write(PAP_HEADER + "\n")
        for i in range(t_lin.shape[0]):
            fh.write(",".join([_f17(float(t_lin[i])), _f17(float(p_t[i])),
                               _f17(float(res.p_ap[i])),
                               _f17(float(res.dev[i]))]) + "\n")


def _cmd_rw(cfg):
    model = _model_from_config(cfg)
    eta = cfg["eta_star"]
    if eta <= 0.0:
        from .stats import measure_eta_star
        lattice = build_lattice(cfg["preset"], cfg["q_star"])
        eta = measure_eta_star(lattice, model, p0=cfg["rw_p0"],
                               seed=cfg["seed"])
    kernel = KernelChoice(variant="exact_step", eta_star=eta,
                          q_star=cfg["q_star"], model=model,
                          lam=cfg["lam"])
    table = rw_run(cfg["rw_steps"], cfg["rw_chains"], cfg["rw_p0"], kernel,
                   cfg["seed"], per_decade=cfg["samples_per_decade"])
    outdir = cfg["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "rw_series.csv"), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write(RW_HEADER + "\n")
        for i in range(table.n_grid.shape[0]):
            fh.write(",".join([
                str(int(table.n_grid[i])),
                _f17(float(table.mean_p1[i])),
                _f17(float(table.mean_p2[i])),
                _f17(float(table.mean_p3[i])),
                _f17(float(table.mean_t[i])),
                _f17(float(table.mean_q2[i])),
                str(int(table.n_valid[i])),
            ]) + "\n")
    window = (table.n_grid[-1] / 10.0, float(table.n_grid[-1]))
    fits = {"eta_star": eta, "n_dropped": table.n_dropped}
    for name, vals in (("mean_p3", table.mean_p3), ("mean_t", table.mean_t),
                       ("mean_p2", table.mean_p2)):
        try:
            fits[name] = _fit_to_dict(fit_power_law(
                table.n_grid.astype(float), vals, window))
        except SoftLorentzError as exc:
            fits[name] = {"error": str(exc)}
    with open(os.path.join(outdir, "fits.json"), "w", encoding="ascii") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(outdir, cfg)
    return 0


def _cmd_kicked(cfg):
    cfg["mode"] = "kicked"
    return _cmd_simulate(cfg)


def _cmd_fit(cfg, args):
    cols = read_series_csv(args.series)
    window = (args.window[0], args.window[1]) if args.window else \
        _fit_window(cfg, float(cols["t"][-1]))
    fits = {}
    for name in args.columns:
        if name not in cols:
            raise SoftLorentzError(f"column {name!r} not in series file")
        fits[name] = _fit_to_dict(fit_power_law(cols["t"], cols[name],
                                                window))
    os.makedirs(cfg["output_dir"], exist_ok=True)
    path = os.path.join(cfg["output_dir"], "fits.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(fits, indent=2, sort_keys=True))
    return 0


def _cmd_correlations(cfg, args):
    per_traj = read_events_csv(args.events)
    if not per_traj:
        raise SoftLorentzError("events file holds no rows")
    lens = {len(rec["b"]) for rec in per_traj.values()}
    L = min(lens)
    b = np.array([rec["b"][:L] for rec in per_traj.values()])
    phi = np.array([rec["phi0"][:L] for rec in per_traj.values()])
    out = {"n_traj": len(per_traj), "window": L}
    qs = cfg["q_star"]
    out["b_uniformity"] = uniformity_test(
        b[:, 0], args.bins, (-qs, qs))._asdict()
    out["phi_uniformity"] = uniformity_test(
        phi[:, 0], args.bins, (0.0, 2.0 * math.pi))._asdict()
    for name, arr in (("b", b), ("phi", phi)):
        table = []
        for k in range(0, min(args.lag_max, L - 1) + 1):
            c = correlation(arr, k, seed=cfg["seed"])
            table.append({"k": k, "value": c.value, "stderr": c.stderr})
        out[name + "_lag"] = table
    os.makedirs(cfg["output_dir"], exist_ok=True)
    with open(os.path.join(cfg["output_dir"], "correlations.json"), "w",
              encoding="ascii") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"b uniformity p={out['b_uniformity']['p_value']:.4f}, "
          f"phi uniformity p={out['phi_uniformity']['p_value']:.4f}")
    return 0


def _cmd_validate_horizon(cfg, args):
    lattice = build_lattice(cfg["preset"], cfg["q_star"],
                            n_rays=args.n_rays, sweep_seed=cfg["seed"])
    max_path = validate_horizon(lattice, n_rays=args.n_rays,
                                seed=cfg["seed"])
    print(f"preset={cfg['preset']} q_star={cfg['q_star']}: "
          f"max free path {max_path:.6f}, stored bound "
          f"{lattice.horizon_bound:.6f}")
    return 0


def _cmd_oracle_check(cfg, args):
    from .oracle import integrate_lone_disk
    from .scattering import exact_scatter
    model = _model_from_config(cfg)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((cfg["seed"], 0x0AC1E))))
    worst = 0.0
    rows = []
    for _ in range(args.n_cases):
        speed = rng.uniform(1.0, 3.0)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        p = np.array([speed * math.cos(ang), speed * math.sin(ang)])
        b = rng.uniform(-0.8 * cfg["q_star"], 0.8 * cfg["q_star"])
        phi = rng.uniform(0.0, 2.0 * math.pi)
        exact = exact_scatter(p, b, phi, model, q_star=cfg["q_star"])
        p_out, _t, _sol = integrate_lone_disk(p, b, phi, model, args.width,
                                              q_star=cfg["q_star"])
        diff = float(np.max(np.abs((p_out - p) - exact.dp)))
        worst = max(worst, diff)
        rows.append({"b": b, "phi": phi, "speed": speed, "dp_diff": diff})
    print(f"oracle check: {args.n_cases} cases, width={args.width}, "
          f"max |dp_exact - dp_oracle| = {worst:.3e}")
    os.makedirs(cfg["output_dir"], exist_ok=True)
    with open(os.path.join(cfg["output_dir"], "oracle.json"), "w",
              encoding="ascii") as fh:
        json.dump({"width": args.width, "max_dp_diff": worst, "cases": rows},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="softlorentz",
        description="Soft Lorentz gas / pulsed & kicked rotor simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", nargs="?", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        dest="overrides", help="override a config key")

    for name in ("simulate", "rw", "kicked"):
        common(sub.add_parser(name))
    fit = sub.add_parser("fit")
    common(fit)
    fit.add_argument("--series", required=True)
    fit.add_argument("--window", nargs=2, type=float, default=None)
    fit.add_argument("--columns", nargs="+", default=["mean_p2", "mean_q2"])
    corr = sub.add_parser("correlations")
    common(corr)
    corr.add_argument("--events", required=True)
    corr.add_argument("--lag-max", type=int, default=50)
    corr.add_argument("--bins", type=int, default=40)
    vh = sub.add_parser("validate-horizon")
    common(vh)
    vh.add_argument("--n-rays", type=int, default=10_000)
    oc = sub.add_parser("oracle-check")
    common(oc)
    oc.add_argument("--width", type=float, default=1e-3)
    oc.add_argument("--n-cases", type=int, default=8)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = (RunConfig.from_file(args.config) if args.config
               else RunConfig.defaults())
        cfg.apply_overrides(args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "simulate":
            return _cmd_simulate(cfg)
        if args.command == "rw":
            return _cmd_rw(cfg)
        if args.command == "kicked":
            return _cmd_kicked(cfg)
        if args.command == "fit":
            return _cmd_fit(cfg, args)
        if args.command == "correlations":
            return _cmd_correlations(cfg, args)
        if args.command == "validate-horizon":
            return _cmd_validate_horizon(cfg, args)
        if args.command == "oracle-check":
            return _cmd_oracle_check(cfg, args)
    except ExclusionRateExceeded as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    parser.error("unreachable")


if __name__ == "__main__":
    sys.exit(main())
