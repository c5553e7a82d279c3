"""The seven figure presets.

Each renderer is pure file-in/file-out: it reads the documented CSV/JSON
outputs, draws with matplotlib and writes a vector file.  Guide-line slopes
always come from fits.json so figures cannot drift away from the fitted
numbers.  PDF metadata is stripped, making the output bytes deterministic
for fixed inputs.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import (SchemaError, read_events, read_fits, reconstruct_directions,
                 run_dir_inputs)

PRESETS = ("d2pulsedp", "d2correl", "d2pulseden", "softlorentz",
           "pulsedd1", "d1pulsed", "kickedd1")


@dataclass
class FigureSpec:
    figure: str
    run_dirs: tuple = ()
    events: Optional[str] = None
    fits: Optional[str] = None
    output: str = "figure.pdf"

    def __post_init__(self):
        if self.figure not in PRESETS:
            raise ValueError(f"unknown figure {self.figure!r}; "
                             f"choose from {PRESETS}")
        self.run_dirs = tuple(self.run_dirs)


def render(spec):
    """Render one preset; returns the output path."""
    fig = _RENDERERS[spec.figure](spec)
    fig.savefig(spec.output, metadata={"CreationDate": None})
    plt.close(fig)
    return spec.output


def _loglog_axes(ax, xlabel, ylabel):
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)


def _guide(ax, x, y, slope, label_sym):
    """Dashed power-law guide anchored at the series tail."""
    x1 = x[-1]
    x0 = x1 / 30.0
    y1 = y[-1] * 1.8
    xs = np.array([x0, x1])
    ax.plot(xs, y1 * (xs / x1) ** slope, "k--", lw=1.0)
    ax.annotate(f"$\\sim {label_sym}^{{{slope:.2f}}}$",
                xy=(math.sqrt(x0 * x1), y1 * (math.sqrt(x0 / x1)) ** slope),
                fontsize=8, ha="left", va="bottom")


def _positive(t, y):
    m = (t > 0) & np.isfinite(y) & (y > 0)
    return t[m], y[m]


def _p0_label(inputs):
    p0 = inputs["fits"].get("p0")
    return f"$\\|p_0\\|={p0:g}$" if p0 is not None else "run"


def _fit_exponent(fits, key, default):
    entry = fits.get(key, {})
    if isinstance(entry, dict) and "exponent" in entry:
        return entry["exponent"]
    return default


def _render_d2pulsedp(spec):
    runs = [run_dir_inputs(d, want_series_n=True) for d in spec.run_dirs]
    if not runs:
        raise SchemaError("d2pulsedp needs at least one run directory")
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    panels = [("series_n", "n", "mean_p2", r"$\langle\|p_n\|^2\rangle$",
               "n_mean_p2", "n"),
              ("series", "t", "mean_p2", r"$\langle\|p(t)\|^2\rangle$",
               "mean_p2", "t"),
              ("series_n", "n", "mean_q2", r"$\langle\|q_n\|^2\rangle$",
               "n_mean_q2", "n"),
              ("series", "t", "mean_q2", r"$\langle\|q(t)\|^2\rangle$",
               "mean_q2", "t")]
    for ax, (tab, xcol, ycol, ylab, fit_key, sym) in zip(axes.flat, panels):
        for inputs in runs:
            cols = inputs[tab]
            x, y = _positive(cols[xcol].astype(float), cols[ycol])
            ax.plot(x, y, ".", ms=3, label=_p0_label(inputs))
        slope = _fit_exponent(runs[0]["fits"], fit_key, None)
        if slope is not None:
            ax.relim()
            x, y = _positive(runs[0][tab][xcol].astype(float),
                             runs[0][tab][ycol])
            _guide(ax, x, y, slope, sym)
        _loglog_axes(ax, f"${sym}$", ylab)
    axes[0, 1].legend(fontsize=7, loc="lower right")
    if spec.events and os.path.exists(spec.events):
        events = read_events(spec.events)
        b_all = np.concatenate([ev["b_n"] for ev in events.values()])
        inset = axes[0, 0].inset_axes([0.08, 0.62, 0.35, 0.33])
        inset.hist(b_all, bins=30, color="0.6")
        inset.set_xlabel("$b_n$", fontsize=6)
        inset.tick_params(labelsize=5)
    else:
        axes[0, 0].annotate("(no events file: histogram panel omitted)",
                            xy=(0.03, 0.97), xycoords="axes fraction",
                            fontsize=6, va="top")
    fig.tight_layout()
    return fig


def _render_d2correl(spec):
    if not spec.events:
        raise SchemaError("d2correl requires an events.csv input")
    events = read_events(spec.events)
    if not events:
        raise SchemaError("events file holds no trajectories")
    length = min(ev["n"].shape[0] for ev in events.values())
    b = np.array([ev["b_n"][:length] for ev in events.values()])
    phi = np.array([ev["phi_n_0"][:length] for ev in events.values()])
    n0 = int(min(ev["n"][0] for ev in events.values()))
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    axes[0, 0].hist(b[:, 0], bins=30, color="0.5")
    axes[0, 0].set_xlabel(f"$b_n$ (n={n0})")
    axes[0, 0].set_ylabel("number of particles")
    axes[1, 0].hist(phi[:, 0], bins=30, color="0.5")
    axes[1, 0].set_xlabel(f"$\\phi_n$ (n={n0})")
    axes[1, 0].set_ylabel("number of particles")
    for ax, arr, sym in ((axes[0, 1], b, "b"), (axes[1, 1], phi, "\\phi")):
        ks = np.arange(0, min(50, length - 1) + 1)
        vals = []
        for k in ks:
            a0 = arr[:, :length - k] if k else arr
            a1 = arr[:, k:]
            cov = (a0 * a1).mean(axis=0) - a0.mean(axis=0) * a1.mean(axis=0)
            vals.append(cov.mean())
        ax.plot(ks, vals, ".-", ms=4)
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("$k$")
        ax.set_ylabel(f"${sym}_{{n,k}}$")
    fig.tight_layout()
    return fig


def _render_d2pulseden(spec):
    if not spec.events:
        raise SchemaError("d2pulseden requires an events.csv input")
    events = read_events(spec.events)
    first = events[min(events)]
    dirs = reconstruct_directions(first)
    fig, axes = plt.subplots(1, 4, figsize=(12, 3.2))
    for ax, m in zip(axes, (20, 100, 700, 1500)):
        mm = min(m, dirs.shape[0])
        circ = np.linspace(0.0, 2.0 * math.pi, 200)
        ax.plot(np.cos(circ), np.sin(circ), "k-", lw=0.5)
        ax.plot(dirs[:mm, 0], dirs[:mm, 1], ".", ms=2)
        ax.plot([dirs[0, 0]], [dirs[0, 1]], "o", ms=8, color="C3")
        note = f"m={m}" if mm == m else f"m={m} (only {mm} events)"
        ax.set_title(note, fontsize=9)
        ax.set_aspect("equal")
        ax.set_xlim(-1.2, 1.2)
        ax.set_ylim(-1.2, 1.2)
    fig.tight_layout()
    return fig


def _render_softlorentz(spec):
    runs = [run_dir_inputs(d) for d in spec.run_dirs]
    if len(runs) < 2:
        raise SchemaError("softlorentz needs one run directory per speed")
    fig, (ax_l, ax_r) = plt.subplots(1, 2, figsize=(10, 4))
    points = []
    for inputs in runs:
        cols = inputs["series"]
        t, q2 = _positive(cols["t"], cols["mean_q2"])
        ax_l.plot(t, q2, ".", ms=3, label=_p0_label(inputs))
        fits = inputs["fits"]
        d_entry = fits.get("diffusion", {})
        if "value" in d_entry and fits.get("p0") is not None:
            points.append((fits["p0"], d_entry["value"]))
    slope1 = _fit_exponent(runs[0]["fits"], "mean_q2", 1.0)
    t, q2 = _positive(runs[0]["series"]["t"], runs[0]["series"]["mean_q2"])
    _guide(ax_l, t, q2, slope1, "t")
    _loglog_axes(ax_l, "$t$", r"$\langle\|q(t)\|^2\rangle$")
    ax_l.legend(fontsize=7)
    if points:
        p0s = np.array([p for p, _ in points])
        ds = np.array([d for _, d in points])
        ax_r.plot(p0s, ds, "o")
        root = read_fits(spec.fits) if spec.fits else {}
        slope5 = _fit_exponent(root, "diffusion_slope", None)
        if slope5 is not None:
            xs = np.array([p0s.min(), p0s.max()])
            ax_r.plot(xs, ds[-1] * 1.5 * (xs / p0s[-1]) ** slope5, "k--",
                      lw=1.0)
            ax_r.annotate(f"$\\sim \\|p_0\\|^{{{slope5:.2f}}}$",
                          xy=(xs[0] * 1.1, ds[-1] * 0.9), fontsize=8)
    else:
        ax_r.annotate("(no diffusion fits found)", xy=(0.1, 0.5),
                      xycoords="axes fraction")
    _loglog_axes(ax_r, r"$\|p_0\|$", r"$\langle\|q(t)\|^2\rangle/t$")
    fig.tight_layout()
    return fig


def _render_pulsedd1(spec):
    runs = [run_dir_inputs(d) for d in spec.run_dirs]
    if not runs:
        raise SchemaError("pulsedd1 needs at least one run directory")
    fig, (ax_p, ax_q) = plt.subplots(1, 2, figsize=(10, 4))
    for inputs in runs:
        cols = inputs["series"]
        t, p2 = _positive(cols["t"], cols["mean_p2"])
        ax_p.plot(t, p2, ".", ms=3, label=_p0_label(inputs))
        t, q2 = _positive(cols["t"], cols["mean_q2"])
        ax_q.plot(t, q2, ".", ms=3)
    slope = _fit_exponent(runs[0]["fits"], "mean_q2", 2.0)
    t, q2 = _positive(runs[0]["series"]["t"], runs[0]["series"]["mean_q2"])
    _guide(ax_q, t, q2, slope, "t")
    _loglog_axes(ax_p, "$t$", "$p(t)^2$")
    _loglog_axes(ax_q, "$t$", "$q(t)^2$")
    ax_p.legend(fontsize=7)
    fig.tight_layout()
    return fig


def _render_d1pulsed(spec):
    runs = [run_dir_inputs(d, want_pap=(i == 0))
            for i, d in enumerate(spec.run_dirs)]
    if not runs:
        raise SchemaError("d1pulsed needs at least one run directory")
    fig, (ax_l, ax_r) = plt.subplots(1, 2, figsize=(10, 4))
    for inputs in runs:
        if "pap" in inputs:
            ax_l.plot(inputs["pap"]["t"], inputs["pap"]["p"], lw=0.8,
                      label=_p0_label(inputs))
        else:
            cols = inputs["series"]
            ax_l.plot(cols["t"], cols["mean_p1"], lw=0.8,
                      label=_p0_label(inputs))
    ax_l.set_xlabel("$t$")
    ax_l.set_ylabel("$p(t)$")
    ax_l.legend(fontsize=7)
    pap = runs[0]["pap"]
    ax_r.plot(pap["t"], pap["p"], lw=0.9, label="$p(t)$")
    ax_r.plot(pap["t"], pap["p_ap"], lw=0.9, ls="--", label="$p_{ap}(t)$")
    ax_r.set_xlabel("$t$")
    ax_r.legend(fontsize=7)
    fig.tight_layout()
    return fig


def _render_kickedd1(spec):
    if len(spec.run_dirs) != 2:
        raise SchemaError("kickedd1 needs two run directories (d=1, d=2)")
    runs = [run_dir_inputs(d) for d in spec.run_dirs]
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    for row, (inputs, dim) in enumerate(zip(runs, (1, 2))):
        cols = inputs["series"]
        for col, (ycol, ylab, key) in enumerate((
                ("mean_p2", r"$\langle\|p(t)\|^2\rangle$", "mean_p2"),
                ("mean_q2", r"$\langle\|q(t)\|^2\rangle$", "mean_q2"))):
            ax = axes[row, col]
            t, y = _positive(cols["t"], cols[ycol])
            ax.plot(t, y, ".", ms=3)
            slope = _fit_exponent(inputs["fits"], key, None)
            if slope is not None:
                _guide(ax, t, y, slope, "t")
            _loglog_axes(ax, "$t$", ylab)
            ax.set_title(f"$d={dim}$", fontsize=9)
    fig.tight_layout()
    return fig


_RENDERERS = {
    "d2pulsedp": _render_d2pulsedp,
    "d2correl": _render_d2correl,
    "d2pulseden": _render_d2pulseden,
    "softlorentz": _render_softlorentz,
    "pulsedd1": _render_pulsedd1,
    "d1pulsed": _render_d1pulsed,
    "kickedd1": _render_kickedd1,
}
