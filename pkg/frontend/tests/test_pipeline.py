"""End-to-end: drive the simulator CLI, render every preset from its files.

The simulator is consumed strictly through its command line and output
files.  Skipped when the `softlorentz` executable is not on PATH.
"""

import json
import os
import shutil
import subprocess

import pytest

from lorentzfigs.figures import FigureSpec, render

SOFTLORENTZ = shutil.which("softlorentz")

pytestmark = pytest.mark.skipif(SOFTLORENTZ is None,
                                reason="softlorentz CLI not installed")


def _run(args):
    proc = subprocess.run([SOFTLORENTZ] + args, capture_output=True,
                          text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")

    def sim(outdir, **keys):
        args = ["simulate", "--set", f"output_dir={outdir}"]
        for k, v in keys.items():
            args += ["--set", f"{k}={v}"]
        _run(args)

    out = {}
    # 2D pulsed trio (d2pulsedp)
    d = root / "pulsed2d"
    sim(d, mode="pulsed2d", n_traj=100, t_max=1e4,
        p0_list="0.5, 0.82, 1.36", seed=3)
    out["pulsed2d"] = [str(d / f"p0_{p}") for p in ("0.5", "0.82", "1.36")]
    # correlation window (d2correl)
    d = root / "correl"
    sim(d, mode="pulsed2d", n_traj=300, t_max=3e3, p0_list="0.82", seed=4,
        events="on", capture_lo=2000, capture_hi=2051, max_events=2050)
    out["correl_events"] = str(d / "events.csv")
    # single long trajectory (d2pulseden)
    d = root / "single"
    sim(d, mode="pulsed2d", n_traj=1, t_max=3e3, p0_list="2.0", seed=5,
        events="on", capture_lo=1, capture_hi=1602, max_events=1601)
    out["single_events"] = str(d / "events.csv")
    # elastic sweep (softlorentz)
    d = root / "elastic"
    sim(d, mode="elastic2d", time_profile="constant", lam=0.12005,
        n_traj=48, t_max=3e4, p0_list="1.5, 2.0, 2.7, 3.8", seed=6,
        fit_lo=3e3, fit_hi=3e4)
    out["elastic"] = [str(d / f"p0_{p}") for p in ("1.5", "2", "2.7", "3.8")]
    out["elastic_fits"] = str(d / "fits.json")
    # 1D ensembles (pulsedd1)
    d = root / "pulsed1d"
    sim(d, mode="pulsed1d", lam=1.0, n_traj=16, t_max=1e4,
        p0_list="0.5, 1.0, 2.0", seed=7)
    out["pulsed1d"] = [str(d / f"p0_{p}") for p in ("0.5", "1", "2")]
    # 1D single trajectories with the approximant trace (d1pulsed)
    out["d1pulsed"] = []
    for p0 in ("2.0", "1.0", "0.5"):
        d = root / f"pap{p0}"
        sim(d, mode="pulsed1d", lam=1.0, n_traj=1, t_max=200.0,
            p0_list=p0, seed=8)
        out["d1pulsed"].append(str(d))
    # kicked rotor rows (kickedd1)
    out["kicked"] = []
    for dim in (1, 2):
        d = root / f"kicked{dim}"
        sim(d, mode="kicked", lam=10.0, kick_dim=dim, n_traj=200,
            t_max=1e4, p0_list="0.82", seed=9, fit_lo=100.0, fit_hi=1e4)
        out["kicked"].append(str(d))
    return out


@pytest.fixture(scope="module")
def figdir(tmp_path_factory):
    return tmp_path_factory.mktemp("figs")


def _check(path):
    assert os.path.exists(path)
    assert os.path.getsize(path) > 1000


def test_render_d2pulsedp(outputs, figdir):
    _check(render(FigureSpec("d2pulsedp", run_dirs=outputs["pulsed2d"],
                             events=outputs["correl_events"],
                             output=str(figdir / "d2pulsedp.pdf"))))


def test_render_d2correl(outputs, figdir):
    _check(render(FigureSpec("d2correl", events=outputs["correl_events"],
                             output=str(figdir / "d2correl.pdf"))))


def test_render_d2pulseden(outputs, figdir):
    _check(render(FigureSpec("d2pulseden", events=outputs["single_events"],
                             output=str(figdir / "d2pulseden.pdf"))))


def test_render_softlorentz(outputs, figdir):
    _check(render(FigureSpec("softlorentz", run_dirs=outputs["elastic"],
                             fits=outputs["elastic_fits"],
                             output=str(figdir / "softlorentz.pdf"))))
    # the cross-speed guide really came from fits.json
    fits = json.load(open(outputs["elastic_fits"]))
    assert "diffusion_slope" in fits


def test_render_pulsedd1(outputs, figdir):
    _check(render(FigureSpec("pulsedd1", run_dirs=outputs["pulsed1d"],
                             output=str(figdir / "pulsedd1.pdf"))))


def test_render_d1pulsed(outputs, figdir):
    _check(render(FigureSpec("d1pulsed", run_dirs=outputs["d1pulsed"],
                             output=str(figdir / "d1pulsed.pdf"))))


def test_render_kickedd1(outputs, figdir):
    _check(render(FigureSpec("kickedd1", run_dirs=outputs["kicked"],
                             output=str(figdir / "kickedd1.pdf"))))
