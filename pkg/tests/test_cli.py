import json
import math
import os

import numpy as np
import pytest

from softlorentz import cli
from softlorentz.cli import (EVENTS_HEADER, SERIES_HEADER, RunConfig,
                             emit_events_csv, emit_series_csv,
                             read_events_csv, read_series_csv)
from softlorentz.errors import ConfigError
from softlorentz.stats import ObservableSeries


class TestRunConfig:
    def test_roundtrip_identity(self):
        text = ("mode = pulsed1d\n"
                "lam = 0.3333\n"
                "p0_list = 0.5, 0.82\n"
                "seed = 99\n"
                "events = on\n")
        cfg = RunConfig.from_text(text)
        again = RunConfig.from_text(cfg.to_text())
        assert cfg == again
        assert RunConfig.from_text(again.to_text()).to_text() == again.to_text()
        assert cfg["p0_list"] == (0.5, 0.82)
        assert cfg["events"] is True

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as err:
            RunConfig.from_text("n_particles = 10\n")
        assert "n_particles" in str(err.value)

    def test_bad_value_names_key(self):
        with pytest.raises(ConfigError) as err:
            RunConfig.from_text("t_max = soon\n")
        assert "t_max" in str(err.value)

    def test_comments_and_blanks(self):
        cfg = RunConfig.from_text("# full run\n\nseed = 4  # rng\n")
        assert cfg["seed"] == 4

    def test_overrides_take_precedence(self):
        cfg = RunConfig.from_text("seed = 4\n")
        cfg.apply_overrides(["seed=11", "t_max=100.0"])
        assert cfg["seed"] == 11
        assert cfg["t_max"] == 100.0


def _tiny_series():
    t = np.array([0.0, 1.0, 10.0])
    one = np.ones(3)
    return ObservableSeries(t=t, mean_p2=2.0 * one, stderr_p2=0.1 * one,
                            mean_q2=3.0 * one, stderr_q2=0.2 * one,
                            mean_p1=one, stderr_p1=0.1 * one,
                            mean_p3=4.0 * one, stderr_p3=0.3 * one,
                            n_valid=np.array([5, 5, 5], dtype=np.int64))


class TestEmitters:
    def test_series_header_pinned(self, tmp_path):
        path = tmp_path / "series.csv"
        emit_series_csv(_tiny_series(), path)
        lines = path.read_text().splitlines()
        assert lines[0] == ("t,mean_p2,stderr_p2,mean_q2,stderr_q2,"
                            "mean_p1,mean_p3,n_valid")
        assert len(lines) == 4

    def test_empty_series_is_header_only(self, tmp_path):
        t = np.empty(0)
        s = ObservableSeries(t=t, mean_p2=t, stderr_p2=t, mean_q2=t,
                             stderr_q2=t, mean_p1=t, stderr_p1=t, mean_p3=t,
                             stderr_p3=t, n_valid=np.empty(0, dtype=np.int64))
        path = tmp_path / "series.csv"
        emit_series_csv(s, path)
        assert path.read_text() == SERIES_HEADER + "\n"

    def test_seventeen_digit_roundtrip(self, tmp_path):
        s = _tiny_series()
        s.mean_p2 = np.array([0.1, 1.0 / 3.0, math.pi])
        path = tmp_path / "series.csv"
        emit_series_csv(s, path)
        cols = read_series_csv(path)
        assert np.array_equal(cols["mean_p2"], s.mean_p2)

    def test_events_roundtrip_bit_exact(self, tmp_path, hex_lattice,
                                        cos_model):
        from softlorentz.dynamics import ParticleState, evolve_trajectory
        init = ParticleState(q=np.array([0.45, 0.0]),
                             p=np.array([0.78, 0.41]))
        res = evolve_trajectory(init, hex_lattice, cos_model, 50.0,
                                np.array([0.0]))
        path = tmp_path / "events.csv"
        emit_events_csv([res.events], path)
        back = read_events_csv(path)[0]
        ev = res.events
        assert np.array_equal(back["n"], ev.n)
        assert np.array_equal(back["t"], ev.t)
        assert np.array_equal(back["b"], ev.b)
        assert np.array_equal(back["phi0"], ev.phi0)
        assert np.array_equal(back["dpx"], ev.dpx)
        assert np.array_equal(back["dpy"], ev.dpy)
        assert np.array_equal(back["ke_in"], ev.ke_in)
        assert np.array_equal(back["ke_out"], ev.ke_out)
        assert np.array_equal(back["lat_i"], ev.lat_i)
        # one-frequency model: phi_n_1 column is empty
        raw = path.read_text().splitlines()[1]
        assert raw.split(",")[5] == ""

    def test_reservoir_cap_is_deterministic(self, tmp_path):
        idx1 = cli._reservoir_indices(1000, 100, 7, 3)
        idx2 = cli._reservoir_indices(1000, 100, 7, 3)
        assert np.array_equal(idx1, idx2)
        assert idx1.shape[0] == 100
        assert np.all(np.diff(idx1) > 0)


def _write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


class TestMain:
    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path, "bogus = 1\n")
        rc = cli.main(["simulate", cfg])
        assert rc == 2
        assert "bogus" in capsys.readouterr().err

    def test_simulate_outputs_and_determinism(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        cfg = _write_cfg(tmp_path, (
            "mode = pulsed2d\nn_traj = 6\np0_list = 0.82\nt_max = 50.0\n"
            "seed = 5\nevents = on\nevents_cap = 2000\n"))
        assert cli.main(["simulate", cfg, "--set",
                         f"output_dir={out1}"]) == 0
        assert cli.main(["simulate", cfg, "--set",
                         f"output_dir={out2}"]) == 0
        s1 = (out1 / "series.csv").read_bytes()
        s2 = (out2 / "series.csv").read_bytes()
        assert s1 == s2
        e1 = (out1 / "events.csv").read_bytes()
        e2 = (out2 / "events.csv").read_bytes()
        assert e1 == e2
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert "config" in manifest
        fits = json.loads((out1 / "fits.json").read_text())
        assert "0.82" in fits

    def test_fit_on_synthetic_power_law(self, tmp_path, capsys):
        t = np.concatenate([[0.0], np.logspace(0, 3, 40)])
        y = np.where(t > 0, t ** 0.4, 1.0)
        one = np.ones_like(t)
        s = ObservableSeries(t=t, mean_p2=y, stderr_p2=one, mean_q2=y,
                             stderr_q2=one, mean_p1=one, stderr_p1=one,
                             mean_p3=one, stderr_p3=one,
                             n_valid=np.full(t.shape, 3, dtype=np.int64))
        series_path = tmp_path / "series.csv"
        emit_series_csv(s, series_path)
        rc = cli.main(["fit", "--series", str(series_path),
                       "--window", "1.0", "1000.0",
                       "--columns", "mean_p2",
                       "--set", f"output_dir={tmp_path}"])
        assert rc == 0
        fits = json.loads((tmp_path / "fits.json").read_text())
        assert abs(fits["mean_p2"]["exponent"] - 0.4) < 1e-9

    def test_correlations_subcommand(self, tmp_path, hex_lattice, cos_model):
        cfg = _write_cfg(tmp_path, (
            "mode = pulsed2d\nn_traj = 120\np0_list = 0.82\nt_max = 200.0\n"
            "seed = 5\nevents = on\ncapture_lo = 10\ncapture_hi = 120\n"
            "max_events = 119\n"))
        out = tmp_path / "run"
        assert cli.main(["simulate", cfg, "--set",
                         f"output_dir={out}"]) == 0
        rc = cli.main(["correlations", "--events",
                       str(out / "events.csv"), "--lag-max", "10",
                       "--bins", "5", "--set", f"output_dir={out}"])
        assert rc == 0
        data = json.loads((out / "correlations.json").read_text())
        assert "b_lag" in data and len(data["b_lag"]) == 11

    def test_validate_horizon_subcommand(self, capsys):
        assert cli.main(["validate-horizon", "--n-rays", "10000"]) == 0
        assert "max free path" in capsys.readouterr().out

    def test_oracle_check_subcommand(self, tmp_path, capsys):
        rc = cli.main(["oracle-check", "--n-cases", "2",
                       "--set", f"output_dir={tmp_path}"])
        assert rc == 0
        data = json.loads((tmp_path / "oracle.json").read_text())
        assert data["max_dp_diff"] < 1e-3

    def test_exclusion_abort_exits_3(self, tmp_path, monkeypatch, capsys):
        from softlorentz.errors import ExclusionRateExceeded

        def boom(_cfg):
            raise ExclusionRateExceeded("9/10 trajectories flagged")

        monkeypatch.setattr(cli, "ensemble_run", boom)
        cfg = _write_cfg(tmp_path, "mode = pulsed2d\nn_traj = 4\n")
        rc = cli.main(["simulate", cfg, "--set",
                       f"output_dir={tmp_path / 'x'}"])
        assert rc == 3
        assert "abort" in capsys.readouterr().err

    def test_pulsed1d_single_writes_papcompare(self, tmp_path):
        cfg = _write_cfg(tmp_path, (
            "mode = pulsed1d\nn_traj = 1\np0_list = 2.0\nt_max = 50.0\n"
            "lam = 1.0\nq_star = 0.33333333333333331\nseed = 1\n"))
        out = tmp_path / "pap"
        assert cli.main(["simulate", cfg, "--set",
                         f"output_dir={out}"]) == 0
        lines = (out / "papcompare.csv").read_text().splitlines()
        assert lines[0] == "t,p,p_ap,deviation"
        assert len(lines) > 100
