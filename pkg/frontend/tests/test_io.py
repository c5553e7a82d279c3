import math

import numpy as np
import pytest

from lorentzfigs.io import (SchemaError, read_events, read_series,
                            reconstruct_directions)

from conftest import synthetic_chain, write_events, write_series


def test_read_series(tmp_path):
    t = np.array([0.0, 1.0, 10.0])
    write_series(tmp_path / "series.csv", t, t + 1.0, 2.0 * t + 1.0)
    cols = read_series(tmp_path / "series.csv")
    assert np.array_equal(cols["t"], t)
    assert cols["n_valid"].dtype == np.int64


def test_header_mismatch_names_column(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("t,mean_p2,stderr_p2,median_q2,stderr_q2,"
                    "mean_p1,mean_p3,n_valid\n")
    with pytest.raises(SchemaError) as err:
        read_series(path)
    assert "mean_q2" in str(err.value)
    assert "median_q2" in str(err.value)


def test_missing_column_named(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("t,mean_p2\n")
    with pytest.raises(SchemaError) as err:
        read_series(path)
    assert "stderr_p2" in str(err.value)


def test_events_split_and_empty_phi(tmp_path):
    rows, _dirs = synthetic_chain(5)
    write_events(tmp_path / "events.csv", {0: rows, 3: rows})
    per = read_events(tmp_path / "events.csv")
    assert sorted(per) == [0, 3]
    assert per[0]["n"].shape[0] == 5
    assert math.isnan(per[0]["phi_n_1"][0])


def test_reconstruct_directions_recovers_heading(tmp_path):
    rows, dirs = synthetic_chain(200, theta0=1.234)
    write_events(tmp_path / "events.csv", {0: rows})
    per = read_events(tmp_path / "events.csv")
    rec = reconstruct_directions(per[0])
    assert np.abs(rec - dirs).max() < 1e-9


def test_reconstruct_needs_enough_events(tmp_path):
    rows, _dirs = synthetic_chain(2)
    write_events(tmp_path / "events.csv", {0: rows})
    per = read_events(tmp_path / "events.csv")
    with pytest.raises(SchemaError):
        reconstruct_directions(per[0])
