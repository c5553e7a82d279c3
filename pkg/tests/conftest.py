import numpy as np
import pytest

from softlorentz import dynamics, lattice


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT_LINES
    except Exception:
        return
    if REPORT_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in REPORT_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def hex_lattice():
    return lattice.build_lattice("hex2d", 0.45)


@pytest.fixture(scope="session")
def cos_model():
    return dynamics.ScattererModel(lam=1.0 / 6.0, time_profile="cos")


@pytest.fixture(scope="session")
def elastic_model():
    return dynamics.ScattererModel(lam=0.49 ** 2 / 2.0,
                                   time_profile="constant")


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(12345))
