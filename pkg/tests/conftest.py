import numpy as np
import pytest

from circlaw.ensemble import EnsembleSpec, gaussian, sample_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def gauss8():
    return sample_matrix(EnsembleSpec(8, gaussian(), 1.0, 3))


def pytest_configure(config):
    config.acceptance_results = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "acceptance_results", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(results):
        terminalreporter.write_line(line)
