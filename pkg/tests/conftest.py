import numpy as np
import pytest

from qfluct.channels import build_covariant, build_incovariant
from qfluct.fluctuation import PHOTONIC_P, PHOTONIC_S, ProcessContext, photonic_initial_state

_acceptance_lines = []


@pytest.fixture(scope="session")
def incov():
    return build_incovariant(PHOTONIC_P, PHOTONIC_S)


@pytest.fixture(scope="session")
def cov():
    return build_covariant(PHOTONIC_P, PHOTONIC_S)


@pytest.fixture(scope="session")
def incov_ctx(incov):
    return ProcessContext.build(incov, photonic_initial_state())


@pytest.fixture(scope="session")
def cov_ctx(cov):
    return ProcessContext.build(cov, photonic_initial_state())


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        status = "PASS" if rep.passed else "FAIL"
        _acceptance_lines.append(f"criterion {marker.args[0]:>2}: {status}  {marker.args[1]}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
