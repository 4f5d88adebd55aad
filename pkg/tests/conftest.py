import numpy as np
import pytest

from levicav import build_linear_dynamics, derive, load_bundled

_criterion_lines: list[str] = []


def record_criterion(line: str) -> None:
    """Collect acceptance one-liners for the end-of-run summary."""
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def design_config():
    return load_bundled("design")


@pytest.fixture(scope="session")
def experiment_config():
    return load_bundled("experiment")


@pytest.fixture(scope="session")
def design_derived(design_config):
    return derive(design_config)


@pytest.fixture(scope="session")
def design_dynamics(design_config):
    return build_linear_dynamics(design_config)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260819)
