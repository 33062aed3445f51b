import numpy as np
import pytest

from corpus import random_log, toy_log

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def toy():
    return toy_log()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_logs():
    rng = np.random.default_rng(2024)
    return [random_log(rng) for _ in range(40)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
