"""Shared beam parameter sets and the acceptance summary hook."""

import numpy as np
import pytest


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])


@pytest.fixture
def record_criterion(request):
    def record(num, title, ok, detail):
        line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        request.config.stash[_ACCEPTANCE].append((num, line))
        print(line)

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
