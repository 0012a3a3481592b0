import random

import pytest

from fo2e.sampling import seed


@pytest.fixture
def rng():
    return random.Random(seed())


CRITERIA: list[str] = []


@pytest.fixture
def report():
    def record(n, ok, text, seconds):
        CRITERIA.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {text} ({seconds:.2f}s)")
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
