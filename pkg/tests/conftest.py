import numpy as np
import pytest

from wgmbiphoton.model import paper_device, paper_drive
from wgmbiphoton.pump import steady_state


@pytest.fixture(scope="session")
def device():
    return paper_device()


@pytest.fixture(scope="session")
def drive(device):
    return paper_drive(device)


@pytest.fixture(scope="session")
def pump(device, drive):
    return steady_state(device, drive)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@pytest.fixture
def acceptance(capsys):
    """Record and print one pass/fail line for an acceptance criterion."""

    def report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
