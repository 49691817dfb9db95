import numpy as np
import pytest

from gqc import metrology
from gqc.estimation import PAULI
from gqc.metrology import Hamiltonian
from gqc.states import PureState

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def log(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def corrupted_gqc(monkeypatch):
    """Mutation fixture: the mixed-state pair summand with its sign flipped."""
    original = metrology._pair_summand_sums
    monkeypatch.setattr(metrology, "_pair_summand_sums", lambda x, gap2: -original(x, gap2))


@pytest.fixture
def plus():
    return PureState.normalized([1, 1])


@pytest.fixture
def h_spin():
    return Hamiltonian.from_matrix(PAULI["Z"] / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
