import json
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracle():
    return json.loads((DATA / "oracle.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20101)


def random_density_matrix(rng, dim, rank=None):
    rank = rank or dim
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim):
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one verdict line; the test still asserts on its own."""

    def record(number, title, checks, detail=""):
        ok = all(checks.values())
        parts = ", ".join(f"{k} {'ok' if v else 'NOT MET'}" for k, v in checks.items())
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} [{parts}]"
        if detail:
            line += f" ({detail})"
        _CRITERIA[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
