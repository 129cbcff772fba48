"""Shared fixtures: certified coefficient pipelines for the three standard
test potentials, built once per session at 256-bit target precision."""

from dataclasses import dataclass

import pytest
from mpmath import mp

from orthoflow import (
    BandedOperator,
    CertifiedRecurrence,
    Potential,
    RecurrenceCoefficients,
    WaveState,
    apply_polynomial,
    certified_recurrence,
    hermite_potential,
    quartic_potential,
    working,
)

PREC = 256
AMBIENT = PREC + 64

# acceptance summary lines, printed after the test run
_CRITERIA = []


def record_criterion(num, desc, ok, detail=""):
    """Append one pass/fail line for the acceptance summary, then assert."""
    status = "PASS" if ok else "FAIL"
    extra = f"  [{detail}]" if detail else ""
    line = f"[{status}] criterion {num}: {desc}{extra}"
    _CRITERIA.append((num, line))
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)


@dataclass(frozen=True)
class Pipe:
    """One potential's full pipeline: coefficients, operator, wavefunctions."""

    p: Potential
    cert: CertifiedRecurrence
    rc: RecurrenceCoefficients
    Q: BandedOperator
    vpq: BandedOperator
    state: WaveState


def build_pipe(p: Potential, N: int = 22, precision: int = PREC) -> Pipe:
    with working(precision + 64):
        cert = certified_recurrence(p, N, precision)
        Q = BandedOperator.from_recurrence(cert.rc)
        vpq = apply_polynomial(p.vprime_coeffs(), Q)
        state = WaveState(p, cert.rc)
    return Pipe(p, cert, cert.rc, Q, vpq, state)


@pytest.fixture(scope="session", autouse=True)
def _ambient_precision():
    """High ambient precision for all test-side arithmetic."""
    old = mp.prec
    mp.prec = AMBIENT
    yield
    mp.prec = old


@pytest.fixture(scope="session")
def hermite():
    return build_pipe(hermite_potential())  # V = x^2


@pytest.fixture(scope="session")
def quartic():
    return build_pipe(quartic_potential())  # V = x^4/4


@pytest.fixture(scope="session")
def mixed():
    return build_pipe(Potential({2: "1", 3: "0.3", 4: "1"}))


@pytest.fixture(scope="session")
def all_pipes(hermite, quartic, mixed):
    return (hermite, quartic, mixed)
