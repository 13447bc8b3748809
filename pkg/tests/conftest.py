import numpy as np
import pytest

from pureqm.hilbert import StateVector, SubsystemLayout


def random_state(rng, layout):
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector.normalized(layout, v)


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_qubit(rng, name="S"):
    return random_state(rng, SubsystemLayout.of((name, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper()[:4], props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for crit, status, detail in sorted(lines, key=lambda t: int(t[0].split()[0])):
            terminalreporter.write_line(f"{status}  criterion {crit}  {detail}")
