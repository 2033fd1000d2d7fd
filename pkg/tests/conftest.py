import numpy as np
import pytest

from hyperbell.kerr import KerrConfig

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20100318)


@pytest.fixture
def cfg():
    return KerrConfig()


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the terminal summary."""
    name = request.node.name
    ACCEPTANCE_RESULTS[name] = (False, "did not finish")

    def record(detail: str):
        ACCEPTANCE_RESULTS[name] = (True, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
