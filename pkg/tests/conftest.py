import numpy as np
import pytest

from omit_chain import kernels
from omit_chain._accel import HAVE_NUMBA

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per kernel backend by rebinding the dispatch names."""
    name = request.param
    monkeypatch.setattr(kernels, "cf_grid", getattr(kernels, f"cf_grid_{name}"))
    monkeypatch.setattr(kernels, "solve_batch", getattr(kernels, f"solve_batch_{name}"))
    return name


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """``criterion(label, ok, detail)`` records a pass/fail line for the terminal summary and prints it."""
    store = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        store.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
