
import numpy as np
import pytest

from dipmsc import kernels

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num} [{name}]: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def record():
    def _record(num, name, ok, detail):
        ACCEPTANCE.append((num, name, bool(ok), detail))
        print(f"criterion {num} [{name}]: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return _record


BACKEND_NAMES = sorted(kernels.BACKENDS)


@pytest.fixture(params=BACKEND_NAMES)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
