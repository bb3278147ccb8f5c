import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from momentlock import _backend  # noqa: E402

BACKENDS = [("python", _backend.python_kernels)]
if _backend.compiled_kernels is not None:
    BACKENDS.append(("cython", _backend.compiled_kernels))


@pytest.fixture(params=BACKENDS, ids=[name for name, _ in BACKENDS])
def kernel_module(request, monkeypatch):
    """Run a test once per available kernel backend."""
    from momentlock import maxent

    name, mod = request.param
    monkeypatch.setattr(maxent, "kernels", mod)
    return mod


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""
    def _record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
