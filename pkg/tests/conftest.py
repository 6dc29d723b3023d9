import pytest

from atagwarp import _accel

BACKENDS = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])

# filled by test_acceptance.record(); printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture(params=BACKENDS)
def backend(request):
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(None)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
