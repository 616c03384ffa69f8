import pytest

from musweep import kernels

import modelgen

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def example():
    return modelgen.example_model()


@pytest.fixture(params=kernels.available())
def backend(request):
    prev = kernels.use(request.param)
    yield request.param
    kernels.use(prev)


@pytest.fixture(scope="session")
def report():
    """Record the one-line verdict of an acceptance criterion."""

    def emit(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        _ACCEPTANCE[number] = line
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
