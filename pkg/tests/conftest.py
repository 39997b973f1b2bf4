import numpy as np
import pytest

from syndloss import _backend
from syndloss.linear_code import ParityCheckMatrix, load_code

HAMMING_ROWS = [[1, 1, 0, 1, 1, 0, 0],
                [1, 0, 1, 1, 0, 1, 0],
                [0, 1, 1, 1, 0, 0, 1]]
# received word with one error (third position) for the all-zeros codeword
WORKED_Y = np.array([1.67, 1.42, -0.03, 1.03, 0.88, 1.98, 0.44])

_acceptance_lines = []


@pytest.fixture(scope="session")
def hamming():
    return ParityCheckMatrix.from_dense(HAMMING_ROWS, name="hamming_7_4")


@pytest.fixture(scope="session")
def ldpc16():
    return load_code("ldpc_16_8")


@pytest.fixture(scope="session")
def repetition2():
    return ParityCheckMatrix.from_dense([[1, 1]], name="rep2")


@pytest.fixture(params=_backend.available_backends())
def kernels(request):
    return _backend.get_kernels(request.param)


@pytest.fixture(scope="session")
def acceptance_report():
    def record(criterion, passed, detail):
        _acceptance_lines.append(f"{criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
