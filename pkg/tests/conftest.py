import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pvcsp import data_path, load_structure  # noqa: E402

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def ex1():
    A = load_structure(data_path("ex1_A.vcsp"))
    B = load_structure(data_path("ex1_B.vcsp"))
    I = load_structure(data_path("ex1_I.vcsp"))
    return A, B, I


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
