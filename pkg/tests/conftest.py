import numpy as np
import pytest

from geokanon import StudyArea, SynthSpec
from geokanon.synth import generate

EPS = 1e-9

# pass/fail lines of the acceptance module, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def area():
    return StudyArea(0.0, 0.0, 2000.0, 2000.0)


@pytest.fixture
def small_world(area):
    """Universe of 1,500 addresses with 150 sampled participants."""
    spec = SynthSpec(area, 1500, 150, attributes={"sex": {"f": 1, "m": 1}}, seed=11)
    return generate(spec)


def pairwise(a, b):
    """Distance matrix by broadcasting; the independent oracle for counts."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
