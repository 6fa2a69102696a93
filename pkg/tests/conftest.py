import numpy as np
import pytest

from sdpd.process_sim import CrossMode, ErrorSpec, SdpdModel, random_model
from sdpd.spatial_weights import Normalization, SpatialWeightMatrix, gen_spatial_matrix

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def w3_hand():
    """A fixed 3x3 weight matrix, L1 rows."""
    w = np.array([[0.0, 0.5, 0.5], [0.7, 0.0, 0.3], [0.2, 0.8, 0.0]])
    return SpatialWeightMatrix(w, Normalization.L1)


@pytest.fixture
def model3_indep(w3_hand):
    spec = ErrorSpec(sigma=[1.0, 0.8, 1.2], cross_mode=CrossMode.INDEPENDENT, seed=11)
    return SdpdModel(w3_hand, [0.4, -0.3, 0.6], [0.1, 0.5, -0.4], spec)


@pytest.fixture
def model3_cf(w3_hand):
    spec = ErrorSpec(sigma=[1.0, 0.8, 1.2], cross_mode=CrossMode.COMMON_FACTOR, seed=11)
    return SdpdModel(w3_hand, [0.4, -0.3, 0.6], [0.1, 0.5, -0.4], spec)


@pytest.fixture
def model10():
    W = gen_spatial_matrix("W1", 10, seed=7)
    return random_model(W, seed=8)
