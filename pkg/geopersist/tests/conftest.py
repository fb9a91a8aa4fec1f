"""Pytest fixtures for geopersist tests."""
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

TOOL_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(TOOL_DIR))

from sampling import DistanceMatrix, enrich_with_critical_points, sample_uniform  # noqa: E402
from spaces import Circle, FlatTorus, MetricGraph, WedgeOfCircles  # noqa: E402


@pytest.fixture
def temp_dir():
    """Temporary directory that is cleaned up after the test."""
    with tempfile.TemporaryDirectory() as d:
        yield Path(d)


@pytest.fixture
def models_dir():
    """The example model description files shipped with the tool."""
    return TOOL_DIR / "models"


@pytest.fixture
def circle():
    return Circle(1.0)


@pytest.fixture
def wedge():
    return WedgeOfCircles([1.0, 2.0])


@pytest.fixture
def torus():
    return FlatTorus(1.0, 1.0)


@pytest.fixture
def graph():
    """Unit triangle plus a parallel edge of length 1.5 between vertices 0 and 1."""
    return MetricGraph(3, [[0, 1, 1.0], [1, 2, 1.0], [2, 0, 1.0], [0, 1, 1.5]])


@pytest.fixture
def circle_sample(circle):
    """A jittered 0.05-dense sample of the unit circle."""
    return sample_uniform(circle, 0.05, seed=0)


@pytest.fixture
def enriched_circle_sample(circle, circle_sample):
    return enrich_with_critical_points(circle, circle_sample, circle.critical_circles())


@pytest.fixture
def square_matrix():
    """Four points on a 4-cycle: sides 1, diagonals 2."""
    return DistanceMatrix(np.array([
        [0.0, 1.0, 2.0, 1.0],
        [1.0, 0.0, 1.0, 2.0],
        [2.0, 1.0, 0.0, 1.0],
        [1.0, 2.0, 1.0, 0.0],
    ]))


@pytest.fixture
def sample_file(temp_dir, circle, circle_sample):
    """Path to a saved circle sample."""
    from sampling import save_sample

    return save_sample(circle, circle_sample, temp_dir / "circle_sample.json")
