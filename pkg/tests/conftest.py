"""
Shared fixtures for the holonomy test suite.
"""

import json
import math

import pytest

from holonomy.core.blowup import Ray
from holonomy.data.scenes import (
    fibered_scene,
    figure_eight_scene,
    period_three_scene,
    scene_data,
)

# Developed lattice of the cat map: D is a rotation, so D·e0 and D·e1 are
# orthonormal. Points quoted in tests are computed from these.
D_E0 = (0.5257311121191336, 0.8506508083520399)
D_E1 = (-0.8506508083520399, 0.5257311121191336)

LAM = (3 + math.sqrt(5)) / 2


@pytest.fixture(scope="session")
def lam():
    return LAM


@pytest.fixture(scope="session")
def fig8():
    """Figure-eight bundle punctured at the fixed point, slope (5; 1)."""
    return figure_eight_scene()


@pytest.fixture(scope="session")
def fibered():
    return fibered_scene()


@pytest.fixture(scope="session")
def period3():
    return period_three_scene()


@pytest.fixture
def ray():
    """Ray based off every singularity, used for section sweeps."""
    return Ray((math.sqrt(2) - 1.0, (math.sqrt(5) - 2.0) / 3.0), 0.0)


@pytest.fixture
def scene_file(tmp_path):
    """Write a canonical scene to a JSON file and return its path."""

    def _write(key="figure_eight", name=None):
        path = tmp_path / f"{name or key}.json"
        path.write_text(json.dumps(scene_data(key)))
        return path

    return _write
