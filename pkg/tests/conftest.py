import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phaseshell import GridSpec, ScalarField


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def spec4():
    return GridSpec(4, 4, 4, 0.25)


@pytest.fixture
def spec8():
    return GridSpec(8, 8, 8, 0.125)


def random_field(spec, rng, scale=1.0):
    return ScalarField.from_interior(spec, scale * rng.standard_normal(spec.shape))
