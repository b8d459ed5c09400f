import numpy as np
import pytest

import sample_instances as si


@pytest.fixture
def corner_box():
    return si.corner_box()


@pytest.fixture
def rotation_scale():
    return si.rotation_scale()


@pytest.fixture
def switched_pair():
    return si.switched_pair()


@pytest.fixture
def pure_rotation():
    return si.pure_rotation()


@pytest.fixture
def zero_dynamics():
    return si.zero_dynamics()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
