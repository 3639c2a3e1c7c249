import numpy as np
import pytest

from mmopp import model, slowfast


@pytest.fixture(scope="session")
def p23():
    return model.baseline_params(h=2.3)


@pytest.fixture(scope="session")
def p24():
    return model.baseline_params(h=2.4)


@pytest.fixture(scope="session")
def noise_default():
    return model.NoiseParams(1e-6, 3e-3, 3e-3)


@pytest.fixture(scope="session")
def node23(p23):
    fc = slowfast.fold_curve(p23)
    return slowfast.find_folded_singularity(p23, 0.5 * (fc.a + fc.b))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def random_interior_states(rng, n, lo=0.01, hi=0.9):
    return rng.uniform(lo, hi, size=(n, 3))
