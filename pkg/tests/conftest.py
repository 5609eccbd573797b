import numpy as np
import pytest


def random_unit(rng, size=None):
    shape = (3,) if size is None else (size, 3)
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_hermitian(rng, scale=1.0):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return scale * (a + a.conj().T) / 2


def random_ket(rng):
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
