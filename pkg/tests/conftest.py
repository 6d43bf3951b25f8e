import numpy as np
import pytest

from angemb.linalg import DataMatrix, SphereData, make_subspace


def random_unit_columns(D, m, seed=0) -> SphereData:
    rng = np.random.default_rng(seed)
    cols = rng.standard_normal((D, m))
    return SphereData.from_units(cols / np.linalg.norm(cols, axis=0))


def random_orthonormal(D, d, seed=0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.linalg.qr(rng.standard_normal((D, d)))[0]


def as_subspace(basis) -> "object":
    basis = np.asarray(basis, dtype=float)
    return make_subspace(basis, np.arange(basis.shape[1], 0, -1, dtype=float))


def data(values) -> DataMatrix:
    return DataMatrix.from_array(values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
