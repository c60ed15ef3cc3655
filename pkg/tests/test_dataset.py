import numpy as np
import pytest

from sparsetune.core.dataset import Dataset, Support, load_dataset, load_signal
from sparsetune.errors import DataError, DimensionMismatchError, DomainError


def test_dataset_validation():
    with pytest.raises(DimensionMismatchError):
        Dataset(np.ones((3, 2)), np.ones(4))
    with pytest.raises(DataError):
        Dataset(np.array([[1.0], [np.nan]]), np.ones(2))
    with pytest.raises(DomainError):
        Dataset(np.ones((1, 2)), np.ones(1))


def test_support_is_sorted_and_unique():
    assert Support((3, 1, 2)).indices == (1, 2, 3)
    with pytest.raises(DomainError):
        Support((1, 1))
    with pytest.raises(DomainError):
        Support.from_indices([0, 5], p=5)
    assert Support.from_beta(np.array([0.0, 1e-14, -2.0])).to_list() == [2]


def test_normalized_columns(rng):
    X = rng.standard_normal((10, 3))
    X[:, 1] = 0.0
    data, scale = Dataset(X, rng.standard_normal(10)).normalized()
    np.testing.assert_allclose(data.column_norms[[0, 2]], 1.0, atol=1e-12)
    assert scale[1] == 1.0
    beta = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(X @ Dataset.to_original_scale(beta, scale), data.X @ beta)


def test_load_dataset_response_column(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,b,y\n1,2,3\n4,5,6\n7,8,10\n", encoding="utf8")
    data = load_dataset(path, response_col="y", header=True)
    assert (data.n, data.p) == (3, 2)
    np.testing.assert_array_equal(data.Y, [3, 6, 10])
    by_index = load_dataset(path, response_col=-1, header=True)
    np.testing.assert_array_equal(by_index.X, data.X)


def test_load_dataset_response_file(tmp_path):
    design = tmp_path / "x.csv"
    design.write_text("1,2\n3,4\n5,6\n", encoding="utf8")
    response = tmp_path / "y.csv"
    response.write_text("1\n2\n", encoding="utf8")
    with pytest.raises(DimensionMismatchError):
        load_dataset(design, response_path=response)
    with pytest.raises(DataError):
        load_dataset(design, response_col=0, response_path=response)


def test_malformed_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,abc\n", encoding="utf8")
    with pytest.raises(DataError):
        load_dataset(path, response_col=0)
    with pytest.raises(DataError):
        load_dataset(tmp_path / "missing.csv", response_col=0)


def test_load_signal(tmp_path):
    path = tmp_path / "signal.csv"
    path.write_text("1\n2\n3\n", encoding="utf8")
    np.testing.assert_array_equal(load_signal(path), [1, 2, 3])
    wide = tmp_path / "wide.csv"
    wide.write_text("1,2\n3,4\n", encoding="utf8")
    with pytest.raises(DimensionMismatchError):
        load_signal(wide)
