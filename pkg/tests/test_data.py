import numpy as np
import pytest

from qkcompose import data

import oracles


def test_parity_observable_matches_kron():
    Z = np.diag([1.0, -1.0])
    np.testing.assert_array_equal(data.parity_observable(3), np.diag(np.kron(np.kron(Z, Z), Z)))


def test_adhoc_unitary_is_unitary_and_seeded():
    V = data.adhoc_unitary(3, 5)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(8), atol=1e-12)
    np.testing.assert_array_equal(V, data.adhoc_unitary(3, 5))


@pytest.mark.parametrize("feature_map", ["product", "zz"])
def test_adhoc_labels_against_expectation_oracle(feature_map):
    ds = data.adhoc_generate(3, 0.3, 200, seed=2, feature_map=feature_map)
    V = data.adhoc_unitary(3, 2)
    M = V.conj().T @ np.diag(data.parity_observable(3)) @ V
    for x, y in zip(ds.X[:60], ds.y[:60]):
        if feature_map == "product":
            psi = oracles.encode(x)
        else:
            psi = oracles.zz_state(x)
        e = np.real(psi.conj() @ M @ psi)
        assert abs(e) >= 0.3
        assert y == int(e > 0)


def test_zz_states_match_dense():
    x = np.array([0.3, 1.2, 2.5])
    np.testing.assert_allclose(data.zz_feature_states(x)[0], oracles.zz_state(x), atol=1e-13)


def test_adhoc_balanced_grid_and_deterministic():
    ds = data.adhoc_generate(3, 0.3, 200, seed=0)
    assert abs(ds.y.mean() - 0.5) <= 0.1
    assert len(ds) == 200
    assert np.unique(ds.X, axis=0).shape[0] == 200
    step = 2 * np.pi / 30
    np.testing.assert_allclose(ds.X / step, np.round(ds.X / step), atol=1e-9)
    assert ds.X.min() >= 0 and ds.X.max() < 2 * np.pi
    other = data.adhoc_generate(3, 0.3, 200, seed=0)
    np.testing.assert_array_equal(ds.X, other.X)
    np.testing.assert_array_equal(ds.y, other.y)


def test_adhoc_errors():
    with pytest.raises(ValueError):
        data.adhoc_generate(4, 0.3, 10)
    with pytest.raises(ValueError):
        data.adhoc_generate(2, 0.0, 10)
    with pytest.raises(data.GenerationError):
        data.adhoc_generate(2, 0.99, 500, grid_size=10)


def test_synthetic_4d():
    ds = data.synthetic_4d_generate(300, seed=1)
    assert np.all(ds.X >= data.SYNTH_LOW) and np.all(ds.X <= data.SYNTH_HIGH)
    np.testing.assert_array_equal(ds.y, data.synthetic_4d_label(ds.X))
    assert 0 < ds.y.mean() < 1
    np.testing.assert_array_equal(ds.X, data.synthetic_4d_generate(300, seed=1).X)
    with pytest.raises(ValueError):
        data.synthetic_4d_generate(3)


def test_synthetic_label_formula_by_hand():
    # t = (1.5 + 1.7) / (sqrt2 * (0.8 + 1.7)), mu = 0.8 / 1.7, no sine term
    x = np.array([[1.5, 0.8, 0.8, 1.7]])
    t = 3.2 / (np.sqrt(2) * 2.5)
    assert data.synthetic_4d_label(x)[0] == int(t - 0.4 / 1.7 > 0.64)


def test_split_sizes_disjoint_and_seeded():
    ds = data.synthetic_4d_generate(500, 0)
    sp = data.split(ds, 100, 100, seed=3)
    assert (sp.train.size, sp.validation.size, sp.test.size) == (100, 100, 300)
    allidx = np.concatenate([sp.train, sp.validation, sp.test])
    assert np.unique(allidx).size == 500
    assert sp.digest() == data.split(ds, 100, 100, seed=3).digest()
    assert sp.digest() != data.split(ds, 100, 100, seed=4).digest()
    with pytest.raises(data.DataError):
        data.split(ds, 300, 200)


def test_train_validation_excludes_test():
    ds = data.synthetic_4d_generate(50, 0)
    sp = data.split(ds, 10, 10, seed=0)
    tv = data.train_validation(ds, sp)
    assert not hasattr(tv, "X_test")
    np.testing.assert_array_equal(tv.X_valid, ds.X[sp.validation])


def test_scaling_modes():
    ds = data.synthetic_4d_generate(100, 0)
    idx = np.arange(40)
    assert data.scale_features(ds, "none") is ds
    s = data.scale_features(ds, "to_0_2pi", fit_indices=idx)
    np.testing.assert_allclose(s.X[idx].min(0), 0, atol=1e-12)
    np.testing.assert_allclose(s.X[idx].max(0), 2 * np.pi * (1 - 1e-6))
    z = data.scale_features(ds, "standardize", fit_indices=idx)
    np.testing.assert_allclose(z.X[idx].mean(0), 0, atol=1e-12)
    np.testing.assert_allclose(z.X[idx].std(0), 1)
    const = data.Dataset(np.c_[np.ones(4), np.arange(4.0)], [0, 1, 0, 1])
    with pytest.raises(data.DataError):
        data.scale_features(const, "standardize")
    with pytest.raises(ValueError):
        data.scale_features(ds, "bogus")


def test_dataset_validation_and_json():
    ds = data.Dataset(np.arange(6.0).reshape(3, 2), [0, 1, 1], "t", {"seed": 1})
    back = data.Dataset.from_json(ds.to_json())
    np.testing.assert_array_equal(back.X, ds.X)
    assert back.provenance == {"seed": 1}
    with pytest.raises(data.DataError):
        data.Dataset(np.zeros((2, 2)), [0, 2])
    with pytest.raises(data.DataError):
        data.Dataset(np.zeros((2, 2)), [1, 1])


def write(tmp_path, text):
    p = tmp_path / "d.csv"
    p.write_text(text)
    return p


def test_load_csv_well_formed(tmp_path):
    ds = data.load_csv(write(tmp_path, "a,b,label\n1,2,0\n3,4,1\n5,6,1\n"), "label")
    assert len(ds) == 3
    np.testing.assert_array_equal(ds.X, [[1, 2], [3, 4], [5, 6]])


def test_load_csv_header_order_independent(tmp_path):
    a = data.load_csv(write(tmp_path, "a,b,label\n1,2,0\n3,4,1\n"), "label", ["b", "a"])
    b = data.load_csv(write(tmp_path, "label,b,a\n0,2,1\n1,4,3\n"), "label", ["b", "a"])
    np.testing.assert_array_equal(a.X, b.X)


@pytest.mark.parametrize("text,match", [
    ("a,label\n1,0\n2,2\n", "row 3, column 'label'"),
    ("a,label\nx,0\n2,1\n", "row 2, column 'a'"),
    ("a,label\n,0\n2,1\n", "missing value at row 2"),
    ("a,label\n1,0,5\n", "row 2 has 3 cells"),
    ("a,b\n1,0\n", "no label column"),
    ("", "empty"),
])
def test_load_csv_errors(tmp_path, text, match):
    with pytest.raises(data.IngestionError, match=match):
        data.load_csv(write(tmp_path, text), "label")


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(data.MissingFileError, match="nope.csv"):
        data.load_csv(tmp_path / "nope.csv", "label")
