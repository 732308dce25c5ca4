import numpy as np
import pytest
from hypothesis import given, strategies as st

from pvqc import data
from pvqc.prng import Pcg32


def test_moons_noiseless_anchors():
    ds = data.make_moons(100, 0.0, Pcg32(0))
    np.testing.assert_array_equal(ds.features[0], [1.0, 0.0])
    assert ds.labels[0] == 0
    np.testing.assert_array_equal(ds.features[50], [0.0, 0.5])
    assert ds.labels[50] == 1
    # last outer point sits at t = pi
    np.testing.assert_allclose(ds.features[49], [-1.0, 0.0], atol=1e-15)


def test_circles_noiseless_anchors():
    ds = data.make_circles(100, 0.0, Pcg32(0), factor=0.5)
    np.testing.assert_array_equal(ds.features[50], [0.5, 0.0])
    assert ds.labels[50] == 1
    assert np.max(np.abs(np.linalg.norm(ds.features[:50], axis=1) - 1)) < 1e-12
    np.testing.assert_allclose(np.linalg.norm(ds.features[50:], axis=1), 0.5, atol=1e-12)


def test_generator_errors():
    with pytest.raises(ValueError):
        data.make_moons(7, 0.1, Pcg32(0))
    with pytest.raises(ValueError):
        data.make_moons(10, -0.1, Pcg32(0))
    for factor in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            data.make_circles(10, 0.1, Pcg32(0), factor=factor)
    with pytest.raises(ValueError):
        data.make_blob_classification(10, 1, Pcg32(0))


@pytest.mark.parametrize(
    "make",
    [
        lambda rng: data.make_moons(300, 0.2, rng),
        lambda rng: data.make_circles(300, 0.1, rng),
        lambda rng: data.make_blob_classification(300, 10, rng),
    ],
)
def test_determinism_and_balance(make):
    a, b = make(Pcg32(5, 1)), make(Pcg32(5, 1))
    assert a.features.tobytes() == b.features.tobytes()
    assert a.labels.tobytes() == b.labels.tobytes()
    assert np.sum(a.labels == 0) == np.sum(a.labels == 1) == 150
    assert a.features.tobytes() != make(Pcg32(6, 1)).features.tobytes()


@pytest.mark.parametrize("noise", [0.05, 0.1, 0.3])
def test_noise_scaling(noise):
    clean = data.make_moons(10000, 0.0, Pcg32(0))
    noisy = data.make_moons(10000, noise, Pcg32(8, 1))
    spread = np.std(noisy.features - clean.features)
    assert abs(spread - noise) < 0.05 * noise


def test_blobs_meta_and_shape():
    ds = data.make_blob_classification(300, 8, Pcg32(0))
    assert ds.features.shape == (300, 8)
    assert ds.meta["d"] == 8 and ds.meta["family"] == "blobs"


def test_blobs_centroids_differ():
    ds = data.make_blob_classification(20000, 4, Pcg32(2), identity_mixing=True)
    mu0 = ds.features[ds.labels == 0].mean(axis=0)
    mu1 = ds.features[ds.labels == 1].mean(axis=0)
    assert np.all(np.abs(np.abs(mu0) - 1) < 0.05)
    assert np.max(np.abs(mu0 - mu1)) > 1.5


def test_blobs_without_signal_are_indistinguishable():
    ds = data.make_blob_classification(20000, 3, Pcg32(4), class_sep=0.0, identity_mixing=True)
    mu0 = ds.features[ds.labels == 0].mean(axis=0)
    mu1 = ds.features[ds.labels == 1].mean(axis=0)
    assert np.max(np.abs(mu0 - mu1)) < 0.05
    # a fixed linear rule gets chance accuracy
    pred = (ds.features[:, 0] > 0).astype(int)
    assert abs(np.mean(pred == ds.labels) - 0.5) < 0.02


@given(st.integers(0, 2**32 - 1))
def test_standardization_statistics(seed):
    ds = data.make_blob_classification(300, 5, Pcg32(seed, 1))
    train, test, scaler = data.split_and_standardize(ds, 200, 100, Pcg32(seed, 2))
    assert len(train) == 200 and len(test) == 100
    assert np.max(np.abs(train.features.mean(axis=0))) < 1e-9
    assert np.max(np.abs(train.features.std(axis=0) - 1)) < 1e-9


def test_test_split_uses_train_statistics():
    x = np.column_stack([np.arange(10.0) ** 2, np.full(10, 3.0)])
    ds = data.Dataset(x, np.repeat([0, 1], 5))
    train, test, scaler = data.split_and_standardize(ds, 6, 4, Pcg32(0))
    order = Pcg32(0).permutation(10)
    raw_train, raw_test = x[order[:6], 0], x[order[6:], 0]
    assert scaler.mean[0] == pytest.approx(raw_train.mean(), abs=0)
    np.testing.assert_allclose(test.features[:, 0], (raw_test - raw_train.mean()) / raw_train.std())
    # the test half is not centered on its own mean
    assert abs(test.features[:, 0].mean()) > 0.1
    # a constant column hits the std floor and maps to 0 on both sides
    assert scaler.std[1] == data.STD_FLOOR
    np.testing.assert_array_equal(test.features[:, 1], 0.0)


def test_split_rejects_too_many():
    ds = data.make_moons(10, 0.0, Pcg32(0))
    with pytest.raises(ValueError):
        data.split_and_standardize(ds, 8, 4, Pcg32(0))


def test_csv_round_trip(tmp_path):
    ds = data.make_moons(20, 0.1, Pcg32(1))
    path = tmp_path / "moons.csv"
    data.write_csv(ds, path)
    assert path.read_text().splitlines()[0] == "x0,x1,label"
    back = data.read_csv(path)
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)
