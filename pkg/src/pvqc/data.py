"""Seeded synthetic binary-classification datasets and train/test preparation.

All randomness comes from a :class:`~pvqc.prng.Pcg32` passed in by the caller,
so a dataset is a pure function of its arguments and the generator state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

STD_FLOOR = 1e-8


@dataclass
class Dataset:
    features: np.ndarray  # (n_samples, d)
    labels: np.ndarray  # (n_samples,) ints in {0, 1}
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "Dataset":
        return Dataset(self.features[index], self.labels[index], dict(self.meta))


def _check_even(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"sample count must be even and positive, got {n}")


def _labels(n: int) -> np.ndarray:
    return np.repeat([0, 1], n // 2)


def make_moons(n: int, noise: float, rng) -> Dataset:
    """Two interleaved half circles; label 0 is the upper moon."""
    _check_even(n)
    if noise < 0:
        raise ValueError("noise must be non-negative")
    t = np.linspace(0.0, np.pi, n // 2)
    outer = np.column_stack([np.cos(t), np.sin(t)])
    inner = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    x = np.vstack([outer, inner]) + rng.normal((n, 2), scale=noise)
    return Dataset(x, _labels(n), {"family": "moons", "noise": noise, "seed": getattr(rng, "seed", None), "d": 2})


def make_circles(n: int, noise: float, rng, factor: float = 0.5) -> Dataset:
    """Unit circle (label 0) around a circle of radius ``factor`` (label 1)."""
    _check_even(n)
    if not 0.0 < factor < 1.0:
        raise ValueError(f"factor must be in (0, 1), got {factor}")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    t = np.linspace(0.0, 2.0 * np.pi, n // 2, endpoint=False)
    ring = np.column_stack([np.cos(t), np.sin(t)])
    x = np.vstack([ring, factor * ring]) + rng.normal((n, 2), scale=noise)
    meta = {"family": "circles", "noise": noise, "factor": factor, "seed": getattr(rng, "seed", None), "d": 2}
    return Dataset(x, _labels(n), meta)


def make_blob_classification(n: int, d: int, rng, class_sep: float = 1.0, identity_mixing: bool = False) -> Dataset:
    """Two Gaussian blobs on hypercube vertices, linearly mixed.

    Centroid entries are ``+-class_sep``; samples add a standard normal vector
    and are then multiplied by a shared ``d x d`` matrix with Normal(0, 1/d)
    entries.  ``identity_mixing`` skips the mixing (a test hook).
    """
    _check_even(n)
    if d < 2:
        raise ValueError(f"feature dimension must be >= 2, got {d}")
    while True:
        centroids = class_sep * rng.choice_signs((2, d))
        if class_sep == 0 or not np.array_equal(centroids[0], centroids[1]):
            break
    x = np.repeat(centroids, n // 2, axis=0) + rng.normal((n, d))
    if not identity_mixing:
        mixing = rng.normal((d, d), scale=1.0 / np.sqrt(d))
        x = x @ mixing.T
    meta = {"family": "blobs", "class_sep": class_sep, "seed": getattr(rng, "seed", None), "d": d}
    return Dataset(x, _labels(n), meta)


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.std


def fit_scaler(features: np.ndarray) -> Scaler:
    return Scaler(features.mean(axis=0), np.maximum(features.std(axis=0), STD_FLOOR))


def split_and_standardize(ds: Dataset, n_train: int, n_test: int, rng):
    """Random split, then standardize both parts with training statistics."""
    if n_train < 1 or n_test < 0 or n_train + n_test > len(ds):
        raise ValueError(f"cannot take {n_train} + {n_test} samples from {len(ds)}")
    order = rng.permutation(len(ds))
    train = ds.subset(order[:n_train])
    test = ds.subset(order[n_train:n_train + n_test])
    scaler = fit_scaler(train.features)
    train.features = scaler.transform(train.features)
    test.features = scaler.transform(test.features)
    return train, test, scaler


def write_csv(ds: Dataset, path) -> None:
    """``x0,...,x{d-1},label`` with 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(ds.n_features)] + ["label"])
        for row, label in zip(ds.features, ds.labels):
            writer.writerow([f"{v:.17g}" for v in row] + [int(label)])


def read_csv(path) -> Dataset:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Dataset(raw[:, :-1], raw[:, -1].astype(np.int64), {"source": str(path)})
