import numpy as np
import pytest

from gbfrs.dataset import Dataset, normalize_min_max


def make_blobs(n_per=40, centers=((0.2, 0.2), (0.8, 0.8)), spread=0.08,
               noise_dims=0, seed=0):
    """Gaussian class blobs in [0,1]-ish space, optional uniform noise dims."""
    rng = np.random.default_rng(seed)
    parts, labels = [], []
    for c, center in enumerate(centers):
        parts.append(rng.normal(center, spread, size=(n_per, len(center))))
        labels.extend([c] * n_per)
    X = np.vstack(parts)
    if noise_dims:
        X = np.hstack([X, rng.uniform(0, 1, size=(X.shape[0], noise_dims))])
    y = np.array(labels)
    perm = rng.permutation(y.size)
    return Dataset.from_arrays(np.clip(X[perm], 0, 1), y[perm])


def make_spike_two_cluster(n_per=100, inf_dims=6, noise_dims=10, sigma=0.02, seed=11):
    """Two tight clusters on aligned informative dims plus uniform noise dims.

    The canonical label-noise failure geometry for point-level reasoning:
    within a cluster every point has near-identical informative coordinates,
    so flipped labels sit arbitrarily close in informative space.
    """
    rng = np.random.default_rng(seed)
    lo = rng.normal(0.15, sigma, size=(n_per, inf_dims))
    hi = rng.normal(0.85, sigma, size=(n_per, inf_dims))
    informative = np.vstack([lo, hi])
    noise = rng.uniform(0, 1, size=(2 * n_per, noise_dims))
    X = np.hstack([informative, noise])
    y = np.array([0] * n_per + [1] * n_per)
    perm = rng.permutation(y.size)
    return Dataset.from_arrays(X[perm], y[perm])


def random_dataset(rng, n=None, d=None, classes=None):
    """A random labeled dataset with every class represented."""
    n = n if n is not None else int(rng.integers(20, 80))
    d = d if d is not None else int(rng.integers(2, 8))
    classes = classes if classes is not None else int(rng.integers(2, 4))
    X = rng.uniform(0, 1, size=(n, d))
    y = np.concatenate([np.arange(classes), rng.integers(0, classes, size=n - classes)])
    rng.shuffle(y)
    return Dataset.from_arrays(X, y)


@pytest.fixture(scope="session")
def toy_1d():
    """Two class-pure pairs on a line: the smallest nontrivial universe."""
    return Dataset.from_arrays([[0.0], [0.1], [0.9], [1.0]], [0, 0, 1, 1])


@pytest.fixture(scope="session")
def wine():
    from sklearn.datasets import load_wine

    raw = load_wine()
    return Dataset.from_arrays(raw.data, raw.target, attribute_names=raw.feature_names)


@pytest.fixture(scope="session")
def wine_normalized(wine):
    return normalize_min_max(wine)
