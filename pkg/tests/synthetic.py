"""Synthetic feature/flag data for the tuning pipeline tests."""

import numpy as np

N_FEATURES = 7
TABLE4_LIKE_RATES = (0.939, 0.548, 0.207, 0.245, 0.322)


def planted_rule(n_rows=200, n_configs=5, feature=0, seed=0):
    """Config j is good exactly when ``feature`` falls in the j-th of equal bands."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n_rows, N_FEATURES))
    band = np.minimum((X[:, feature] * n_configs).astype(int), n_configs - 1)
    Y = np.zeros((n_rows, n_configs), dtype=bool)
    Y[np.arange(n_rows), band] = True
    return X, Y


def noise_labels(n_rows=200, rates=TABLE4_LIKE_RATES, seed=0):
    """Flags drawn independently of the features at fixed per-config rates."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n_rows, N_FEATURES))
    Y = rng.random((n_rows, len(rates))) < np.asarray(rates)
    return X, Y
