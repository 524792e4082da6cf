"""Shared oracle helpers. These deliberately avoid the library's own code
paths: moments are computed with explicit loops, distances with closed forms."""

import numpy as np
import pytest


def two_pass_moments(data: np.ndarray):
    """Loop-based mean and biased covariance, independent of fit_gaussian."""
    n, d = data.shape
    mean = np.zeros(d)
    for row in data:
        mean += row
    mean /= n
    cov = np.zeros((d, d))
    for row in data:
        delta = row - mean
        cov += np.outer(delta, delta)
    cov /= n
    return mean, cov


def weighted_moments(data: np.ndarray, logits: np.ndarray):
    """Loop-based softmax-weighted mean and covariance."""
    shifted = logits - logits.max()
    p = np.exp(shifted)
    p /= p.sum()
    d = data.shape[1]
    mean = np.zeros(d)
    for k in range(len(data)):
        mean += p[k] * data[k]
    cov = np.zeros((d, d))
    for k in range(len(data)):
        delta = data[k] - mean
        cov += p[k] * np.outer(delta, delta)
    return p, mean, cov


def diagonal_frechet(mu_r, diag_r, mu_g, diag_g):
    """Closed form for diagonal covariances."""
    mu_r = np.asarray(mu_r, dtype=float)
    mu_g = np.asarray(mu_g, dtype=float)
    return float(
        np.sum((mu_r - mu_g) ** 2) + np.sum((np.sqrt(diag_r) - np.sqrt(diag_g)) ** 2)
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
