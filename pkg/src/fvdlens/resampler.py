"""Resampling-weight optimization over a candidate feature set.

Each of the K candidates carries a logit w_k; sampling probabilities are
softmax(w). The objective is the Fréchet distance between the reference
Gaussian and the probability-weighted candidate mean/covariance. After
optimizing the logits, a fixed-size subset is drawn i.i.d. with replacement
from the induced probabilities and scored again.

The optimizer takes natural-gradient steps under the softmax parametrization
(w -= lr * (a - p@a), where the raw logit gradient is p * (a - p@a)): raw
steps shrink with 1/K and stall at desk scale, while the preconditioned step
descends at any K with the same learning-rate schedule. ``objective_gradient``
itself returns the raw gradient and matches finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput, NumericalInstability
from .frechet import (
    DEFAULT_CLAMP_EPS,
    FeatureMatrix,
    GaussianStats,
    fit_gaussian,
    frechet_distance,
    inv_sqrtm_psd,
    sqrtm_psd,
)


@dataclass
class WeightVector:
    """Per-candidate logits plus derived sampling probabilities."""

    logits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.logits, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise DimensionMismatch(f"logits must be a length-K vector, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("logits contain NaN or Inf")
        self.logits = arr

    @property
    def k(self) -> int:
        return self.logits.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        shifted = self.logits - self.logits.max()
        expw = np.exp(shifted)
        return expw / expw.sum()


@dataclass
class ResampleConfig:
    steps: int = 300
    lr0: float = 0.01
    decay_factor: float = 0.1
    decay_every: int = 100
    sample_size: int = 2048
    candidate_multiple: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be > 0")
        if not (0 < self.decay_factor <= 1):
            raise ValueError("decay_factor must be in (0, 1]")
        if self.decay_every < 1:
            raise ValueError("decay_every must be >= 1")
        if self.sample_size < 1:
            raise ValueError("sample_size must be >= 1")


@dataclass
class ResampleReport:
    fvd_uniform: float
    fvd_weighted_objective: float
    fvd_star: float
    pct_change: float
    objective_trace: list[float]
    top_ids: list[str]
    bottom_ids: list[str]
    candidate_count: int
    sample_size: int
    seed: int
    sampling: str = "iid-with-replacement"
    steps: int = 300
    lr0: float = 0.01
    decay_factor: float = 0.1
    decay_every: int = 100


def weighted_stats(candidates: FeatureMatrix, weights: WeightVector) -> GaussianStats:
    """Probability-weighted mean and covariance of the candidate rows.

    The covariance centers on the weighted mean itself:
    sum_k p_k (f_k - mu_w)(f_k - mu_w)^T.
    """
    if weights.k != candidates.rows:
        raise DimensionMismatch(f"{weights.k} logits for {candidates.rows} candidates")
    p = weights.probabilities
    data = candidates.data
    mean = p @ data
    centered = data - mean
    cov = (centered * p[:, None]).T @ centered
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, cov=cov, n_samples=candidates.rows)


def weighted_fvd_objective(
    ref: GaussianStats, candidates: FeatureMatrix, weights: WeightVector
) -> float:
    return frechet_distance(ref, weighted_stats(candidates, weights)).value


def _gradient_wrt_probabilities(
    ref: GaussianStats, candidates: FeatureMatrix, weights: WeightVector
) -> tuple[np.ndarray, np.ndarray]:
    """Return (p, a) with a_k = d objective / d p_k (before the softmax Jacobian).

    Uses d/d mu_g = 2 (mu_g - mu_r) and
    d/d Sigma_g = I - S (S Sigma_g S)^{-1/2} S with S = Sigma_r^{1/2},
    the pseudoinverse root covering rank-deficient points.
    """
    p = weights.probabilities
    stats = weighted_stats(candidates, weights)
    data = candidates.data
    ref_root = sqrtm_psd(ref.cov, DEFAULT_CLAMP_EPS)
    inner = ref_root @ stats.cov @ ref_root
    grad_cov = np.eye(ref.dim) - ref_root @ inv_sqrtm_psd((inner + inner.T) / 2.0) @ ref_root
    grad_cov = (grad_cov + grad_cov.T) / 2.0
    delta = stats.mean - ref.mean
    # d mu_g / d p_k = f_k ; d Sigma_g / d p_k = f_k f_k^T - f_k mu^T - mu f_k^T
    a = (
        2.0 * (data @ delta)
        + np.einsum("kd,de,ke->k", data, grad_cov, data)
        - 2.0 * (data @ (grad_cov @ stats.mean))
    )
    return p, a


def objective_gradient(
    ref: GaussianStats, candidates: FeatureMatrix, weights: WeightVector
) -> np.ndarray:
    """Gradient of the weighted objective with respect to the logits."""
    p, a = _gradient_wrt_probabilities(ref, candidates, weights)
    grad = p * (a - p @ a)
    if not np.isfinite(grad).all():
        raise NumericalInstability("gradient contains non-finite entries")
    return grad


def optimize_weights(
    ref: GaussianStats, candidates: FeatureMatrix, config: ResampleConfig
) -> tuple[WeightVector, list[float]]:
    """Minimize the weighted objective from zero logits.

    Natural-gradient steps with step size lr0 * decay_factor^(step // decay_every);
    the returned trace holds the objective before step 0 and after each step.
    """
    logits = np.zeros(candidates.rows)
    weights = WeightVector(logits)
    trace = [weighted_fvd_objective(ref, candidates, weights)]
    for step in range(config.steps):
        lr = config.lr0 * config.decay_factor ** (step // config.decay_every)
        p, a = _gradient_wrt_probabilities(ref, candidates, weights)
        direction = a - p @ a
        if not np.isfinite(direction).all():
            raise NumericalInstability("gradient contains non-finite entries", trace=trace)
        logits = logits - lr * direction
        weights = WeightVector(logits)
        value = weighted_fvd_objective(ref, candidates, weights)
        if not np.isfinite(value):
            raise NumericalInstability("objective became non-finite", trace=trace)
        trace.append(value)
    return weights, trace


def resample_subset(
    candidates: FeatureMatrix, weights: WeightVector, sample_size: int, seed
) -> FeatureMatrix:
    """Draw ``sample_size`` rows i.i.d. with replacement by softmax probability.

    Deterministic given the seed; chosen rows keep their ids (suffixed with
    the draw index so the resampled matrix has unique ids). With-replacement
    draws impose no cap on sample_size.
    """
    rng = np.random.default_rng(seed)
    picks = rng.choice(candidates.rows, size=sample_size, replace=True, p=weights.probabilities)
    source_ids = candidates.row_ids()
    ids = [f"{source_ids[k]}#{i}" for i, k in enumerate(picks)]
    return FeatureMatrix(candidates.data[picks], ids=ids, extractor_tag=candidates.extractor_tag)


def probe_null_space(
    ref: FeatureMatrix, candidates: FeatureMatrix, config: ResampleConfig, top_n: int = 32
) -> ResampleReport:
    """Full null-space probe: uniform baseline, weight optimization, resampled score."""
    if ref.dim != candidates.dim:
        raise DimensionMismatch(f"ref dim {ref.dim} != candidate dim {candidates.dim}")
    if config.sample_size > candidates.rows:
        # the uniform baseline is a subset without replacement, so here the cap is real
        raise DimensionMismatch(
            f"sample_size {config.sample_size} exceeds candidate count {candidates.rows}"
        )
    ref_stats = fit_gaussian(ref)
    root_seq = np.random.SeedSequence(config.seed)
    uniform_seq, resample_seq = root_seq.spawn(2)

    uniform_rng = np.random.default_rng(uniform_seq)
    picks = uniform_rng.choice(candidates.rows, size=config.sample_size, replace=False)
    uniform_subset = FeatureMatrix(candidates.data[picks])
    fvd_uniform = frechet_distance(ref_stats, fit_gaussian(uniform_subset)).value

    weights, trace = optimize_weights(ref_stats, candidates, config)
    resampled = resample_subset(candidates, weights, config.sample_size, resample_seq)
    fvd_star = frechet_distance(ref_stats, fit_gaussian(resampled)).value

    order = np.argsort(weights.logits)
    ids = candidates.row_ids()
    n = min(top_n, candidates.rows)
    pct = (fvd_star - fvd_uniform) / fvd_uniform * 100.0 if fvd_uniform > 0 else 0.0
    return ResampleReport(
        fvd_uniform=fvd_uniform,
        fvd_weighted_objective=trace[-1],
        fvd_star=fvd_star,
        pct_change=pct,
        objective_trace=trace,
        top_ids=[ids[i] for i in order[::-1][:n]],
        bottom_ids=[ids[i] for i in order[:n]],
        candidate_count=candidates.rows,
        sample_size=config.sample_size,
        seed=config.seed,
        steps=config.steps,
        lr0=config.lr0,
        decay_factor=config.decay_factor,
        decay_every=config.decay_every,
    )
