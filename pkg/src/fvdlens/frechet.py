"""Gaussian statistics and the Fréchet distance between feature sets.

The distance is ||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^{1/2}). The
cross term is evaluated through the symmetric reformulation
Tr((S_r S_g)^{1/2}) = Tr((S_r^{1/2} S_g S_r^{1/2})^{1/2}) so only symmetric
PSD square roots are ever taken; no complex arithmetic appears.

Covariances use the biased 1/N normalizer throughout (not 1/(N-1) as in many
FID codebases), and all arithmetic is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenFailure,
    IdCountMismatch,
    InputError,
    NonFiniteInput,
    NotSymmetric,
    NumericalInstability,
)

DEFAULT_CLAMP_EPS = 1e-10
SYMMETRY_TOL = 1e-6
NEGATIVE_DISTANCE_TOL = 1e-6


@dataclass
class FeatureMatrix:
    """N row-vectors of dimension D, with optional per-row ids.

    Data is promoted to float64 on construction; every entry must be finite.
    """

    data: np.ndarray
    ids: list[str] | None = None
    extractor_tag: str = ""

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"feature matrix must be N x D with N,D >= 1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("feature matrix contains NaN or Inf")
        self.data = arr
        if self.ids is not None:
            self.ids = [str(i) for i in self.ids]
            if len(self.ids) != arr.shape[0]:
                raise IdCountMismatch(f"{len(self.ids)} ids for {arr.shape[0]} rows")
            if len(set(self.ids)) != len(self.ids):
                raise InputError("row ids are not unique")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def row_ids(self) -> list[str]:
        """Ids if present, else zero-based row indices as strings."""
        if self.ids is not None:
            return list(self.ids)
        return [str(i) for i in range(self.rows)]


@dataclass
class GaussianStats:
    """Mean vector and symmetrized covariance fitted to a feature set."""

    mean: np.ndarray
    cov: np.ndarray
    n_samples: int

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass
class FrechetResult:
    value: float
    mean_term: float
    trace_term: float
    clamped: bool = False

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "mean_term": self.mean_term,
            "trace_term": self.trace_term,
            "clamped": self.clamped,
        }


def fit_gaussian(features: FeatureMatrix) -> GaussianStats:
    """Fit mean and biased (1/N) covariance; covariance is symmetrized."""
    data = features.data
    if not np.isfinite(data).all():
        raise NonFiniteInput("feature matrix contains NaN or Inf")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / data.shape[0]
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, cov=cov, n_samples=data.shape[0])


def sqrtm_psd(matrix: np.ndarray, clamp_eps: float = DEFAULT_CLAMP_EPS) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues below ``clamp_eps`` are clamped to zero, which removes
    negative round-off without masking real indefiniteness.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {matrix.shape}")
    if clamp_eps < 0:
        raise ValueError("clamp_eps must be >= 0")
    asym = np.abs(matrix - matrix.T).max() if matrix.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")
    sym = (matrix + matrix.T) / 2.0
    try:
        eigvals, eigvecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    eigvals = np.where(eigvals < clamp_eps, 0.0, eigvals)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return (root + root.T) / 2.0


def inv_sqrtm_psd(matrix: np.ndarray, clamp_eps: float = DEFAULT_CLAMP_EPS) -> np.ndarray:
    """Pseudoinverse PSD square root: eigenvalues below the clamp map to 0."""
    matrix = np.asarray(matrix, dtype=np.float64)
    sym = (matrix + matrix.T) / 2.0
    try:
        eigvals, eigvecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    inv_roots = np.where(eigvals < clamp_eps, 0.0, 1.0 / np.sqrt(np.where(eigvals < clamp_eps, 1.0, eigvals)))
    root = (eigvecs * inv_roots) @ eigvecs.T
    return (root + root.T) / 2.0


def frechet_distance(
    ref: GaussianStats, gen: GaussianStats, clamp_eps: float = DEFAULT_CLAMP_EPS
) -> FrechetResult:
    """Fréchet distance between two fitted Gaussians.

    Raw values in [-1e-6, 0) are clamped to zero (round-off); anything more
    negative raises NumericalInstability.
    """
    if ref.dim != gen.dim:
        raise DimensionMismatch(f"ref dim {ref.dim} != gen dim {gen.dim}")
    diff = ref.mean - gen.mean
    mean_term = float(diff @ diff)
    ref_root = sqrtm_psd(ref.cov, clamp_eps)
    inner = ref_root @ gen.cov @ ref_root
    cross_root = sqrtm_psd((inner + inner.T) / 2.0, clamp_eps)
    trace_term = float(np.trace(ref.cov) + np.trace(gen.cov) - 2.0 * np.trace(cross_root))
    raw = mean_term + trace_term
    if raw < -NEGATIVE_DISTANCE_TOL:
        raise NumericalInstability(f"Fréchet distance {raw:.3e} below -{NEGATIVE_DISTANCE_TOL:.0e}")
    if raw < 0.0:
        # keep value == mean_term + trace_term for the clamped result
        return FrechetResult(value=0.0, mean_term=mean_term, trace_term=-mean_term, clamped=True)
    return FrechetResult(value=raw, mean_term=mean_term, trace_term=trace_term, clamped=False)


def compute_fvd(ref_features: FeatureMatrix, gen_features: FeatureMatrix) -> FrechetResult:
    """Fit Gaussians to both feature sets and return their Fréchet distance.

    Serves FVD for clip-level rows and FID for frame-level rows alike.
    """
    if ref_features.dim != gen_features.dim:
        raise DimensionMismatch(f"ref dim {ref_features.dim} != gen dim {gen_features.dim}")
    return frechet_distance(fit_gaussian(ref_features), fit_gaussian(gen_features))
