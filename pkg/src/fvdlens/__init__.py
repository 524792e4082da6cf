"""fvdlens: Fréchet video metric toolkit.

Computes FVD/FID from feature sets, quantifies temporal sensitivity via
paired spatial/spatiotemporal corruptions, and probes the metric's
perceptual null space by optimizing resampling weights.
"""

from .clips import Clip, ClipSet, make_synthetic_clipset
from .distortion import (
    DEFAULT_SEVERITY,
    DistortionSpec,
    SeverityTable,
    distort_clipset,
    elastic_field,
    freeze_clipset,
    motion_blur_kernel,
    warp_frame,
)
from .feature_io import (
    ToyExtractorConfig,
    load_clipset,
    read_features,
    register_extractor,
    resolve_extractor,
    save_clipset,
    toy_blocks,
    toy_extract,
    toy_extract_frames,
    write_features,
)
from .frechet import (
    FeatureMatrix,
    FrechetResult,
    GaussianStats,
    compute_fvd,
    fit_gaussian,
    frechet_distance,
    sqrtm_psd,
)
from .protocols import (
    ChunkSchedule,
    LongVideoReport,
    SensitivityReport,
    canonical_json,
    run_long_video,
    run_null_space_probe,
    run_sensitivity,
)
from .resampler import (
    ResampleConfig,
    ResampleReport,
    WeightVector,
    objective_gradient,
    optimize_weights,
    probe_null_space,
    resample_subset,
    weighted_fvd_objective,
    weighted_stats,
)

__version__ = "0.1.0"

__all__ = [
    "Clip",
    "ClipSet",
    "make_synthetic_clipset",
    "DEFAULT_SEVERITY",
    "DistortionSpec",
    "SeverityTable",
    "distort_clipset",
    "elastic_field",
    "freeze_clipset",
    "motion_blur_kernel",
    "warp_frame",
    "ToyExtractorConfig",
    "load_clipset",
    "read_features",
    "register_extractor",
    "resolve_extractor",
    "save_clipset",
    "toy_blocks",
    "toy_extract",
    "toy_extract_frames",
    "write_features",
    "FeatureMatrix",
    "FrechetResult",
    "GaussianStats",
    "compute_fvd",
    "fit_gaussian",
    "frechet_distance",
    "sqrtm_psd",
    "ChunkSchedule",
    "LongVideoReport",
    "SensitivityReport",
    "canonical_json",
    "run_long_video",
    "run_null_space_probe",
    "run_sensitivity",
    "ResampleConfig",
    "ResampleReport",
    "WeightVector",
    "objective_gradient",
    "optimize_weights",
    "probe_null_space",
    "resample_subset",
    "weighted_fvd_objective",
    "weighted_stats",
]
