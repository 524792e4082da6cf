"""fvdlens-adapter: export video-network features into FeatureFile format."""

from .errors import AdapterError, ClipTooLong, ManifestError, ModelUnavailable, ShapeMismatch
from .export import AdapterConfig, export_features
from .featurefile import write_feature_file
from .manifest import load_manifest
from .models import KNOWN_TAGS, TinyI3D, TinyVideoViT, clear_standins, register_standin, resolve_model

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "ClipTooLong",
    "ManifestError",
    "ModelUnavailable",
    "ShapeMismatch",
    "AdapterConfig",
    "export_features",
    "write_feature_file",
    "load_manifest",
    "KNOWN_TAGS",
    "TinyI3D",
    "TinyVideoViT",
    "clear_standins",
    "register_standin",
    "resolve_model",
]
