class AdapterError(Exception):
    """Base class for adapter errors."""


class ModelUnavailable(AdapterError):
    """No stand-in registered and no local checkpoint found for the tag."""


class ClipTooLong(AdapterError):
    """Clip length does not match the model's native length and positional
    interpolation is disabled."""


class ShapeMismatch(AdapterError):
    """Model produced features of an unexpected shape."""


class ManifestError(AdapterError):
    """Manifest is malformed or references missing/inconsistent frames."""
