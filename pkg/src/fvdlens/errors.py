"""Exception hierarchy for the toolkit.

Two branches matter for the CLI exit-code contract: InputError (bad files,
bad manifests, bad configuration -> exit 2) and NumericError (unstable or
invalid numerics -> exit 3).
"""


class FvdLensError(Exception):
    """Base class for all toolkit errors."""


class InputError(FvdLensError):
    """Invalid input data, files, or configuration."""


class NumericError(FvdLensError):
    """Numerically invalid or unstable computation."""


# -- numeric -----------------------------------------------------------------

class NonFiniteInput(NumericError):
    """A feature matrix or weight vector contains NaN or Inf."""


class NotSymmetric(NumericError):
    """A matrix expected to be symmetric is not, beyond tolerance."""


class EigenFailure(NumericError):
    """Eigendecomposition did not converge."""


class DimensionMismatch(NumericError):
    """Operands have incompatible shapes."""


class NumericalInstability(NumericError):
    """A computation produced values outside its tolerated range.

    When raised by the weight optimizer, ``trace`` carries the partial
    objective trace recorded up to the failing step.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# -- input / IO --------------------------------------------------------------

class EmptyClipSet(InputError):
    """An operation requires at least one clip."""


class BadMagic(InputError):
    """Feature file does not start with the expected magic bytes."""


class UnsupportedVersion(InputError):
    """Feature file declares a format version this reader does not know."""


class TruncatedPayload(InputError):
    """Feature file payload shorter (or longer) than its header declares."""


class IdCountMismatch(InputError):
    """Row identifiers present but their count differs from the row count."""


class MissingFrame(InputError):
    """A manifest references a frame file that does not exist."""


class ChecksumMismatch(InputError):
    """Stored clip checksum does not match the loaded frames."""


class DuplicateTag(InputError):
    """An extractor tag is already registered."""


class IdMismatch(InputError):
    """File-backed features do not cover the requested clip ids."""


class ExtractorUnavailable(InputError):
    """No extractor registered under the requested tag."""


class ChunkOutOfRange(InputError):
    """A chunk schedule does not fit within the clip length."""


class ExtractorLengthUnsupported(InputError):
    """The extractor cannot consume clips of the requested frame count."""
