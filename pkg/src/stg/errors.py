"""Exception hierarchy shared by all subpackages.

The CLI maps these onto exit codes: UsageError -> 1, DataFormatError and
subclasses -> 2, NumericsError -> 3.
"""


class StgError(Exception):
    """Base class for all package errors."""


class UsageError(StgError):
    """Bad flags, bad argument combinations, refusals to overwrite."""


class DataFormatError(StgError):
    """On-disk artifact cannot be read or does not match expectations."""


class CorruptHeaderError(DataFormatError):
    """Magic bytes or version field is wrong."""


class TruncatedPayloadError(DataFormatError):
    """File ends before the declared payload does."""


class GeometryMismatchError(DataFormatError):
    """Frame geometry or model dimensions disagree between artifacts."""


class NumericsError(StgError):
    """NaN/Inf reached a loss or gradient, or a gradient check failed."""
