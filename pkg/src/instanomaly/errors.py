"""Exception types shared across the package."""


class InstanomalyError(Exception):
    """Base class for all errors raised by this package."""


class BadMagicError(InstanomalyError):
    """File does not start with the IAT1 magic bytes."""


class TruncatedFileError(InstanomalyError):
    """File length disagrees with the header (short payload or trailing bytes)."""


class DtypeMismatchError(InstanomalyError):
    """Tensor dtype/ndim is incompatible with the requested role."""


class InvalidDimsError(InstanomalyError):
    """Tensor dimensions are zero, out of range, or have unsupported ndim."""


class DimensionMismatchError(InstanomalyError):
    """Two grids that must share a shape do not."""


class UnknownInstanceIdError(InstanomalyError):
    """A scored instance id does not occur in the label map."""


class InvalidDistributionError(InstanomalyError):
    """Softmax stack has negative entries or per-pixel sums far from 1."""


class EmptySampleListError(InstanomalyError):
    """An aggregation over forward passes received zero samples."""


class DegeneratePopulationError(InstanomalyError):
    """Metric population lacks the positives/negatives it needs."""


class PlacementOverflowError(InstanomalyError):
    """Scene generator could not place an object within the retry budget."""


class MissingSampleError(InstanomalyError):
    """Requested sample directory does not exist in the dataset."""
