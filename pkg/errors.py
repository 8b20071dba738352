"""Exception hierarchy shared by the library modules and the CLI."""


class ForensicsError(Exception):
    """Base class; the CLI maps it to the data-error exit status."""


class DimensionError(ForensicsError):
    """Image too small to hold a single 8x8 block."""


class InsufficientSamplesError(ForensicsError):
    """Fewer samples than an estimator needs."""


class MissingClassError(ForensicsError):
    """A class required by the operation has no rows."""


class QualityFactorError(ForensicsError):
    """JPEG quality factor outside 1..100."""


class SubsetError(ForensicsError):
    """Malformed or out-of-range coefficient subset."""


class DataError(ForensicsError):
    """Bad manifest, feature cache or configuration content."""


class InvalidProfileError(DataError):
    """Synthetic beta profile that cannot be sampled."""


class TrainingError(ForensicsError):
    """Training data the requested algorithm cannot fit."""


class ExplainerError(ForensicsError):
    """Explanation request the LIME module cannot serve."""


class ConfigError(ForensicsError):
    """Unknown or malformed experiment configuration; the CLI treats it as a usage error."""
