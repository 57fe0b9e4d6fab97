"""Exception hierarchy shared across the toolkit."""


class FeatganError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(FeatganError):
    """Operand shapes are incompatible. The message names both shapes."""


class StaleCacheError(FeatganError):
    """backward() called without a matching forward() on the same layer."""


class NonFiniteError(FeatganError):
    """A loss, gradient or parameter became NaN/Inf; message names the offender."""


class FormatError(FeatganError):
    """Base class for binary file-format violations."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class VersionError(FormatError):
    """File declares an unsupported format version."""


class TruncatedFileError(FormatError):
    """Header promises more payload bytes than the file contains."""


class HeaderOverflowError(FormatError):
    """Header field values multiply to an implausible payload size."""


class ManifestError(FeatganError):
    """Malformed manifest record."""


class PoolExhaustedError(FeatganError):
    """Voice pool has no unconsumed donor utterances left."""


class DegenerateDataError(FeatganError):
    """Input data carries no usable variance (e.g. PCA on identical points)."""


class ConfigError(FeatganError):
    """Invalid or inconsistent configuration value."""


class MissingInputError(FeatganError):
    """A required input file or directory does not exist."""
