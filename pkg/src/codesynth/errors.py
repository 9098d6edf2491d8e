"""Exception hierarchy shared across the package."""


class CodesynthError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(CodesynthError):
    """A patch generation spec violates its preconditions."""


class IngestError(CodesynthError):
    """A user-supplied patch image/mask pair cannot be ingested."""


class ConfigError(CodesynthError):
    """A run configuration failed validation. Message carries the field path."""


class RenderError(CodesynthError):
    """Scene rendering failed (unknown patch id, contract violation)."""


class DatasetError(CodesynthError):
    """Dataset persistence or manifest validation failed."""


class EvaluationError(CodesynthError):
    """Metric computation was asked for something undefined or malformed."""


class SegmenterError(CodesynthError):
    """The baseline segmenter was given an unusable input."""
