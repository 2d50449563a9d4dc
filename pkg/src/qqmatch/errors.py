"""Exception hierarchy shared across the engine.

The CLI maps these onto exit codes: domain errors exit 1, missing
resources exit 2, data-format problems exit 65.
"""


class QQMatchError(Exception):
    """Base class for all engine errors."""


class FormatError(QQMatchError):
    """A file does not conform to its declared on-disk format."""


class ConfigError(QQMatchError):
    """Configuration is invalid or references a missing resource."""


class ContractError(QQMatchError, ValueError):
    """An API precondition was violated (dim mismatch, mode mismatch)."""


class InputError(QQMatchError):
    """Caller-supplied data is unusable (non-finite features, empty set)."""


class TrainingError(QQMatchError):
    """Meta-classifier training cannot proceed (e.g. single-class data)."""


class BuildError(QQMatchError):
    """Index construction failed (duplicate ids, empty corpus)."""


class CacheMissError(QQMatchError):
    """Sentence-embedding cache has no entry for the requested text."""


class TransportError(QQMatchError):
    """Remote sentence-embedding provider unreachable or timed out."""
