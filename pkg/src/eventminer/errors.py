"""Exception hierarchy.

Article-level failures (transport exhaustion, unparseable responses) are
recoverable: the pipeline records them and moves on. Config and consistency
errors are fatal to the stage that raises them.
"""


class EventMinerError(Exception):
    """Base class for all package errors."""


class ConfigError(EventMinerError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class ConsistencyError(EventMinerError):
    """Cross-artifact bookkeeping violated (missing scope entry, unknown id)."""


class TransportError(EventMinerError):
    """A single transport attempt failed; retried per policy."""


class TransportExhausted(EventMinerError):
    """All transport attempts for one article failed. Article-level."""


class ParseFailure(EventMinerError):
    """No labeled answer could be recovered from a raw response."""


class TrainingError(EventMinerError):
    """Classifier training impossible (single class, too few groups)."""


class SchemaMismatch(EventMinerError):
    """Feature vector does not match the schema a model was trained on."""


class RegressionError(EventMinerError):
    """Panel regression cannot be fit (empty panel, n <= p, no treatment)."""
