"""Exception hierarchy shared across the pipeline.

Every failure the CLI surfaces carries a short machine-parseable
``category`` slug so callers can branch on it without string matching.
"""


class ConvseqError(Exception):
    """Base class for all domain errors raised by this package."""

    category = "error"


class ConfigError(ConvseqError):
    """Invalid pipeline configuration or mismatched array dimensions."""

    category = "config"


class DecodeError(ConvseqError):
    """Raster could not be decoded or has degenerate dimensions."""

    category = "decode"


class DatasetError(ConvseqError):
    """Traverse directory missing, empty, or a cache file is unusable."""

    category = "dataset"


class GroundTruthParseError(ConvseqError):
    """Malformed ground-truth CSV row; message carries the line number."""

    category = "ground-truth"


class EvaluationError(ConvseqError):
    """Metric computation on empty or inconsistent match records."""

    category = "evaluation"


class SequenceTruncationError(ConvseqError):
    """The traverse ended before the decided sequence length fit.

    Signals the driver to stop issuing query sequences; it is a loop
    terminator, not a failure of any single computation.
    """

    category = "truncation"


class ReferenceTooShortError(ConvseqError):
    """Reference traverse has fewer frames than the query sequence."""

    category = "unmatched"
