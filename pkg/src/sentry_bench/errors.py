"""Exception types shared across the package."""


class SentryBenchError(Exception):
    """Base class for all package errors."""


# --- ingestion ---------------------------------------------------------------

class FieldCountError(SentryBenchError):
    """A record line does not carry exactly 41 features plus one label."""


class NumericParseError(SentryBenchError):
    """Non-numeric text found in a numeric feature position."""


class UnknownCategoryError(SentryBenchError):
    """Categorical value absent from the fitted encoding table."""


class UnknownLabelError(SentryBenchError):
    """Attack label absent from the label->group map (strict mode)."""


class DimensionMismatchError(SentryBenchError):
    """Vector length does not match what a fitted model expects."""


# --- topology ----------------------------------------------------------------

class NonPositiveRssiError(SentryBenchError):
    """Node RSSI sum must be strictly positive."""


class InsufficientNodesError(SentryBenchError):
    """Fewer nodes than requested cluster heads."""


class EmptyClusterError(SentryBenchError):
    """Trust aggregation over an empty member list."""


class RangeError(SentryBenchError):
    """A trust value lies outside [0, 1]."""


# --- detectors ---------------------------------------------------------------

class EmptyTrainingSetError(SentryBenchError):
    """Training requested on an empty dataset."""


class UnfittedModelError(SentryBenchError):
    """Classification requested before the model was fitted."""


class UnfittedSpecError(SentryBenchError):
    """Discretization requested before the binning spec was fitted."""


class TooLargeError(SentryBenchError):
    """Exhaustive enumeration requested beyond the tractability guard."""


class NonStochasticTransitionError(SentryBenchError):
    """A transition row of an MDP does not sum to 1."""


# --- metrics -----------------------------------------------------------------

class EmptyCountsError(SentryBenchError):
    """Metric requested on all-zero confusion counts."""


class NoPositiveVerdictsError(SentryBenchError):
    """Detection rate undefined: no positive verdicts were issued."""


class UndefinedMetricError(SentryBenchError):
    """Precision or recall denominator is zero."""


class SingleClassError(SentryBenchError):
    """ROC requested on scores containing a single truth class."""


# --- harness -----------------------------------------------------------------

class ConfigError(SentryBenchError):
    """Invalid experiment configuration."""


class DatasetError(SentryBenchError):
    """Dataset missing or unreadable."""
