"""Exception hierarchy shared across the package."""


class CohselError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedRatioError(CohselError):
    """Resampling ratio is not a downsampling rational ratio."""


class FilterDesignError(CohselError):
    """IIR design produced an unstable second-order-section cascade."""


class SegmentBoundsError(CohselError):
    """A trial marker overruns the end of the recording."""


class DegenerateSegmentError(CohselError):
    """A segment is identically zero and cannot be AUC-normalized."""


class InsufficientTrialsError(CohselError):
    """Coherence needs at least two averaging segments."""


class EmptyBandError(CohselError):
    """A frequency band contains no spectral bins."""


class ClassMissingError(CohselError):
    """Both classes must be present in the trial set."""


class InsufficientNeighborsError(CohselError):
    """SMOTE needs more minority samples than neighbors."""


class InvalidClusterCountError(CohselError):
    """Requested cluster count exceeds the number of points."""


class DisconnectedGraphError(CohselError):
    """Similarity graph is disconnected; spectral embedding undefined."""


class ConvergenceError(CohselError):
    """Iterative solver failed to reach tolerance within its budget."""


class InfeasibleCombination(CohselError):
    """Consensus filtering left fewer survivors than clusters requested.

    This is a signal, not a failure: grid cells carrying it map to the
    blank entries of the accuracy heatmaps.
    """


class NoFeasibleModelError(CohselError):
    """Every parameter combination in the grid was infeasible."""


class StratificationError(CohselError):
    """Class-proportional splitting is impossible for the requested folds."""


class ConfigError(CohselError):
    """Malformed configuration file or unknown configuration key."""


class DataFormatError(CohselError):
    """Malformed trial directory, CSV file or synthesis spec."""
