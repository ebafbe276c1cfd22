"""Exception types shared across the package.

Plain ``ValueError`` is raised for ordinary bad arguments (out-of-range
band edges, dimension mismatches, and the like); the classes below mark
conditions callers may want to handle separately.
"""


class DegenerateDataError(ValueError):
    """Input data carries no usable information for the requested operation.

    Examples: an all-zero wavelet decomposition that cannot be normalized,
    or a zero-variance coordinate that makes a correlation or a maximum
    likelihood fit undefined.
    """


class ConvergenceError(RuntimeError):
    """An iterative fit did not converge within its iteration cap.

    Carries the last iterate so callers can inspect or resume.
    """

    def __init__(self, message, last_alpha=None):
        super().__init__(message)
        self.last_alpha = last_alpha


class NumericError(ArithmeticError):
    """A linear-algebra or floating-point step failed irrecoverably."""


class DataLoadError(ValueError):
    """A dataset manifest or trial file could not be loaded.

    ``trial_id`` names the offending record when known.
    """

    def __init__(self, message, trial_id=None):
        super().__init__(message)
        self.trial_id = trial_id
