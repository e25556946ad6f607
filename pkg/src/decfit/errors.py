"""Exception hierarchy.

Each family carries the CLI exit code it maps to, so the command-line layer
never has to guess: 2 input error, 3 insufficient data, 4 numerical failure.
"""


class DecfitError(ValueError):
    exit_code = 1

    #: short machine-readable tag written into JSON error entries
    code = "error"


class InputError(DecfitError):
    exit_code = 2
    code = "input_error"


class InsufficientDataError(DecfitError):
    exit_code = 3
    code = "insufficient_data"


class NumericalError(DecfitError):
    exit_code = 4
    code = "numerical_failure"


class DatasetError(InputError):
    """Raised by the CSV reader; ``errors`` lists ``(row, message)`` pairs."""

    code = "dataset_error"

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"{msg}, row {row}" for row, msg in self.errors]
        super().__init__("; ".join(lines))


class PreconditionError(InputError):
    code = "precondition"


class DegenerateAbscissaError(NumericalError):
    code = "degenerate_abscissa"


class SingularDesignError(NumericalError):
    code = "singular_design"


class DegenerateVarianceError(NumericalError):
    code = "degenerate_variance"


class BracketError(NumericalError):
    code = "bracket"


class MonotonicityError(NumericalError):
    code = "non_monotone_model"


class NoDegreesOfFreedomError(InsufficientDataError):
    code = "no_degrees_of_freedom"


class InsufficientOverlapError(InsufficientDataError):
    code = "insufficient_overlap"
