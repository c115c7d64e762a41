"""Exception types shared across the package.

The split mirrors how failures surface at the command line: malformed
input files, degenerate data that no solver can fit, and numerical
failures inside an otherwise well-posed solve.
"""


class DataFormatError(ValueError):
    """An input file does not match the documented schema (carries row context)."""


class DegenerateDataError(ValueError):
    """The data cannot support the requested fit (rank deficiency, single class, singular covariance)."""


class NumericalError(RuntimeError):
    """A solver failed to converge; the message carries diagnostics."""
