"""Exception types shared across the package.

The CLI maps these onto stable exit codes: plain ``ValueError`` (bad
arguments or parameters) -> 2, ``DataError`` -> 3, ``NumericError`` -> 4.
"""


class NumericError(RuntimeError):
    """An iterative numerical procedure failed to converge."""


class DataError(ValueError):
    """A dataset or input file is malformed or unusable."""


class MomentNotDefinedError(ValueError):
    """The requested moment (or a quantity requiring it) does not exist."""
