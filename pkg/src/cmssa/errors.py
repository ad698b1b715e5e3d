"""Exception hierarchy shared across the package.

InputError and its subclasses map to CLI exit code 2, NumericError to
exit code 1.
"""


class CmssaError(Exception):
    """Base class for all library errors."""


class InputError(CmssaError):
    """Bad user input: files, parameters, shapes."""


class ParseError(InputError):
    """Malformed CSV content (bad field counts, unparsable numbers)."""


class SchemaError(InputError):
    """Layout violations: bad header, non-contiguous series, label conflicts."""


class DataError(InputError):
    """Non-finite values, missing labels, unreadable files."""


class ParameterError(InputError):
    """Out-of-range windows, component counts, alphas, cluster counts."""


class ShapeError(InputError):
    """Dimension mismatches between series, trajectories, and models."""


class InsufficientDataError(InputError):
    """Not enough rows or series to perform the requested operation."""


class NumericError(CmssaError):
    """Algorithmic or numeric failure (solver breakdown, degenerate clustering)."""
