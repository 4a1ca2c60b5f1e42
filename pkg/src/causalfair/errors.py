"""Exception types shared across the toolkit.

Argument mistakes (bad ranges, wrong value sets) raise plain ``ValueError``;
the classes below mark failures that callers may want to route differently,
e.g. the command line maps them onto distinct exit codes.
"""


class StructuralError(ValueError):
    """A table or network is internally inconsistent (shapes, probability mass)."""


class DataError(ValueError):
    """An input file or record batch is malformed; the message carries the location."""


class EvaluationError(RuntimeError):
    """A metric is undefined on the given data, e.g. an empty stratum."""


class TrainingError(RuntimeError):
    """Training produced a non-finite loss; the message carries the epoch index."""


class NumericError(ArithmeticError):
    """A non-finite value reached a numeric kernel."""
