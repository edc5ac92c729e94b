"""
Exceptions raised by the bellforge library.
"""


class BellForgeError(Exception):
    """Base class for every bellforge error."""


class InvalidPattern(BellForgeError):
    """A sign pattern has a bad symbol, bad length or is all-ZERO."""


class LengthMismatch(BellForgeError):
    """A pattern and an assignment (or two patterns) disagree on N."""


class OverlapError(BellForgeError):
    """Two terms cover a common full sign string."""

    def __init__(self, message, overlaps=()):
        super().__init__(message)
        self.overlaps = tuple(overlaps)


class DuplicatePattern(BellForgeError):
    """An inequality lists the same pattern twice."""


class NTooLarge(BellForgeError):
    """The party count is above an enumeration ceiling."""


class BlockIncomplete(BellForgeError):
    """A reduction block is missing some of its 2^k siblings."""


class WeightMismatch(BellForgeError):
    """The terms of a reduction block do not share one weight."""


class BudgetExhausted(BellForgeError):
    """The orbit-set generator ran out of draws before completing."""

    def __init__(self, message, partial=None, diagnostics=None):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = diagnostics or {}


class ExtremesAbsent(BellForgeError):
    """drop_extremes was called on an inequality without both extreme terms."""


class DimensionMismatch(BellForgeError):
    """State, settings and inequality disagree on the number of qubits."""


class InvalidState(BellForgeError):
    """Amplitudes or mixture weights are not normalized."""


class InvalidSettings(BellForgeError):
    """A measurement direction is not a unit vector."""


class CeilingExceeded(BellForgeError):
    """An optimizer reported a value above the algebraic ceiling."""


class ConvergenceFailure(BellForgeError):
    """An eigenpair iteration did not converge within its budget."""


class ParseError(BellForgeError):
    """An input document could not be parsed."""

    def __init__(self, message, field=None):
        if field:
            message = f"{message} (field: {field})"
        super().__init__(message)
        self.field = field
