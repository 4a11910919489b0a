"""Exception types shared across the package."""


class CamixError(Exception):
    """Base class for all camix errors."""


class IncompletePatternError(CamixError):
    """A pattern is missing a symbol for some neighborhood offset."""


class UnknownOffsetError(CamixError):
    """An offset is not part of the rule's neighborhood."""


class WrongRepresentationError(CamixError):
    """The operation requires a rule with a linear body."""


class BudgetExceededError(CamixError):
    """An enumeration would exceed the configured assignment budget."""

    def __init__(self, needed, budget):
        super().__init__(
            f"enumeration needs {needed} assignments, budget is {budget}"
        )
        self.needed = needed
        self.budget = budget


class IncompatibleOperandsError(CamixError):
    """Dimension, side, or modulus mismatch between operands."""


class EmptyInputError(CamixError):
    """An operation received an empty collection."""


class UnsupportedDimensionError(CamixError):
    """The operation is limited to low-dimensional lattices."""


class InvalidCornerError(CamixError):
    """The vector is not a corner of the given hypercuboid bounds."""


class InvalidVertexError(CamixError):
    """The vector is not a member of the apex set."""


class InvalidDirectionError(CamixError):
    """Escape bounds need a direction vector with nonzero entries."""


class TorusTooSmallError(CamixError):
    """The torus cannot hold the required cells without aliasing."""


class EmptyOutputError(CamixError):
    """The window is too small to evaluate a single output cell."""


class UnsupportedDepthError(CamixError):
    """PGM output supports at most 256 symbols."""


class RuleSyntaxError(CamixError):
    """Rule-file parse error with position information."""

    def __init__(self, message, line, column=None):
        pos = f"line {line}"
        if column is not None:
            pos += f", column {column}"
        super().__init__(f"{pos}: {message}")
        self.line = line
        self.column = column
