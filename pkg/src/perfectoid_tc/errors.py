"""Exception hierarchy shared by all modules."""


class PerfectoidTCError(Exception):
    """Base class for library errors."""


class ProfileError(PerfectoidTCError, ValueError):
    """Invalid precision profile or incompatible operands."""


class PrecisionError(PerfectoidTCError):
    """The tracked precision budget is too small for the requested result."""


class DenominatorOverflow(PrecisionError):
    """An exponent would need a denominator larger than p^N."""


class NotDivisible(PerfectoidTCError, ArithmeticError):
    """A quotient does not exist in the model to the tracked precision."""


class ResidueExtensionNeeded(PerfectoidTCError):
    """A residue-field equation has no solution over the current F_q."""


class ModelClosureError(PerfectoidTCError):
    """The equation is solvable only in an extension the model cannot represent."""
