"""Exception hierarchy.

Each class carries an ``exit_code`` used by the command-line front end:
2 for bad input, 3 for precision failures, 4 for exhausted budgets.
"""

from __future__ import annotations


class HeightLabError(Exception):
    exit_code = 1


class InputError(HeightLabError, ValueError):
    exit_code = 2

    def __init__(self, message: str, path: str | None = None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DimensionMismatch(InputError):
    pass


class AllZero(InputError):
    pass


class NotAMorphism(InputError):
    pass


class DegreeTooSmall(InputError):
    pass


class DegreeTooLarge(InputError):
    pass


class BadHints(InputError):
    pass


class FactorizationNeeded(InputError):
    pass


class ConeViolation(InputError):
    pass


class PrecisionExhausted(HeightLabError, ArithmeticError):
    exit_code = 3


class BudgetExceeded(HeightLabError):
    exit_code = 4


class NoConvergence(BudgetExceeded):
    pass


class DegenerateFiber(HeightLabError):
    """The whole fiber line lies on the surface; the involution is undefined there."""

    exit_code = 2


class HypothesisFailed(HeightLabError):
    exit_code = 2


class MixedModulusFactor(HeightLabError):
    """A dominant irreducible factor has roots of different moduli."""


class NoFixedPoint(HeightLabError):
    """The affine map has no rational fixed point to conjugate by."""
