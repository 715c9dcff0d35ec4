"""Exception hierarchy shared by every localfrac module.

All errors derive from :class:`LocalFracError`, and most also derive from the
closest builtin (``ValueError``, ``ArithmeticError``...) so generic handlers
keep working.
"""

from __future__ import annotations


class LocalFracError(Exception):
    """Base class for all library errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class ParseError(LocalFracError, ValueError):
    """Malformed expression text.

    ``position`` is a 1-based column; ``len(source) + 1`` denotes end of input.
    """

    def __init__(self, message: str, position: int, expected: str = ""):
        self.message = message
        self.position = position
        self.expected = expected
        text = f"{message} at column {position}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class DomainError(LocalFracError, ArithmeticError):
    """An expression was evaluated outside its real domain."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (subexpression at column {position})"
        super().__init__(message)


class KernelError(LocalFracError, ValueError):
    """Invalid kernel specification or kernel value."""


class KernelDomainError(KernelError):
    """Kernel evaluated outside ``[a, b]``."""


class SingularityError(LocalFracError, ArithmeticError):
    """A negative power of a vanishing kernel was requested."""


class BoundaryError(LocalFracError, ValueError):
    """The point is the domain start; only the boundary-limit route applies."""


class NoLimitError(LocalFracError, ArithmeticError):
    """A one-sided limit neither converged nor diverged."""


class GammaPoleError(LocalFracError, ValueError):
    """Gamma requested at a non-positive integer."""


class GammaOverflowError(LocalFracError, OverflowError):
    """Gamma exceeds the double-precision range."""


class AccuracyError(LocalFracError, ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    The best available estimate and its error bound are attached.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(f"{message}: estimate={estimate!r}, error bound={error_bound!r}")


class BudgetError(LocalFracError, RuntimeError):
    """An iteration budget (for example ``max_steps``) was exhausted."""
