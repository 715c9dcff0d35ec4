"""Kernel local fractional derivatives.

For a kernel ``k`` on ``[a, b]`` and ``alpha`` in (0, 1] the alpha-derivative is

    f^(alpha)(t) = lim_{eps -> 0} [f(t + eps * k(t)^(1-alpha)) - f(t)] / eps,

which equals ``k(t)^(1-alpha) f'(t)`` wherever ``f`` is differentiable.
The package computes it both ways, handles the boundary ``t = a`` as a
one-sided limit, and adds a weighted integral and an ODE solver built on
the same weight.
"""

from .errors import (
    AccuracyError,
    BoundaryError,
    BudgetError,
    DomainError,
    GammaOverflowError,
    GammaPoleError,
    KernelDomainError,
    KernelError,
    LocalFracError,
    NoLimitError,
    ParseError,
    SingularityError,
)
from .expr import diff_ast, eval_ast, parse, simplify, to_text
from .fraccalc import (
    IntegralConfig,
    OdeConfig,
    OdeSolution,
    alpha_integral,
    conformable_exp,
    ftc_residual,
    solve_alpha_ode,
)
from .kernel import KernelSpec, builtin_kernel, custom_kernel, eval_kernel, validate_kernel
from .localderiv import (
    DerivResult,
    EstimatorConfig,
    alpha_deriv_at_start,
    alpha_deriv_closed,
    alpha_deriv_limit,
    alpha_sweep,
    check_equivalence,
    classical_from_alpha,
)
from .specialfn import gamma

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BoundaryError",
    "BudgetError",
    "DomainError",
    "GammaOverflowError",
    "GammaPoleError",
    "KernelDomainError",
    "KernelError",
    "LocalFracError",
    "NoLimitError",
    "ParseError",
    "SingularityError",
    "parse",
    "eval_ast",
    "diff_ast",
    "simplify",
    "to_text",
    "KernelSpec",
    "builtin_kernel",
    "custom_kernel",
    "eval_kernel",
    "validate_kernel",
    "DerivResult",
    "EstimatorConfig",
    "alpha_deriv_limit",
    "alpha_deriv_closed",
    "alpha_deriv_at_start",
    "alpha_sweep",
    "check_equivalence",
    "classical_from_alpha",
    "IntegralConfig",
    "OdeConfig",
    "OdeSolution",
    "alpha_integral",
    "ftc_residual",
    "solve_alpha_ode",
    "conformable_exp",
    "gamma",
]
