"""Kernels ``k`` on ``[a, b]`` that parameterize the alpha-derivative.

A kernel must be continuous, nonnegative, and nonzero for ``t > a``. Three
built-ins are provided:

==============  ===================  ==========
kind            k(t, alpha)          default a
==============  ===================  ==========
conformable     t                    0 (forced)
shifted         t - a                0
gamma_shifted   t + 1/Gamma(alpha)   0
==============  ===================  ==========

Every evaluation takes ``alpha`` even when the kernel ignores it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, KernelDomainError, KernelError, SingularityError
from .expr import ExprAst, compile_ast, free_variables, parse, to_text
from .specialfn import gamma

__all__ = [
    "KINDS",
    "BUILTIN_KINDS",
    "KernelSpec",
    "ValidationReport",
    "builtin_kernel",
    "custom_kernel",
    "validate_kernel",
    "eval_kernel",
    "eval_kernel_offset",
    "kernel_power",
]

BUILTIN_KINDS = ("conformable", "shifted", "gamma_shifted")
KINDS = BUILTIN_KINDS + ("custom",)

DEFAULT_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    a: float
    b: float = math.inf
    body: ExprAst | None = None
    alpha_dependent: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KernelError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if not math.isfinite(self.a):
            raise KernelError("domain start a must be finite")
        if not self.b > self.a:
            raise KernelError(f"domain end b={self.b!r} must exceed a={self.a!r}")
        if (self.kind == "custom") != (self.body is not None):
            raise KernelError("a body is required for custom kernels and only for them")

    def __call__(self, t: float, alpha: float = 1.0) -> float:
        return eval_kernel(self, t, alpha)

    def describe(self) -> str:
        if self.kind == "conformable":
            return "k(t) = t"
        if self.kind == "shifted":
            return f"k(t) = t - {self.a!r}"
        if self.kind == "gamma_shifted":
            return "k(t) = t + 1/Gamma(alpha)"
        return f"k(t) = {to_text(self.body)} on [{self.a!r}, {self.b!r}]"


@dataclass(frozen=True)
class ValidationReport:
    samples_checked: int
    violations: tuple[tuple[float, float, float], ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def builtin_kernel(kind: str, a: float | None = None) -> KernelSpec:
    """Build one of the three built-in kernels.

    ``a`` defaults to 0. The conformable kernel only exists with ``a = 0``;
    the gamma-shifted kernel needs ``a >= 0`` to stay nonnegative for every
    alpha in (0, 1].

    >>> builtin_kernel("shifted", 1.0)(3.0)
    2.0
    """
    a = 0.0 if a is None else float(a)
    if kind == "conformable":
        if a != 0.0:
            raise KernelError("the conformable kernel k(t)=t is defined with a=0")
        return KernelSpec("conformable", 0.0)
    if kind == "shifted":
        return KernelSpec("shifted", a)
    if kind == "gamma_shifted":
        if a < 0.0:
            raise KernelError("gamma_shifted requires a >= 0 so that t + 1/Gamma(alpha) > 0")
        return KernelSpec("gamma_shifted", a, alpha_dependent=True)
    raise KernelError(f"unknown built-in kernel {kind!r}; expected one of {BUILTIN_KINDS}")


def custom_kernel(body: ExprAst | str, a: float, b: float) -> KernelSpec:
    """Kernel given by an expression in ``t`` on the finite window ``[a, b]``.

    The kernel is not validated here; call :func:`validate_kernel`.
    """
    if isinstance(body, str):
        body = parse(body)
    extra = free_variables(body) - {"t"}
    if extra:
        raise KernelError(f"kernel body may only reference t, found {sorted(extra)}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise KernelError("custom kernels need a finite domain [a, b]")
    return KernelSpec("custom", float(a), float(b), body=body)


def _check_domain(spec: KernelSpec, t: float) -> None:
    if not (spec.a <= t <= spec.b):
        raise KernelDomainError(f"t={t!r} lies outside the kernel domain [{spec.a!r}, {spec.b!r}]")


def eval_kernel(spec: KernelSpec, t: float, alpha: float = 1.0) -> float:
    """k(t, alpha); raises :class:`KernelDomainError` outside ``[a, b]``."""
    t = float(t)
    _check_domain(spec, t)
    kind = spec.kind
    if kind == "conformable":
        return t
    if kind == "shifted":
        return t - spec.a
    if kind == "gamma_shifted":
        return t + 1.0 / gamma(alpha)
    return compile_ast(spec.body)(t, 0.0)


def eval_kernel_offset(spec: KernelSpec, offset: float, alpha: float = 1.0) -> float:
    """k(a + offset, alpha) without forming ``a + offset`` where avoidable.

    Quadrature and ODE start-up sample the kernel at offsets far below the
    resolution of ``a``; for the built-ins the offset enters exactly.
    """
    if offset < 0.0 or spec.a + offset > spec.b:
        raise KernelDomainError(f"offset {offset!r} leaves the kernel domain")
    kind = spec.kind
    if kind in ("conformable", "shifted"):
        return offset
    if kind == "gamma_shifted":
        return (spec.a + offset) + 1.0 / gamma(alpha)
    return compile_ast(spec.body)(spec.a + offset, 0.0)


def _power(k: float, p: float, where: str) -> float:
    if k < 0.0:
        raise KernelError(f"kernel is negative ({k!r}) at {where}")
    if k == 0.0:
        if p > 0.0:
            return 0.0
        if p == 0.0:
            return 1.0
        raise SingularityError(f"k=0 raised to negative power {p!r} at {where}; use a limit-based route")
    if p == 0.0:
        return 1.0
    try:
        return k**p
    except OverflowError:
        raise SingularityError(f"k={k!r} raised to {p!r} overflows at {where}; use a limit-based route") from None


def kernel_power(spec: KernelSpec, t: float, alpha: float, p: float) -> float:
    """k(t, alpha)**p with the conventions 0**p = 0 (p>0) and 0**0 = 1.

    Raises :class:`SingularityError` for ``k = 0`` and ``p < 0``.

    >>> kernel_power(builtin_kernel("conformable"), 4.0, 0.5, 0.5)
    2.0
    """
    return _power(eval_kernel(spec, t, alpha), p, f"t={t!r}")


def kernel_power_offset(spec: KernelSpec, offset: float, alpha: float, p: float) -> float:
    return _power(eval_kernel_offset(spec, offset, alpha), p, f"a+{offset!r}")


def validate_kernel(
    spec: KernelSpec,
    n_samples: int = 1000,
    alphas: Iterable[float] | None = None,
    span: float | None = None,
) -> ValidationReport:
    """Sample ``k`` on a uniform grid and check nonnegativity and nonvanishing.

    The grid covers ``[a, min(b, a + span)]`` with ``span`` defaulting to
    ``10 * max(1, |a|)``; ``k(a) = 0`` is allowed, ``k(t) = 0`` for ``t > a``
    is not. Continuity is not certified. Each violation is recorded as
    ``(t, alpha, value)``, with NaN when evaluation itself failed.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    alphas: Sequence[float] = tuple(DEFAULT_ALPHAS if alphas is None else alphas)
    if span is None:
        span = 10.0 * max(1.0, abs(spec.a))
    end = min(spec.b, spec.a + span)
    step = (end - spec.a) / (n_samples - 1)
    grid = [spec.a + i * step for i in range(n_samples - 1)] + [end]
    if not alphas:
        raise ValueError("alphas must not be empty")

    violations = []
    for alpha in alphas:
        for i, t in enumerate(grid):
            try:
                k = eval_kernel(spec, t, alpha)
            except (DomainError, KernelError, ArithmeticError):
                violations.append((t, alpha, math.nan))
                continue
            if not math.isfinite(k) or k < 0.0 or (k == 0.0 and i > 0):
                violations.append((t, alpha, k))
    return ValidationReport(samples_checked=len(grid) * len(alphas), violations=tuple(violations))

