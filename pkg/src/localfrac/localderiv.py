"""The kernel alpha-derivative, computed two independent ways.

For a kernel ``k`` and ``0 < alpha <= 1`` the alpha-derivative at ``t > a`` is

    f^(alpha)(t) = lim_{eps->0} [f(t + eps*k(t)^(1-alpha)) - f(t)] / eps

and, whenever ``f`` is differentiable at ``t``, it equals
``k(t)^(1-alpha) * f'(t)``. :func:`alpha_deriv_limit` evaluates the quotient
numerically and :func:`alpha_deriv_closed` uses the symbolic derivative;
:func:`check_equivalence` compares the two. At ``t = a`` the value is the
right-hand limit, handled by :func:`alpha_deriv_at_start`.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import BoundaryError, DomainError, KernelError, LocalFracError, NoLimitError
from .expr import ExprAst, compile_ast, diff_ast, eval_ast
from .kernel import KernelSpec, eval_kernel, kernel_power

__all__ = [
    "EstimatorConfig",
    "DerivResult",
    "PointComparison",
    "EquivalenceReport",
    "check_alpha",
    "alpha_deriv_limit",
    "alpha_deriv_closed",
    "alpha_deriv_at_start",
    "classical_from_alpha",
    "check_equivalence",
    "alpha_sweep",
]

_EPS = sys.float_info.epsilon


def check_alpha(alpha: float) -> float:
    """Validate an order in (0, 1]; alpha = 1 is the classical derivative."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0,1], got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class EstimatorConfig:
    """Step and stopping parameters for the limit-based procedures.

    ``h0=None`` means ``2**-10 * max(1, |t|)``; ``boundary_start_offset=None``
    means ``min(1e-2, (b - a)/10)``.
    """

    h0: float | None = None
    levels: int = 4
    rel_tol: float = 1e-8
    boundary_ratio: float = 0.5
    boundary_start_offset: float | None = None
    divergence_factor: float = 10.0
    divergence_streak: int = 3
    max_boundary_steps: int = 40
    one_sided: bool = False
    refinements: int = 6  # restarts with h0/16 while the error estimate misses rel_tol

    def __post_init__(self):
        if self.h0 is not None and not self.h0 > 0:
            raise ValueError("h0 must be positive")
        if self.levels < 2:
            raise ValueError("levels must be at least 2")
        if not 0.0 < self.boundary_ratio < 1.0:
            raise ValueError("boundary_ratio must lie in (0, 1)")
        if self.boundary_start_offset is not None and not self.boundary_start_offset > 0:
            raise ValueError("boundary_start_offset must be positive")
        if self.refinements < 0:
            raise ValueError("refinements must be nonnegative")
        if self.rel_tol <= 0 or self.divergence_factor <= 1 or self.divergence_streak < 1:
            raise ValueError("invalid tolerance or divergence settings")

    def initial_step(self, t: float) -> float:
        return self.h0 if self.h0 is not None else 2.0**-10 * max(1.0, abs(t))

    def start_offset(self, kernel: KernelSpec) -> float:
        if self.boundary_start_offset is not None:
            return self.boundary_start_offset
        return min(1e-2, (kernel.b - kernel.a) / 10.0)


DEFAULT_CONFIG = EstimatorConfig()


@dataclass(frozen=True)
class DerivResult:
    value: float
    method: str  # limit | closed_form | boundary_limit
    error_estimate: float
    diverged: bool = False


def _interior_weight(k: KernelSpec, alpha: float, t: float) -> float:
    if t <= k.a:
        raise BoundaryError(f"t={t!r} is not past the domain start a={k.a!r}; use alpha_deriv_at_start")
    if eval_kernel(k, t, alpha) <= 0.0:
        raise KernelError(f"invalid kernel: k({t!r}) must be positive for t > a")
    return kernel_power(k, t, alpha, 1.0 - alpha)


def _richardson(quotients: Sequence[float], base: float) -> tuple[float, float]:
    # quotients at steps h, h/2, h/4...; error expands in powers of h**log2(base)
    prev = list(quotients[:1])
    diagonal = [quotients[0]]
    for j in range(1, len(quotients)):
        row = [quotients[j]]
        for m in range(1, j + 1):
            row.append(row[m - 1] + (row[m - 1] - prev[m - 1]) / (base**m - 1.0))
        diagonal.append(row[-1])
        prev = row
    return diagonal[-1], abs(diagonal[-1] - diagonal[-2])


def limit_quotient(
    func: Callable[[float], float],
    k: KernelSpec,
    alpha: float,
    t: float,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> DerivResult:
    """Extrapolated difference-quotient estimate of the alpha-derivative of ``func``.

    Works on any callable, so it also differentiates numerically defined maps
    such as an alpha-integral.

    When the error estimate exceeds ``rel_tol * (1 + |value|)``, typically
    because ``func`` oscillates faster than the initial step resolves, the
    sequence restarts at a 16 times smaller step, up to ``cfg.refinements``
    times. The result with the smallest estimate is returned, so a restart
    that only adds rounding noise does no harm.
    """
    alpha = check_alpha(alpha)
    t = float(t)
    w = _interior_weight(k, alpha, t)
    h = cfg.initial_step(t)
    if not cfg.one_sided:
        # the backward point must stay inside (a, t)
        h = min(h, 0.5 * (t - k.a) / w)
    ft = func(t) if cfg.one_sided else None

    best = None
    for _ in range(cfg.refinements + 1):
        quotients = []
        for j in range(cfg.levels):
            delta = (h / 2.0**j) * w
            hi = t + delta
            if cfg.one_sided:
                # divide by the realised step, not the nominal one
                quotients.append(w * (func(hi) - ft) / (hi - t))
            else:
                lo = t - delta
                quotients.append(w * (func(hi) - func(lo)) / (hi - lo))
        value, err = _richardson(quotients, 2.0 if cfg.one_sided else 4.0)
        if best is None or err < best.error_estimate:
            best = DerivResult(value, "limit", err)
        if err <= cfg.rel_tol * (1.0 + abs(value)):
            break
        h /= 16.0
    return best


def alpha_deriv_limit(
    f: ExprAst,
    k: KernelSpec,
    alpha: float,
    t: float,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> DerivResult:
    """Alpha-derivative from the defining limit.

    The symmetric quotient ``[f(t+eps*w) - f(t-eps*w)] / (2 eps)`` with
    ``w = k(t)^(1-alpha)`` is evaluated for ``eps = h0, h0/2, ...`` and
    Richardson-extrapolated; ``cfg.one_sided`` switches to the forward
    quotient. ``error_estimate`` is the change between the last two diagonal
    entries of the extrapolation table.

    Raises
    ------
    BoundaryError
        If ``t <= a``.
    KernelError
        If ``k(t) = 0`` at an interior point.
    DomainError
        If ``f`` cannot be evaluated near ``t``.
    """
    g = compile_ast(f)
    return limit_quotient(lambda x: g(x, 0.0), k, alpha, t, cfg)


def alpha_deriv_closed(f: ExprAst, k: KernelSpec, alpha: float, t: float) -> DerivResult:
    """``k(t)^(1-alpha) * f'(t)`` with ``f'`` from symbolic differentiation.

    Refuses ``t = a``: the reduction says nothing at the initial point.

    >>> from localfrac.expr import parse
    >>> from localfrac.kernel import builtin_kernel
    >>> alpha_deriv_closed(parse("sqrt(t)"), builtin_kernel("conformable"), 0.25, 16.0).value
    1.0
    """
    alpha = check_alpha(alpha)
    t = float(t)
    w = _interior_weight(k, alpha, t)
    return DerivResult(w * eval_ast(diff_ast(f), t), "closed_form", 0.0)


def _diverged(last: float) -> DerivResult:
    return DerivResult(math.copysign(math.inf, last), "boundary_limit", math.inf, diverged=True)


def alpha_deriv_at_start(
    f: ExprAst,
    k: KernelSpec,
    alpha: float,
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> DerivResult:
    """Value at ``t = a`` as the limit of interior values from the right.

    Samples ``v_j`` at ``t_j = a + offset * ratio**j`` (closed form, falling
    back to the limit quotient where ``f'`` cannot be evaluated) and
    accelerates them with Aitken's delta-squared process.

    Divergence is reported through ``diverged=True`` rather than raised. It is
    declared when ``|v_{j+1}| > divergence_factor * |v_j|`` for
    ``divergence_streak`` consecutive steps, or when the increments stop
    shrinking (ratio >= 1) while ``|v_j|`` grows for that many steps, which
    catches slow power-law blow-up such as ``t**-0.1``.

    Raises
    ------
    NoLimitError
        If the sequence neither settles nor diverges within
        ``cfg.max_boundary_steps`` samples.
    """
    alpha = check_alpha(alpha)
    a = k.a
    offset = cfg.start_offset(k)
    streak = cfg.divergence_streak
    g = compile_ast(f)

    def sample(t: float) -> float:
        try:
            return alpha_deriv_closed(f, k, alpha, t).value
        except DomainError:
            return limit_quotient(lambda x: g(x, 0.0), k, alpha, t, cfg).value

    values: list[float] = []
    accelerated: list[float] = []
    growth_run = ratio_run = 0
    for j in range(cfg.max_boundary_steps):
        t = a + offset * cfg.boundary_ratio**j
        if t <= a:
            break
        v = sample(t)
        if not math.isfinite(v):
            return _diverged(values[-1] if values else 1.0)
        values.append(v)
        if len(values) < 2:
            continue

        v0, v1 = values[-2], values[-1]
        growth_run = growth_run + 1 if abs(v1) > cfg.divergence_factor * abs(v0) else 0
        if growth_run >= streak:
            return _diverged(v1)
        if len(values) < 3:
            continue

        vm = values[-3]
        d1, d2 = v0 - vm, v1 - v0
        scale = max(abs(vm), abs(v0), abs(v1))
        if abs(d1) <= 64 * _EPS * scale and abs(d2) <= 64 * _EPS * scale:
            ratio, estimate = 0.0, v1
        else:
            ratio = d2 / d1 if d1 != 0.0 else math.inf
            curvature = d2 - d1
            estimate = v1 - d2 * d2 / curvature if curvature != 0.0 else v1

        ratio_run = ratio_run + 1 if ratio >= 1.0 and abs(v1) > abs(v0) else 0
        if ratio_run >= streak:
            return _diverged(v1)

        if abs(ratio) < 1.0 and math.isfinite(estimate):
            accelerated.append(estimate)
            if len(accelerated) >= 2:
                change = abs(accelerated[-1] - accelerated[-2])
                if change <= cfg.rel_tol * max(1.0, abs(estimate)):
                    return DerivResult(estimate, "boundary_limit", change)
        else:
            accelerated.clear()

    raise NoLimitError(
        f"boundary limit at a={a!r} did not settle after {len(values)} samples; "
        "the one-sided limit may not exist"
    )


def classical_from_alpha(v_alpha: float, k: KernelSpec, alpha: float, t: float) -> float:
    """Recover ``f'(t) = k(t)^(alpha-1) * f^(alpha)(t)`` for ``t > a``."""
    alpha = check_alpha(alpha)
    if t <= k.a:
        raise BoundaryError("the classical derivative cannot be recovered at t=a")
    return kernel_power(k, t, alpha, alpha - 1.0) * v_alpha


@dataclass(frozen=True)
class PointComparison:
    t: float
    limit: float
    closed: float
    discrepancy: float
    limit_error: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class EquivalenceReport:
    alpha: float
    points: tuple[PointComparison, ...]

    @property
    def failures(self) -> tuple[PointComparison, ...]:
        return tuple(p for p in self.points if p.error is not None)

    @property
    def _compared(self) -> tuple[PointComparison, ...]:
        return tuple(p for p in self.points if p.error is None)

    @property
    def max_discrepancy(self) -> float:
        return max((p.discrepancy for p in self._compared), default=math.nan)

    @property
    def worst(self) -> PointComparison | None:
        compared = self._compared
        return max(compared, key=lambda p: p.discrepancy) if compared else None

    @property
    def worst_t(self) -> float:
        worst = self.worst
        return worst.t if worst is not None else math.nan

    def passed(self, tol: float = 1e-6) -> bool:
        return not self.failures and bool(self.points) and self.max_discrepancy < tol


def check_equivalence(
    f: ExprAst,
    k: KernelSpec,
    alpha: float,
    grid: Iterable[float],
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> EquivalenceReport:
    """Compare the limit and closed-form routes point by point.

    The discrepancy at each point is ``|limit - closed| / (1 + |closed|)``.
    Per-point errors (a kink, a domain violation) are recorded in the report
    rather than raised.
    """
    alpha = check_alpha(alpha)
    points = []
    for t in grid:
        t = float(t)
        try:
            closed = alpha_deriv_closed(f, k, alpha, t).value
            lim = alpha_deriv_limit(f, k, alpha, t, cfg)
        except (LocalFracError, ArithmeticError) as exc:
            points.append(PointComparison(t, math.nan, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
            continue
        disc = abs(lim.value - closed) / (1.0 + abs(closed))
        points.append(PointComparison(t, lim.value, closed, disc, lim.error_estimate))
    return EquivalenceReport(alpha, tuple(points))


def alpha_sweep(
    f: ExprAst,
    k: KernelSpec,
    t: float,
    alphas: Iterable[float],
    cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> list[tuple[float, float]]:
    """Closed-form alpha-derivative at ``t`` for each order in ``alphas``.

    At ``alpha = 1`` the kernel factor is exactly 1, so the value is ``f'(t)``.
    ``cfg`` is accepted for symmetry with the grid operations; the closed
    form takes no steps.
    """
    return [(float(alpha), alpha_deriv_closed(f, k, alpha, t).value) for alpha in alphas]
