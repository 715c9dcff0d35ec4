"""Alpha-integral, fundamental-theorem check and alpha-ODE solver.

Because ``f^(alpha)(t) = k(t)^(1-alpha) f'(t)`` for differentiable ``f``, the
weighted integral

    I(t) = integral_a^t f(s) * k(s, alpha)^(alpha-1) ds

is a left inverse of the alpha-derivative, and ``y^(alpha) = F(t, y)`` is the
classical ODE ``y' = k(t, alpha)^(alpha-1) * F(t, y)``. This integral is a
definition made by this package, chosen to be consistent with that weight.

When ``k(a) = 0`` and ``alpha < 1`` the weight blows up at ``s = a``. The
quadrature is double exponential and handles that directly. The ODE solver
takes one sub-step from ``a`` to ``a + delta`` in the accumulated-weight
variable before handing over to Dormand-Prince.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import AccuracyError, BudgetError, DomainError, KernelDomainError, SingularityError
from .expr import BinOp, Call, Const, ExprAst, Neg, Var, compile_ast, free_variables, parse
from .kernel import KernelSpec, kernel_power, kernel_power_offset
from .localderiv import DEFAULT_CONFIG, EstimatorConfig, check_alpha, limit_quotient
from .quadrature import tanh_sinh

__all__ = [
    "IntegralConfig",
    "OdeConfig",
    "OdeSolution",
    "alpha_integral",
    "ftc_residual",
    "solve_alpha_ode",
    "conformable_exp",
]

Rhs = Union[Callable[[float, float], float], ExprAst, str]


@dataclass(frozen=True)
class IntegralConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_level: int = 12

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class OdeConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    start_offset: float | None = None  # None: 1e-8 * (t_end - a)
    max_steps: int = 10**6

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.start_offset is not None and not self.start_offset > 0:
            raise ValueError("start_offset must be positive")


def _weighted_integral(
    f: Callable[[float], float], k: KernelSpec, alpha: float, lo: float, hi: float, cfg: IntegralConfig
) -> tuple[float, float]:
    base = lo - k.a  # exact offset of lo from the kernel's start
    if k.kind in ("conformable", "shifted") and alpha < 1.0:
        return _power_substituted(f, k.a, alpha, base, hi - k.a, cfg)

    def integrand(x: float, dist_lo: float, dist_hi: float) -> float:
        try:
            weight = kernel_power_offset(k, base + dist_lo, alpha, alpha - 1.0)
        except SingularityError:
            # only when a + offset rounds back onto a for a custom kernel
            return 0.0
        value = f(x) * weight
        # an overflowing node next to a singular endpoint is dropped; a truly
        # divergent integral then shows up as non-convergence
        return value if math.isfinite(value) else 0.0

    return tanh_sinh(integrand, lo, hi, cfg.abs_tol, cfg.rel_tol, cfg.max_level)


def _power_substituted(
    f: Callable[[float], float], a: float, alpha: float, lo_off: float, hi_off: float, cfg: IntegralConfig
) -> tuple[float, float]:
    # for k(s) = s - a, u = (s - a)^alpha turns the weighted integral into
    # (1/alpha) * integral f(a + u^(1/alpha)) du with no singular weight; the
    # direct form cannot resolve the mass below the smallest double near a
    inv = 1.0 / alpha
    u_lo, u_hi = lo_off**alpha, hi_off**alpha

    def integrand(x: float, dist_lo: float, dist_hi: float) -> float:
        u = u_lo + dist_lo if dist_lo <= dist_hi else u_hi - dist_hi
        s = a + u**inv
        try:
            value = f(s)
        except DomainError:
            if s != a:
                raise
            # s rounded onto the start, where f need not exist
            return 0.0
        return value if math.isfinite(value) else 0.0

    value, err = tanh_sinh(integrand, u_lo, u_hi, cfg.abs_tol * alpha, cfg.rel_tol, cfg.max_level)
    return value * inv, err * inv


def alpha_integral(
    f: ExprAst,
    k: KernelSpec,
    alpha: float,
    t: float,
    cfg: IntegralConfig = IntegralConfig(),
    full_output: bool = False,
):
    """``integral_a^t f(s) k(s, alpha)^(alpha-1) ds`` by tanh-sinh quadrature.

    With ``full_output=True`` returns ``(value, error_bound)``. Nodes where
    the integrand overflows are skipped.

    Raises
    ------
    AccuracyError
        If the quadrature does not converge by ``cfg.max_level``.
    KernelDomainError
        If ``t`` lies outside ``[a, b]``.

    Examples
    --------
    >>> from localfrac.kernel import builtin_kernel
    >>> round(alpha_integral(parse("1"), builtin_kernel("conformable"), 0.25, 16.0), 12)
    8.0
    """
    alpha = check_alpha(alpha)
    t = float(t)
    if not k.a <= t <= k.b:
        raise KernelDomainError(f"upper limit t={t!r} lies outside [{k.a!r}, {k.b!r}]")
    g = compile_ast(f)
    value, err = _weighted_integral(lambda s: g(s, 0.0), k, alpha, k.a, t, cfg)
    return (value, err) if full_output else value


# inner integrals are differenced by the limit estimator, so they must be tight
_FTC_INTEGRAL = IntegralConfig(abs_tol=1e-14, rel_tol=1e-14, max_level=10)


def ftc_residual(
    f: ExprAst,
    k: KernelSpec,
    alpha: float,
    t: float,
    integral_cfg: IntegralConfig | None = None,
    estimator_cfg: EstimatorConfig = DEFAULT_CONFIG,
) -> float:
    """``|D^alpha[I f](t) - f(t)|`` with both operators computed numerically.

    The outer alpha-derivative is the limit-quotient estimator applied to the
    map ``s -> alpha_integral(f, k, alpha, s)``. Quadrature non-convergence at
    the tight default tolerances is tolerated; the best estimate is used.
    """
    alpha = check_alpha(alpha)
    cfg = integral_cfg or _FTC_INTEGRAL
    g = compile_ast(f)

    def integral(s: float) -> float:
        try:
            return _weighted_integral(lambda x: g(x, 0.0), k, alpha, k.a, s, cfg)[0]
        except AccuracyError as exc:
            if integral_cfg is not None:
                raise
            return exc.estimate

    derivative = limit_quotient(integral, k, alpha, t, estimator_cfg).value
    return abs(derivative - g(float(t), 0.0))


def conformable_exp(lam: float, alpha: float, t: float, y0: float = 1.0) -> float:
    """Exact solution ``y0 * exp(lam * t**alpha / alpha)`` of ``y^(alpha) = lam*y``
    for the conformable kernel.

    >>> conformable_exp(1.0, 0.5, 4.0) == math.exp(4.0)
    True
    """
    return y0 * math.exp(lam * t**alpha / alpha)


# -- ODE solver -----------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# fifth-order weights minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


# Hairer's continuous extension of order 4 for DOPRI5
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)


@dataclass
class OdeSolution:
    """Accepted-step grid, states, and a dense interpolant.

    Inside each Dormand-Prince step the interpolant is the method's
    fourth-order continuous extension. On the bootstrap segment ``[a, a+delta]``
    it is a cubic Hermite polynomial in the accumulated weight ``u(s)``
    rather than in ``s``, which stays accurate next to a singular start.

    ``derivs`` holds ``y'`` at each grid point (NaN at a singular start) and
    ``local_errors`` the error estimate of the step ending at each point.
    """

    t: np.ndarray
    y: np.ndarray
    derivs: np.ndarray
    local_errors: np.ndarray
    coeffs: np.ndarray  # (n_steps, 5) continuous-extension coefficients
    start_fraction: Callable[[float], float] | None = None
    stats: dict = field(default_factory=dict)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < self.t[0]) or np.any(s_arr > self.t[-1]):
            raise ValueError(f"dense output is available on [{self.t[0]!r}, {self.t[-1]!r}] only")
        idx = np.clip(np.searchsorted(self.t, s_arr, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[idx], self.t[idx + 1]
        theta = (s_arr - t0) / (t1 - t0)
        if self.start_fraction is not None:
            first = idx == 0
            if np.any(first):
                mapped = np.vectorize(self.start_fraction, otypes=[float])(s_arr[first])
                theta = np.where(first, 0.0, theta)
                theta[first] = mapped
        c = self.coeffs[idx]
        theta1 = 1.0 - theta
        out = c[..., 0] + theta * (c[..., 1] + theta1 * (c[..., 2] + theta * (c[..., 3] + theta1 * c[..., 4])))
        # hit grid values exactly
        out = np.where(s_arr == t0, self.y[idx], np.where(s_arr == t1, self.y[idx + 1], out))
        return out if out.ndim else float(out)

    @property
    def final(self) -> float:
        return float(self.y[-1])


def _as_rhs(F: Rhs) -> Callable[[float, float], float]:
    if isinstance(F, str):
        F = parse(F, variables=("t", "y"))
    elif not isinstance(F, (Const, Var, Neg, BinOp, Call)):
        return F
    extra = free_variables(F) - {"t", "y"}
    if extra:
        raise ValueError(f"right-hand side may only reference t and y, found {sorted(extra)}")
    return compile_ast(F)


def _initial_step(rhs, t0, y0, f0, t_end, cfg) -> float:
    # Hairer, Norsett & Wanner, "Solving ODEs I", II.4
    scale = cfg.abs_tol + cfg.rel_tol * abs(y0)
    d0, d1 = abs(y0) / scale, abs(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = abs(f1 - f0) / scale / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, t_end - t0)


def solve_alpha_ode(
    F: Rhs,
    k: KernelSpec,
    alpha: float,
    y0: float,
    t_end: float,
    a: float | None = None,
    cfg: OdeConfig = OdeConfig(),
) -> OdeSolution:
    """Solve ``y^(alpha) = F(t, y)``, ``y(a) = y0`` on ``[a, t_end]``.

    ``F`` is a callable ``F(t, y)``, a tree, or text in ``t`` and ``y``.
    ``a`` defaults to the kernel's domain start.

    The equation is integrated as ``y' = k^(alpha-1) F`` by adaptive
    Dormand-Prince 5(4) from ``a + delta``. The start value ``y(a + delta)``
    comes from one RK4 step in ``u = integral_a^s k^(alpha-1)``, where the
    equation reads ``dy/du = F``. Its first stage is the weight-exact update
    ``y0 + F(a, y0) * u(a + delta)``.

    Raises
    ------
    SingularityError
        If the step size underflows, either at a blow-up of the solution or
        next to a singular start (then increase ``cfg.start_offset``).
    BudgetError
        If more than ``cfg.max_steps`` steps are needed.
    """
    alpha = check_alpha(alpha)
    rhs_fn = _as_rhs(F)
    a = k.a if a is None else float(a)
    t_end = float(t_end)
    y0 = float(y0)
    if a < k.a:
        raise KernelDomainError(f"start a={a!r} precedes the kernel domain start {k.a!r}")
    if not t_end > a:
        raise ValueError("t_end must exceed the start point")
    if t_end > k.b:
        raise KernelDomainError(f"t_end={t_end!r} exceeds the kernel domain end {k.b!r}")
    delta = cfg.start_offset if cfg.start_offset is not None else 1e-8 * (t_end - a)
    if not delta < t_end - a:
        raise ValueError("start_offset must be smaller than t_end - a")

    p = alpha - 1.0
    stats = {"accepted": 0, "rejected": 0, "rhs_evals": 0}

    def rhs(t: float, y: float) -> float:
        stats["rhs_evals"] += 1
        return kernel_power(k, t, alpha, p) * rhs_fn(t, y)

    # bootstrap sub-step on [a, a + delta]
    W = _weighted_integral(lambda s: 1.0, k, alpha, a, a + delta, IntegralConfig(1e-15, 1e-14))[0]
    k1 = rhs_fn(a, y0)
    k2 = rhs_fn(a + 0.5 * delta, y0 + 0.5 * W * k1)
    k3 = rhs_fn(a + 0.5 * delta, y0 + 0.5 * W * k2)
    k4 = rhs_fn(a + delta, y0 + W * k3)
    stats["rhs_evals"] += 4
    y1 = y0 + W * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0

    try:
        start_deriv = kernel_power(k, a, alpha, p) * k1
    except SingularityError:
        start_deriv = math.nan

    def start_fraction(s: float) -> float:
        if s <= a:
            return 0.0
        return _weighted_integral(lambda x: 1.0, k, alpha, a, s, IntegralConfig(1e-15, 1e-14))[0] / W

    t = a + delta
    y = y1
    fy = rhs(t, y)
    ts, ys, ds, errs = [a, t], [y0, y], [start_deriv, fy], [0.0, abs(y1 - (y0 + W * k1))]
    # cubic Hermite in u on the bootstrap segment: dy/du is F at both ends
    ydiff = y1 - y0
    bspl = W * k1 - ydiff
    coeffs = [(y0, ydiff, bspl, ydiff - W * rhs_fn(t, y) - bspl, 0.0)]
    h = _initial_step(rhs, t, y, fy, t_end, cfg)

    while t < t_end:
        if stats["accepted"] + stats["rejected"] >= cfg.max_steps:
            raise BudgetError(f"exceeded max_steps={cfg.max_steps} at t={t!r}")
        if h < 16 * math.ulp(t):
            raise SingularityError(
                f"step size underflow at t={t!r}; the solution may blow up here, or, next to a "
                "singular start, start_offset is too small"
            )
        last = t + h >= t_end
        if last:
            h = t_end - t
        stages = [fy]
        for i in range(1, 7):
            yi = y + h * sum(aij * kj for aij, kj in zip(_A[i], stages))
            stages.append(rhs(t + _C[i] * h, yi))
        y_new = y + h * sum(bi * kj for bi, kj in zip(_A[6], stages))
        err = abs(h * sum(ei * kj for ei, kj in zip(_E, stages)))
        scale = cfg.abs_tol + cfg.rel_tol * max(abs(y), abs(y_new))
        ratio = err / scale
        if ratio <= 1.0:
            ydiff = y_new - y
            bspl = h * stages[0] - ydiff
            coeffs.append(
                (y, ydiff, bspl, ydiff - h * stages[6] - bspl, h * sum(di * kj for di, kj in zip(_D, stages)))
            )
            t = t_end if last else t + h
            y, fy = y_new, stages[6]
            ts.append(t)
            ys.append(y)
            ds.append(fy)
            errs.append(err)
            stats["accepted"] += 1
            factor = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio**-0.2)
        else:
            stats["rejected"] += 1
            factor = max(0.2, 0.9 * ratio**-0.2)
        h *= factor

    return OdeSolution(
        np.array(ts),
        np.array(ys),
        np.array(ds),
        np.array(errs),
        np.array(coeffs),
        start_fraction,
        stats,
    )
