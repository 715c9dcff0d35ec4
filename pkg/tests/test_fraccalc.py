import math

import numpy as np
import pytest

from localfrac.errors import AccuracyError, BudgetError, KernelDomainError, SingularityError
from localfrac.expr import parse
from localfrac.fraccalc import (
    IntegralConfig,
    OdeConfig,
    alpha_integral,
    conformable_exp,
    ftc_residual,
    solve_alpha_ode,
)
from localfrac.kernel import builtin_kernel

CONF = builtin_kernel("conformable")

# independent references: series or mpmath at 40 digits, scipy quad with algebraic weights
COS_HALF = 1.8090484758005442  # sum (-1)^m / ((2m)! (2m + 1/2))
EXP_POINT4 = 7.0900046845441024  # integral_0^2 exp(s) s^-0.6 ds
SHIFTED_SQUARE = 10.033072086456341  # integral_1^3 s^2 (s-1)^-0.7 ds
GAMMA_SHIFTED_ONE = 0.99910021270509832  # ((1+c)^0.5 - c^0.5)/0.5, c = 1/Gamma(0.5)


class TestIntegral:
    @pytest.mark.parametrize("alpha, t, expected", [(0.5, 1.0, 2.0), (0.25, 16.0, 8.0), (1.0, 3.0, 3.0)])
    def test_power_rule(self, alpha, t, expected):
        assert alpha_integral(parse("1"), CONF, alpha, t) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        "f, k, alpha, t, expected",
        [
            ("cos(t)", builtin_kernel("shifted", 0.0), 0.5, 1.0, COS_HALF),
            ("exp(t)", CONF, 0.4, 2.0, EXP_POINT4),
            ("t^2", builtin_kernel("shifted", 1.0), 0.3, 3.0, SHIFTED_SQUARE),
            ("1", builtin_kernel("gamma_shifted"), 0.5, 1.0, GAMMA_SHIFTED_ONE),
        ],
    )
    def test_references(self, f, k, alpha, t, expected):
        value, err = alpha_integral(parse(f), k, alpha, t, full_output=True)
        assert value == pytest.approx(expected, rel=1e-10)
        assert err < 1e-8 * abs(expected)

    def test_empty_interval(self):
        assert alpha_integral(parse("exp(t)"), CONF, 0.5, 0.0) == 0.0

    def test_outside_domain(self):
        with pytest.raises(KernelDomainError):
            alpha_integral(parse("1"), CONF, 0.5, -1.0)

    def test_nonconvergence(self):
        with pytest.raises(AccuracyError) as info:
            alpha_integral(parse("sin(1/t)"), CONF, 1.0, 1.0, IntegralConfig(max_level=3))
        assert math.isfinite(info.value.estimate)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            IntegralConfig(abs_tol=0.0)


class TestFundamentalTheorem:
    @pytest.mark.parametrize(
        "f, k, alpha, t",
        [
            ("1", CONF, 0.5, 1.0),
            ("t^2", CONF, 0.3, 2.0),
            ("exp(t)", builtin_kernel("shifted", 1.0), 0.8, 2.0),
            ("sin(t)", builtin_kernel("gamma_shifted"), 0.6, 1.5),
        ],
    )
    def test_residual(self, f, k, alpha, t):
        assert ftc_residual(parse(f), k, alpha, t) < 1e-6


class TestExp:
    def test_values(self):
        assert conformable_exp(1.0, 1.0, 1.0) == math.e
        assert conformable_exp(0.0, 0.3, 5.0, y0=2.5) == 2.5
        assert conformable_exp(1.0, 0.5, 4.0) == pytest.approx(54.598150033144236, rel=1e-15)


class TestOde:
    def test_growth(self):
        sol = solve_alpha_ode("y", CONF, 0.5, 1.0, 1.0)
        assert sol.final == pytest.approx(7.38905609893065, rel=1e-6)

    def test_classical(self):
        sol = solve_alpha_ode("y", CONF, 1.0, 1.0, 1.0)
        assert sol.final == pytest.approx(math.e, rel=1e-7)

    def test_zero_rhs(self):
        sol = solve_alpha_ode("0", builtin_kernel("shifted", 1.0), 0.4, 3.5, 4.0)
        assert set(sol.y) == {3.5}

    def test_start_value_and_grid(self):
        sol = solve_alpha_ode("-y", CONF, 0.3, 2.0, 2.0)
        assert sol.t[0] == 0.0 and sol.y[0] == 2.0
        assert sol.t[-1] == 2.0
        assert np.all(np.diff(sol.t) > 0)
        assert sol.stats["accepted"] == len(sol.t) - 2

    def test_interpolant_hits_grid(self):
        sol = solve_alpha_ode("y", CONF, 0.5, 1.0, 2.0)
        assert np.array_equal(sol(sol.t), sol.y)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.0])
    @pytest.mark.parametrize("lam", [-1.0, 1.0])
    def test_dense_output(self, alpha, lam):
        sol = solve_alpha_ode(f"{lam}*y", CONF, alpha, 1.0, 2.0)
        ts = np.linspace(1e-4, 2.0, 2001)
        exact = np.array([conformable_exp(lam, alpha, t) for t in ts])
        assert np.max(np.abs(sol(ts) - exact) / exact) < 5e-6

    def test_callable_rhs_and_alpha_dependent_kernel(self):
        sol = solve_alpha_ode(lambda t, y: 0.0 * y + 1.0, builtin_kernel("gamma_shifted"), 0.5, 0.0, 1.0)
        # y = integral_0^t (s + c)^-0.5 ds
        assert sol.final == pytest.approx(0.99910021270509832, rel=1e-8)

    def test_tolerance_ladder(self):
        errors = []
        for rel_tol in [1e-4 / 2**i for i in range(8)]:
            sol = solve_alpha_ode("y", CONF, 0.5, 1.0, 2.0, cfg=OdeConfig(rel_tol=rel_tol, abs_tol=1e-2 * rel_tol))
            errors.append(abs(sol.final / conformable_exp(1.0, 0.5, 2.0) - 1.0))
        assert all(b <= 4 * a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < errors[0] / 10

    def test_blow_up(self):
        with pytest.raises(SingularityError, match="step size underflow"):
            solve_alpha_ode("y^2", CONF, 1.0, 1.0, 2.0)

    def test_budget(self):
        with pytest.raises(BudgetError):
            solve_alpha_ode("y", CONF, 0.5, 1.0, 2.0, cfg=OdeConfig(max_steps=5))

    def test_interpolant_domain(self):
        sol = solve_alpha_ode("y", CONF, 0.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            sol(1.5)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            solve_alpha_ode("y", CONF, 0.5, 1.0, 0.0)
        with pytest.raises(ValueError):
            OdeConfig(start_offset=0.0)
