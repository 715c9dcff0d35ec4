import math

import pytest

from localfrac.errors import BoundaryError, KernelError, NoLimitError
from localfrac.expr import diff_ast, eval_ast, parse
from localfrac.kernel import builtin_kernel, custom_kernel
from localfrac.localderiv import (
    EstimatorConfig,
    alpha_deriv_at_start,
    alpha_deriv_closed,
    alpha_deriv_limit,
    alpha_sweep,
    check_alpha,
    check_equivalence,
    classical_from_alpha,
)
from localfrac.specialfn import gamma

CONF = builtin_kernel("conformable")
SQRT2_COS2 = -0.5885205001836284  # sqrt(2)*cos(2), mpmath


class TestClosed:
    def test_sine(self):
        r = alpha_deriv_closed(parse("sin(t)"), CONF, 0.5, 2.0)
        assert r.value == pytest.approx(SQRT2_COS2, rel=1e-15)
        assert r.method == "closed_form"

    def test_identity(self):
        assert alpha_deriv_closed(parse("t"), CONF, 0.3, 4.0).value == pytest.approx(4.0**0.7, rel=1e-15)

    def test_refuses_start(self):
        with pytest.raises(BoundaryError):
            alpha_deriv_closed(parse("t"), CONF, 0.5, 0.0)

    def test_vanishing_kernel_inside(self):
        k = custom_kernel("(t - 1)^2", 0.0, 2.0)
        with pytest.raises(KernelError):
            alpha_deriv_closed(parse("t"), k, 0.5, 1.0)

    @pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5, math.nan])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError, match=r"alpha must be in \(0,1\]"):
            check_alpha(alpha)


class TestLimit:
    def test_sine(self):
        r = alpha_deriv_limit(parse("sin(t)"), CONF, 0.5, 2.0)
        assert r.value == pytest.approx(SQRT2_COS2, rel=1e-10)
        assert r.method == "limit"
        assert r.error_estimate < 1e-8

    def test_one_sided_mode(self):
        r = alpha_deriv_limit(parse("sin(t)"), CONF, 0.5, 2.0, EstimatorConfig(one_sided=True))
        assert r.value == pytest.approx(SQRT2_COS2, rel=1e-8)

    def test_gamma_shifted(self):
        k = builtin_kernel("gamma_shifted")
        t, alpha = 1.5, 0.4
        expected = (t + 1 / gamma(alpha)) ** 0.6 * math.exp(t)
        assert alpha_deriv_limit(parse("exp(t)"), k, alpha, t).value == pytest.approx(expected, rel=1e-10)

    def test_near_start_stays_inside(self):
        # the backward point must not cross a = 0, where sqrt is singular
        r = alpha_deriv_limit(parse("sqrt(t)"), CONF, 0.5, 1e-6)
        assert r.value == pytest.approx(0.5, rel=1e-6)

    def test_refuses_start(self):
        with pytest.raises(BoundaryError):
            alpha_deriv_limit(parse("t"), CONF, 0.5, 0.0)


class TestBoundary:
    @pytest.mark.parametrize("alpha, expected", [(0.1, 0.0), (0.25, 0.0), (0.4, 0.0), (0.5, 0.5)])
    def test_sqrt(self, alpha, expected):
        r = alpha_deriv_at_start(parse("sqrt(t)"), CONF, alpha)
        assert r.value == pytest.approx(expected, abs=1e-4)
        assert r.method == "boundary_limit"
        assert not r.diverged

    def test_cube_root(self):
        r = alpha_deriv_at_start(parse("t^0.3333333333333333"), CONF, 1 / 3)
        assert r.value == pytest.approx(1 / 3, abs=1e-4)

    def test_divergence_is_flagged(self):
        r = alpha_deriv_at_start(parse("sqrt(t)"), CONF, 0.75)
        assert r.diverged
        assert r.value == math.inf

    def test_negative_divergence_keeps_sign(self):
        r = alpha_deriv_at_start(parse("-sqrt(t)"), CONF, 0.75)
        assert r.diverged and r.value == -math.inf

    def test_oscillation_has_no_limit(self):
        with pytest.raises(NoLimitError):
            alpha_deriv_at_start(parse("t^2*sin(1/t)"), CONF, 0.99)

    def test_shifted_start(self):
        r = alpha_deriv_at_start(parse("sqrt(t - 1)"), builtin_kernel("shifted", 1.0), 0.5)
        assert r.value == pytest.approx(0.5, abs=1e-6)

    def test_kernel_positive_at_start(self):
        # k(0) = 1/Gamma(alpha) > 0, so the value is just the closed form at 0
        alpha = 0.6
        r = alpha_deriv_at_start(parse("t"), builtin_kernel("gamma_shifted"), alpha)
        assert r.value == pytest.approx(gamma(alpha) ** (alpha - 1), rel=1e-6)


class TestConversion:
    def test_classical_from_alpha(self):
        assert classical_from_alpha(SQRT2_COS2, CONF, 0.5, 2.0) == pytest.approx(math.cos(2.0), rel=1e-15)

    def test_inverse_of_closed(self):
        t = 3.0
        v = alpha_deriv_closed(parse("t"), CONF, 0.2, t).value
        assert classical_from_alpha(v, CONF, 0.2, t) == pytest.approx(1.0, rel=1e-15)

    def test_refuses_start(self):
        with pytest.raises(BoundaryError):
            classical_from_alpha(1.0, CONF, 0.5, 0.0)


class TestEquivalence:
    def test_smooth(self):
        grid = [0.1 + i * 4.9 / 49 for i in range(50)]
        report = check_equivalence(parse("sin(t)*exp(t)"), CONF, 0.7, grid)
        assert report.passed(1e-6)
        assert len(report.points) == 50
        assert report.worst_t in grid

    def test_linear_is_exact(self):
        report = check_equivalence(parse("t"), builtin_kernel("shifted", -1.0), 0.35, [0.0, 1.0, 2.0])
        assert report.max_discrepancy < 1e-14

    def test_kink_is_recorded(self):
        report = check_equivalence(parse("abs(t-2)"), CONF, 0.5, [1.0, 2.0, 3.0])
        assert [p.t for p in report.failures] == [2.0]
        assert "DomainError" in report.failures[0].error
        assert report.max_discrepancy < 1e-8
        assert not report.passed()


class TestSweep:
    def test_unit_kernel_value(self):
        values = alpha_sweep(parse("t^2"), CONF, 1.0, [0.25, 0.5, 1.0])
        assert [v for _, v in values] == [2.0, 2.0, 2.0]

    def test_orders(self):
        values = dict(alpha_sweep(parse("t^2"), CONF, 4.0, [0.5, 1.0]))
        assert values[1.0] == 8.0
        assert values[0.5] == 16.0
        assert alpha_deriv_limit(parse("t^2"), CONF, 0.5, 4.0).value == pytest.approx(16.0, rel=1e-10)

    def test_alpha_one_is_classical(self):
        f = parse("exp(sin(t))*t")
        d = parse("exp(sin(t))*cos(t)*t + exp(sin(t))")
        value = alpha_sweep(f, builtin_kernel("gamma_shifted"), 1.3, [1.0])[0][1]
        assert value == eval_ast(diff_ast(f), 1.3)
        assert value == pytest.approx(eval_ast(d, 1.3), rel=1e-15)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(levels=1)
    with pytest.raises(ValueError):
        EstimatorConfig(boundary_ratio=1.0)
    assert EstimatorConfig().initial_step(8.0) == 8.0 / 1024
