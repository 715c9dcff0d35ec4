import math

import pytest

from localfrac.errors import KernelDomainError, KernelError, SingularityError
from localfrac.kernel import (
    builtin_kernel,
    custom_kernel,
    eval_kernel,
    eval_kernel_offset,
    kernel_power,
    validate_kernel,
)
from localfrac.specialfn import gamma


def test_builtins():
    assert eval_kernel(builtin_kernel("conformable"), 2.5, 0.3) == 2.5
    assert eval_kernel(builtin_kernel("shifted", 1.0), 3.0, 0.3) == 2.0
    assert eval_kernel(builtin_kernel("gamma_shifted"), 2.0, 0.5) == pytest.approx(2.0 + 1.0 / math.sqrt(math.pi))


def test_gamma_shifted_depends_on_alpha():
    k = builtin_kernel("gamma_shifted")
    assert k.alpha_dependent
    assert k(1.0, 1.0) == 2.0
    assert k(1.0, 0.25) == pytest.approx(1.0 + 1.0 / gamma(0.25), rel=1e-15)


def test_conformable_requires_zero_start():
    with pytest.raises(KernelError):
        builtin_kernel("conformable", 1.0)


def test_gamma_shifted_requires_nonnegative_start():
    with pytest.raises(KernelError):
        builtin_kernel("gamma_shifted", -1.0)


def test_unknown_kind():
    with pytest.raises(KernelError):
        builtin_kernel("caputo")


def test_outside_domain():
    k = builtin_kernel("shifted", 2.0)
    with pytest.raises(KernelDomainError):
        eval_kernel(k, 1.0)
    c = custom_kernel("t^2 + 1", 0.0, 3.0)
    with pytest.raises(KernelDomainError):
        c(3.5)


def test_custom():
    c = custom_kernel("t^2 + 1", 0.0, 3.0)
    assert c(2.0) == 5.0
    assert "t^2 + 1" in c.describe()


def test_custom_rejects_other_variables():
    from localfrac.expr import parse

    with pytest.raises(KernelError):
        custom_kernel(parse("t*y", variables=("t", "y")), 0.0, 1.0)


def test_custom_needs_finite_window():
    with pytest.raises(KernelError):
        custom_kernel("t", 0.0, math.inf)


def test_offset_is_exact_near_start():
    k = builtin_kernel("shifted", 1e8)
    assert eval_kernel_offset(k, 1e-12) == 1e-12
    assert eval_kernel(k, 1e8 + 1e-12) == 0.0  # the reason the offset form exists


def test_power_conventions():
    k = builtin_kernel("conformable")
    assert kernel_power(k, 0.0, 0.5, 0.5) == 0.0
    assert kernel_power(k, 0.0, 1.0, 0.0) == 1.0
    assert kernel_power(k, 7.3, 1.0, 0.0) == 1.0
    with pytest.raises(SingularityError):
        kernel_power(k, 0.0, 0.5, -0.5)
    with pytest.raises(SingularityError):
        kernel_power(k, 1e-200, 0.5, -2.0)


def test_negative_kernel_power():
    k = custom_kernel("t - 1", 0.0, 2.0)
    with pytest.raises(KernelError):
        kernel_power(k, 0.5, 0.5, 0.5)


@pytest.mark.parametrize("kind", ["conformable", "shifted", "gamma_shifted"])
def test_builtins_validate(kind):
    report = validate_kernel(builtin_kernel(kind), n_samples=200)
    assert report.passed
    assert report.samples_checked == 200 * 10


def test_validation_flags_vanishing_and_negative():
    report = validate_kernel(custom_kernel("(t - 1)^2", 0.0, 2.0), n_samples=201, alphas=[0.5])
    assert not report.passed
    assert [v[0] for v in report.violations] == [1.0]
    report = validate_kernel(custom_kernel("t - 1", 0.0, 2.0), n_samples=5, alphas=[0.5])
    assert {v[0] for v in report.violations} == {0.0, 0.5, 1.0}


def test_validation_records_evaluation_failure():
    report = validate_kernel(custom_kernel("1/(t - 1)", 0.0, 2.0), n_samples=3, alphas=[0.5])
    t, _, value = report.violations[0]
    assert t == 0.0  # k(0) = -1
    assert any(math.isnan(v[2]) for v in report.violations)


def test_gamma_shifted_at_start():
    assert builtin_kernel("gamma_shifted")(0.0, 0.5) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-14)
    assert eval_kernel(builtin_kernel("shifted", 2.0), 2.0) == 0.0


def test_kernel_vanishing_inside_fails_validation():
    report = validate_kernel(custom_kernel("t - 5", 0.0, 10.0), n_samples=1001, alphas=[0.5])
    assert not report.passed
    assert max(t for t, _, _ in report.violations) == pytest.approx(5.0)
    assert validate_kernel(custom_kernel("exp(t)", -1.0, 1.0)).passed
