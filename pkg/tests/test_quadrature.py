import math

import numpy as np
import pytest

from opineq.errors import AccuracyError, DomainError, SingularInputError
from opineq.quadrature import (AngularKernelQuery, QuadResult, angular_kernel,
                               angular_kernel_batch, integrate_adaptive,
                               sphere_surface)

K2_AT_2 = 2.9125841903282682   # int_0^{2pi} (2 - cos t)^{-3/2} dt, mpmath 30 digits


def test_constant_integrand():
    res = integrate_adaptive(lambda x: 1.0, 0.0, 1.0, 1e-10)
    assert abs(res.value - 1.0) < 1e-12
    assert res.evaluations >= 1


def test_inverse_sqrt_endpoint_singularity():
    res = integrate_adaptive(lambda x: x ** -0.5, 0.0, 1.0, 1e-10)
    assert abs(res.value - 2.0) < 1e-9


def test_semi_infinite_exponential():
    res = integrate_adaptive(lambda x: math.exp(-x), 0.0, math.inf, 1e-10)
    assert abs(res.value - 1.0) < 1e-9


def test_nonconvergence_carries_best_estimate():
    # oscillation far beyond what the subdivision budget can resolve
    with pytest.raises(AccuracyError) as exc:
        integrate_adaptive(lambda x: math.cos(3e7 * x * x), 0.0, 1.0, 1e-10)
    assert exc.value.best is not None
    assert exc.value.best.evaluations > 1000


def test_nan_integrand_is_domain_error():
    with pytest.raises(DomainError):
        integrate_adaptive(lambda x: float("nan"), 0.0, 1.0, 1e-8)


def test_bad_interval_and_tolerance():
    with pytest.raises(DomainError):
        integrate_adaptive(lambda x: x, 1.0, 1.0)
    with pytest.raises(DomainError):
        integrate_adaptive(lambda x: x, 0.0, 1.0, tol=-1.0)


def test_quadresult_invariants():
    with pytest.raises(DomainError):
        QuadResult(float("inf"), 0.0, 1)
    with pytest.raises(DomainError):
        QuadResult(1.0, -1.0, 1)
    with pytest.raises(DomainError):
        QuadResult(1.0, 0.0, 0)


def test_angular_query_invariants():
    with pytest.raises(DomainError):
        AngularKernelQuery(d=0.5, u=2.0)
    with pytest.raises(DomainError):
        AngularKernelQuery(d=2.0, u=0.5)
    with pytest.raises(DomainError):
        AngularKernelQuery(d=2.0, u=2.0, eta=-1.0)


def test_kernel_d3_closed_form():
    # K_3(u, 0) (u^2 - 1) = 4 pi
    for u in (1.1, 2.0, 10.0):
        res = angular_kernel(AngularKernelQuery(d=3.0, u=u), tol=1e-12)
        assert abs(res.value * (u * u - 1.0) - 4.0 * math.pi) < 1e-9


def test_kernel_d3_value_at_two():
    res = angular_kernel(AngularKernelQuery(d=3.0, u=2.0), tol=1e-12)
    assert abs(res.value - 4.0 * math.pi / 3.0) < 1e-10


def test_kernel_d1_two_point_sphere():
    res = angular_kernel(AngularKernelQuery(d=1.0, u=2.0))
    assert res.value == pytest.approx(4.0 / 3.0, abs=1e-15)


def test_kernel_d2_regression_constant():
    res = angular_kernel(AngularKernelQuery(d=2.0, u=2.0), tol=1e-12)
    assert abs(res.value - K2_AT_2) < 1e-10


def test_kernel_monotone_in_u_and_eta():
    for d in (1.5, 2.0, 3.0):
        vals, _, _ = angular_kernel_batch(d, [0.1, 0.5, 2.0, 10.0], 0.0)
        assert np.all(np.diff(vals) < 0)
        vals_eta, _, _ = angular_kernel_batch(d, [0.5] * 4, [0.0, 0.1, 1.0, 10.0])
        assert np.all(np.diff(vals_eta) < 0)


def test_kernel_u_to_one_limit():
    # (u-1) K_d(u, 0) approaches a finite positive limit
    for d in (1.5, 2.0, 3.0):
        um1 = np.array([1e-2, 1e-4, 1e-6])
        vals, _, _ = angular_kernel_batch(d, um1, 0.0, tol=1e-12)
        lim = um1 * vals
        assert np.all(lim > 0)
        ratios = lim[1:] / lim[:-1]
        assert np.all(np.abs(ratios - 1.0) < 0.05)


def test_kernel_singular_input():
    with pytest.raises(SingularInputError):
        angular_kernel(AngularKernelQuery(d=2.0, u=1.0, eta=0.0))
    # regularized evaluation at u = 1 is fine
    res = angular_kernel(AngularKernelQuery(d=2.0, u=1.0, eta=0.5))
    assert res.value > 0


def test_sphere_surface_values():
    assert sphere_surface(1) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert sphere_surface(2) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert sphere_surface(0) == pytest.approx(2.0, rel=1e-15)


def test_kernel_deterministic():
    q = AngularKernelQuery(d=2.3, u=1.37, eta=1e-3)
    a = angular_kernel(q, tol=1e-11)
    b = angular_kernel(q, tol=1e-11)
    assert a.value == b.value and a.evaluations == b.evaluations
