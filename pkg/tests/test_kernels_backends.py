"""Agreement between the compiled kernel core and the numpy fallback."""

import numpy as np
import pytest

import opineq.kernels as kernels

BACKENDS = kernels.available_backends()

needs_both = pytest.mark.skipif(len(BACKENDS) < 2,
                                reason="compiled extension not built")


@needs_both
@pytest.mark.parametrize("p,w,m,omc", [
    (1.5, 0.0, 0, False),      # d=2 angular kernel
    (2.0, 1.0, 0, False),      # d=3
    (1.25, -0.5, 0, False),    # d=1.5, singular sin weight
    (0.5, 0.0, 0, False),      # Coulomb channel kernel
    (0.5, 0.0, 2, False),      # cos(2 theta) weight
    (1.5, 0.0, 1, True),       # 1 - cos weight
])
def test_backend_agreement(p, w, m, omc):
    um1 = np.geomspace(1e-10, 1e3, 60)
    eta = np.concatenate([np.zeros(30), np.geomspace(1e-8, 1.0, 30)])
    results = {}
    for name, fn in BACKENDS.items():
        v, e, n = fn(p, w, m, um1, eta, 1e-11, omc)
        assert n >= um1.size
        results[name] = v
    a, b = results["cython"], results["python"]
    scale = np.maximum(np.abs(a), 1e-300)
    assert np.max(np.abs(a - b) / scale) < 1e-8


@needs_both
def test_backends_report_errors():
    for name, fn in BACKENDS.items():
        v, e, _ = fn(1.5, 0.0, 0, np.array([0.5]), np.array([0.0]), 1e-11)
        assert e[0] >= 0
        assert e[0] < 1e-9 * abs(v[0])


def test_selected_backend_deterministic():
    um1 = np.geomspace(1e-6, 10.0, 25)
    v1, _, n1 = kernels.polar_batch(1.5, 0.0, 0, um1, np.zeros(25), 1e-11)
    v2, _, n2 = kernels.polar_batch(1.5, 0.0, 0, um1, np.zeros(25), 1e-11)
    assert np.array_equal(v1, v2)
    assert n1 == n2


def test_backend_name_reported():
    assert kernels.backend_name in ("cython", "python")
