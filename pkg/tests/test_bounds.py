import math

import numpy as np
import pytest

from opineq.bounds import (BoundReport, Configuration, critical_constant_printed,
                           excess_charge_nonrel_2d, excess_charge_relativistic,
                           expectation_bound, flux_delta, max_bindable, pair_sum)
from opineq.errors import DomainError

# mpmath 25-digit references computed from Gamma(1/4) = 3.6256099082219083...
PRINTED_AS_IS = 0.0417258278867959034
PRINTED_FOURTH = 0.378016639464455749
PRINTED_COMPONENT = 2.18843961522647664


def test_relativistic_examples():
    assert excess_charge_relativistic(0.0, 1.0) == 3.0
    assert excess_charge_relativistic(2.0, 0.0) == 5.0
    assert excess_charge_relativistic(0.0, 0.0) == 1.0
    with pytest.raises(DomainError):
        excess_charge_relativistic(-0.5, 1.0)


def test_relativistic_affine_in_delta():
    # slope exactly 2 in the flux parameter (dyadic grid: exact arithmetic)
    deltas = np.arange(13) * 0.5
    vals = [excess_charge_relativistic(d, 1.5) for d in deltas]
    slopes = np.diff(vals) / np.diff(deltas)
    assert np.all(slopes == 2.0)


def test_nonrel_2d_examples():
    assert excess_charge_nonrel_2d(1.0) == 5.5
    assert excess_charge_nonrel_2d(math.e ** 2) == pytest.approx(
        2.0 * math.e ** 2 + 4.5, rel=1e-14)
    assert excess_charge_nonrel_2d(100.0) == pytest.approx(205.8025850929940, rel=1e-14)


def test_expectation_bound_examples():
    assert expectation_bound(1.0) == 10.0
    assert expectation_bound(math.e ** 2) == pytest.approx(14.0, rel=1e-14)
    assert expectation_bound(math.e ** 4) == pytest.approx(18.0, rel=1e-14)


def test_flux_delta_examples():
    assert flux_delta(1.0, 2.0) == 2.0
    assert flux_delta(0.0, 3.0) == 0.0
    assert flux_delta(2.0, 1.0) == 1.0


def test_pair_sum_examples():
    assert pair_sum(Configuration(((1, 0), (-1, 0)))) == pytest.approx(1.0, abs=1e-14)
    assert pair_sum(Configuration(((1, 0), (2, 0)))) == pytest.approx(3.0, abs=1e-14)


def test_pair_sum_property_random():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        pts = rng.uniform(-5.0, 5.0, size=(n, 2))
        r = np.hypot(pts[:, 0], pts[:, 1])
        pts[r < 1e-9] += 1.0
        S = pair_sum(Configuration(tuple(map(tuple, pts))))
        assert S >= n * (n - 1) / 2.0 - 1e-12


def test_configuration_validation():
    with pytest.raises(DomainError):
        Configuration(((0.0, 0.0), (1.0, 0.0)))
    with pytest.raises(DomainError):
        Configuration(((1.0, 1.0), (1.0, 1.0)))


def test_max_bindable_examples():
    assert max_bindable(0.0, 1.0) == 2
    assert max_bindable(2.0, 0.0) == 4
    assert max_bindable(0.25, 0.25) == 1
    assert max_bindable(0.0, 0.0) == 0


def test_max_bindable_vs_threshold():
    rng = np.random.default_rng(7)
    for _ in range(200):
        delta, Z = rng.uniform(0, 4), rng.uniform(0, 4)
        nmax = max_bindable(delta, Z)
        thr = excess_charge_relativistic(delta, Z)
        assert nmax < thr
        t = 2.0 * (delta + Z)
        if t != math.floor(t):
            assert nmax == math.ceil(thr) - 1


def test_printed_critical_constants():
    assert critical_constant_printed("as-printed") == pytest.approx(
        PRINTED_AS_IS, rel=5e-15)
    assert critical_constant_printed("fourth-power") == pytest.approx(
        PRINTED_FOURTH, rel=5e-15)
    g = 3.6256099082219083
    assert g ** 4 / (8 * math.pi ** 2) == pytest.approx(PRINTED_COMPONENT, rel=5e-15)
    with pytest.raises(DomainError):
        critical_constant_printed("other")


def test_bound_report():
    rep = BoundReport.build(Z=1.0, delta=0.0)
    vals = {k: v for k, v, _ in rep.values}
    assert vals["excess_charge_relativistic"] == 3.0
    assert vals["excess_charge_nonrel_2d"] == 5.5
    assert vals["expectation_bound"] == 10.0
    assert vals["max_bindable"] == 2.0
    assert rep.threshold_premise_assumed
    rep2 = BoundReport.build(Z=0.5, B=1.0, R=2.0)
    assert rep2.delta == 2.0
    with pytest.raises(DomainError):
        BoundReport.build(Z=1.0)
