import math

import pytest

from holder_metrics.analyzers.hardy_estimator import (
    HardyEstimator,
    classify_hp_membership,
    estimate_hardy,
    hyperbolic_distance_to_circle,
    integral_means,
    verify_hardy_bound,
)
from holder_metrics.catalog import resolve_domain
from holder_metrics.config import Config
from holder_metrics.exceptions import BadParameter, MissingAlpha
from holder_metrics.schemas import HardyEstimate, HolderEstimate, Measured, MeansRow


def _holder(alpha):
    return HolderEstimate(alpha_hat=alpha, raw_slope=1.0 - (alpha or 0.0), M_hat=Measured(value=1.0), depth=8)


def test_half_plane_distance_to_circle_is_log_r():
    # the positive axis is the geodesic from 1 to the circle |w| = r
    cd = hyperbolic_distance_to_circle(resolve_domain('sector:3.1416'), 100.0, n_rays=64)
    assert cd.value == pytest.approx(math.log(100.0), rel=1e-9)
    assert cd.w_r == pytest.approx(100.0, rel=1e-9)


def test_circle_distance_parameters():
    d = resolve_domain('sector:3.1416')
    with pytest.raises(BadParameter):
        hyperbolic_distance_to_circle(d, 100.0, n_rays=32)
    with pytest.raises(BadParameter):
        hyperbolic_distance_to_circle(d, 0.5)


@pytest.mark.parametrize("name, hardy", [
    ('sector:3.1416', 1.0),
    ('sector:1.5708', 2.0),
])
def test_sector_hardy_numbers(name, hardy):
    estimate = estimate_hardy(resolve_domain(name), n_rays=64)
    assert estimate.finite
    assert estimate.h_hat == pytest.approx(hardy, rel=0.05)
    assert all(row.chordal_bound_ok for row in estimate.ratios)


def test_strip_is_flagged_non_finite():
    estimate = estimate_hardy(resolve_domain('strip'), n_rays=64)
    assert not estimate.finite
    assert estimate.h_hat is None
    assert estimate.ratios[-1].ratio > 10


def test_integral_means_at_center():
    value, error = integral_means(resolve_domain('sector:3.1416'), 0.5, 0.0)
    assert value == pytest.approx(2 * math.pi)
    assert error == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p, r", [(0.0, 0.5), (-1.0, 0.5), (1.0, 1.0), (1.0, -0.1)])
def test_integral_means_parameters(p, r):
    with pytest.raises(BadParameter):
        integral_means(resolve_domain('sector:3.1416'), p, r)


def test_membership_from_given_rows():
    d = resolve_domain('sector:3.1416')
    flat = [MeansRow(p=1.0, k=k, r=1 - 2.0 ** -k, mean=3.0, error=0.0) for k in range(10, 13)]
    growing = [MeansRow(p=1.0, k=k, r=1 - 2.0 ** -k, mean=10.0 ** (k - 10), error=0.0) for k in range(10, 13)]
    assert classify_hp_membership(d, 1.0, rows=flat) == 'inside'
    assert classify_hp_membership(d, 1.0, rows=growing) == 'outside'


def test_hardy_bound():
    d = resolve_domain('sector:1.5708')
    verdict = verify_hardy_bound(d, _holder(0.5), HardyEstimate(h_hat=2.0))
    assert verdict.passed
    assert verdict.bound == pytest.approx(2.0)
    failing = verify_hardy_bound(d, _holder(1.0), HardyEstimate(h_hat=2.0))
    assert not failing.passed
    with pytest.raises(MissingAlpha):
        verify_hardy_bound(d, _holder(None), HardyEstimate(h_hat=2.0))


def test_hardy_bound_floor_is_configurable(monkeypatch):
    d = resolve_domain('sector:1.5708')
    above = HardyEstimate(h_hat=2.005)
    verdict = verify_hardy_bound(d, _holder(0.5), above)
    assert verdict.passed
    assert verdict.uncertainty == pytest.approx(Config.HARDY_BOUND_FLOOR)
    monkeypatch.setattr(Config, 'HARDY_BOUND_FLOOR', 0.0)
    assert not verify_hardy_bound(d, _holder(0.5), above).passed


def test_estimator_skips_bound_without_alpha():
    estimator = HardyEstimator(resolve_domain('strip'))
    verdict = estimator.bound(_holder(None), HardyEstimate(h_hat=None, finite=False))
    assert verdict.skipped
    assert estimator.get_notes()


@pytest.mark.slow
def test_estimator_sweeps_hp_membership():
    estimate = HardyEstimator(resolve_domain('sector:3.1416'), n_rays=64, ps=(0.5, 4.0)).analyze()
    verdicts = {row.p: row.verdict for row in estimate.memberships}
    # the half-plane lies in H^p exactly for p < 1
    assert verdicts[0.5] == 'inside'
    assert verdicts[4.0] == 'outside'
