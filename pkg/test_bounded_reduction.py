import math

import numpy as np
import pytest

from holder_metrics.analyzers.bounded_reduction import (
    DENSITY_FLOOR,
    QH_BOX,
    QHFit,
    ReductionAnalyzer,
    build_reduction,
    check_alpha_c2_consistency,
    check_boundary_image,
    check_conformal_invariance,
    check_density_bound,
    check_distance_comparability,
    check_equivalence,
    check_qh_holder,
    check_qh_sandwich,
    density_product,
    distance_fraction,
    equivalence_verdict,
    fraction_bounds,
    qh_verdict,
)
from holder_metrics.catalog import resolve_domain, sample_disk
from holder_metrics.schemas import HolderEstimate, Measured


@pytest.fixture(scope='module')
def half_plane():
    return build_reduction(resolve_domain('sector:3.1416'))


def test_half_plane_radius(half_plane):
    # w0 = 1 sits at distance 1 from the imaginary axis
    assert half_plane.w0 == pytest.approx(1.0)
    assert half_plane.r == pytest.approx(0.5)


def test_boundary_maps_onto_circle(half_plane):
    # g(it) = 1/2 / (it − 1) runs over the circle |y + 1/4| = 1/4
    y = half_plane.g(1j * np.linspace(-50.0, 50.0, 101))
    np.testing.assert_allclose(np.abs(y + 0.25), 0.25, rtol=1e-12)
    assert complex(half_plane.g_inverse(np.asarray([0j]))[0]).real == math.inf


def test_reduced_membership(half_plane):
    y = np.asarray([1.0, -0.25, 0.0, 5.0, -0.6])
    assert half_plane.contains(y).tolist() == [True, False, False, False, True]
    assert not half_plane.in_prime(np.asarray([0j]))[0]


def test_reduced_boundary_distances(half_plane):
    d = half_plane.delta_prime(np.asarray([-1.0, 1.0]))
    np.testing.assert_allclose(d, [0.5, 1.0], atol=1e-5)
    assert half_plane.delta_zero(np.asarray([3.5]))[0] == pytest.approx(0.5)


def test_fraction_tends_to_inverse_radius():
    assert distance_fraction(1e8, 1.0, 0.5) == pytest.approx(2.0, rel=1e-6)
    assert distance_fraction(0.0, 0.0, 0.5) == pytest.approx(0.5)


@pytest.mark.parametrize("r, w0", [(0.5, 0j), (2.0, 0j), (0.5, 1.0), (0.3, -4.0 + 1j), (3.0, 2j)])
def test_fraction_stays_in_envelope(r, w0):
    lo, hi = fraction_bounds(r, abs(w0))
    rng = np.random.default_rng(0)
    w = 10.0 ** rng.uniform(-3, 3, 5000) * np.exp(2j * math.pi * rng.uniform(size=5000))
    w = np.concatenate([w, w0 + r * np.exp(2j * math.pi * rng.uniform(size=100))])
    f = distance_fraction(w, w0, r)
    assert np.all(f >= lo * (1 - 1e-12))
    assert np.all(f <= hi * (1 + 1e-12))


def test_fraction_bounds_at_origin():
    assert fraction_bounds(0.5, 0.0) == pytest.approx((0.5, 2.0))
    assert fraction_bounds(2.0, 0.0) == pytest.approx((0.5, 2.0))


def test_identity_density_closed_form():
    # disk onto itself: λδ = 2(1 − |z|)/(1 − |z|²) = 2/(1 + |z|)
    z = sample_disk(1000, seed=2, max_radius=0.999)
    got = density_product(z, np.ones_like(z), 1.0 - np.abs(z))
    np.testing.assert_allclose(got, 2.0 / (1.0 + np.abs(z)), rtol=1e-12)


@pytest.mark.parametrize("name", ['sector:3.1416', 'sector:1.5708', 'koebe', 'strip'])
def test_boundary_image_inside_half_disk(name):
    image = check_boundary_image(build_reduction(resolve_domain(name)))
    assert image.value <= 0.5 + image.uncertainty + 1e-12


def test_density_bound_on_half_plane(half_plane):
    density = check_density_bound(half_plane, depth=10)
    assert density.passed
    # D′ is the outside of |y + 1/4| = 1/4, where λδ = 2/(4|y + 1/4| + 1)
    assert density.minimum.value >= 2.0 / 18.0 - 1e-6
    assert density.minimum.value > DENSITY_FLOOR
    y = half_plane.reduced_map.eval(np.asarray([density.argmin]))
    assert density.minimum.value == pytest.approx(2.0 / (4.0 * abs(y[0] + 0.25) + 1.0), rel=1e-4)


def test_distance_comparability(half_plane):
    comp = check_distance_comparability(half_plane, n_samples=2000, seed=1, depth=10)
    assert comp.envelope_ok
    assert 0 < comp.c1.value <= comp.c2.value < math.inf
    lo, hi = comp.bounds
    assert lo <= comp.fraction_min <= comp.fraction_max <= hi


def test_conformal_invariance(half_plane):
    result = check_conformal_invariance(half_plane, n_pairs=200)
    assert result.passed, result.detail


@pytest.mark.parametrize("alpha, c2, passed", [
    (None, 1.0, True),
    (0.5, None, True),
    (0.5, 0.5, True),
    (0.05, 0.1, False),
])
def test_alpha_c2_consistency(alpha, c2, passed):
    assert check_alpha_c2_consistency(alpha, c2).passed is passed


def test_equivalence_needs_a_verdict():
    holder = HolderEstimate(alpha_hat=0.5, raw_slope=0.5, M_hat=Measured(value=1.0), depth=8)
    missing = equivalence_verdict(holder, QHFit(None, None, [], None, 1.0))
    assert missing.passed is None
    assert missing.note
    agree = equivalence_verdict(holder, QHFit(0.0, 1.0, [1.0, 1.0], True, 1.0))
    assert agree.passed


@pytest.mark.slow
def test_quasihyperbolic_holder_on_half_plane(half_plane):
    fit = check_qh_holder(half_plane, depth=6)
    assert fit.verdict is True
    assert fit.c2 > 0
    assert len(fit.c2_by_depth) in (2, 3)
    assert fit.c2_uncertainty < 0.15 * abs(fit.c2_by_depth[-2])
    assert fit.c1_uncertainty is not None


@pytest.mark.slow
def test_quasihyperbolic_holder_fails_on_strip():
    fit = check_qh_holder(build_reduction(resolve_domain('strip')), depth=6)
    assert fit.verdict is False


@pytest.mark.slow
def test_reduction_analyzer_report():
    analyzer = ReductionAnalyzer(resolve_domain('sector:3.1416'), depth=10, samples=2000, qh_depth=5)
    report = analyzer.analyze()
    assert report.r.value == pytest.approx(0.5)
    assert report.density_pass
    assert report.boundary_image_max.value <= 0.5 + 1e-6
    assert {r.name for r in analyzer.invariants} >= {'conformal_invariance', 'alpha_c2_consistency'}


def test_half_plane_anchor_lies_toward_the_deepest_point(half_plane):
    # δ₀ on the coarse grid peaks at y = 2, midway between |y + 1/4| = 1/4 and |y| = 4
    assert half_plane.anchor == pytest.approx(2.0)


@pytest.mark.parametrize("name", ['sector:1.5708', 'strip', 'koebe'])
def test_anchor_is_inside_and_off_the_box_edge(name):
    reduction = build_reduction(resolve_domain(name))
    anchor = np.asarray([reduction.anchor])
    assert abs(reduction.anchor) > 1.0
    assert reduction.region.members(anchor)[0]
    xmin, xmax, ymin, ymax = QH_BOX
    assert xmin < reduction.anchor.real < xmax and ymin < reduction.anchor.imag < ymax
    assert reduction.delta_zero(anchor)[0] > 0.0


@pytest.mark.parametrize("c2_by_depth, verdict", [
    ([1.0, 1.05], True),
    ([1.2, 1.0, 1.05], True),
    ([1.0, 1.4, 1.96], False),
    ([1.0, 1.4, 1.7], None),
    ([1.0, 2.0, 2.7], None),
    ([1.0, 1.5], None),
])
def test_qh_verdict(c2_by_depth, verdict):
    got, message = qh_verdict(c2_by_depth)
    assert got is verdict
    assert (message is None) is (verdict is True)


def test_equivalence_is_inconclusive_without_a_qh_verdict():
    holder = HolderEstimate(alpha_hat=0.5, raw_slope=0.5, M_hat=Measured(value=1.0), depth=8)
    unresolved = equivalence_verdict(holder, QHFit(0.0, 1.7, [1.0, 1.4, 1.7], None, 1.0))
    assert unresolved.passed is None
    assert unresolved.inconclusive
    assert 'inconclusive' in unresolved.note
    missing = equivalence_verdict(holder, QHFit(None, None, [], None, 1.0))
    assert not missing.inconclusive
    assert 'unavailable' in missing.note


@pytest.mark.slow
def test_qh_sandwich_on_half_plane(half_plane):
    fit = check_qh_holder(half_plane, depth=5)
    result = check_qh_sandwich(half_plane, fit, n_points=32)
    assert result.passed, result.detail


@pytest.mark.slow
def test_thin_sector_is_not_misclassified():
    verdict = check_equivalence(resolve_domain('sector:0.7854'), depth=12, qh_depth=7)
    assert verdict.holder
    assert verdict.qh is not False
    assert verdict.passed or verdict.inconclusive
