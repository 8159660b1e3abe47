import math

import numpy as np
import pytest

from holder_metrics.analyzers.holder_analyzer import (
    LOG2,
    AnnularGrid,
    HolderAnalyzer,
    annulus_angles,
    check_forward_constant,
    check_geodesic_conditions,
    check_holder_pairs,
    check_hyperbolic_growth,
    constant_diverges,
    decay_exponent,
    estimate_alpha_from_growth,
    fit_window,
    panel_remainder,
    radial_h,
    scan_spherical_derivative,
    stable_window_fit,
    tail_lengths,
)
from holder_metrics.catalog import resolve_domain
from holder_metrics.exceptions import BadAlpha, BadParameter
from holder_metrics.schemas import Measured


def test_annulus_angles_include_both_axis_directions():
    a = annulus_angles(1)
    assert a.size == 16
    assert 0.0 in a
    assert np.any(np.isclose(a, math.pi, rtol=0, atol=0))


def test_radial_h():
    assert radial_h(1.0) == pytest.approx(0.0)
    assert radial_h(0.5) == pytest.approx(math.log(3.0))


def test_fit_window_is_deepest_half():
    assert fit_window(12).tolist() == [7, 8, 9, 10, 11, 12]
    assert fit_window(4).tolist() == [3, 4]


def test_grid_depth_floor():
    with pytest.raises(BadParameter):
        AnnularGrid(resolve_domain('strip'), 3)


@pytest.mark.parametrize("name, alpha", [
    ('sector:1.5708', 0.5),
    ('sector:3.1416', 1.0),
    ('koebe', 1.0),
])
def test_scan_reproduces_known_alpha(name, alpha):
    estimate = scan_spherical_derivative(resolve_domain(name), 12)
    assert estimate.alpha_hat == pytest.approx(alpha, abs=0.05)
    assert len(estimate.annuli) == 12
    assert estimate.M_hat.value > 0


@pytest.mark.parametrize("depth", [12, 16])
def test_strip_has_no_alpha(depth):
    estimate = scan_spherical_derivative(resolve_domain('strip'), depth)
    assert estimate.alpha_hat is None
    assert any('falls off' in n for n in estimate.notes)


@pytest.mark.slow
def test_growth_fit_agrees_with_scan_on_quarter_plane():
    fit = estimate_alpha_from_growth(resolve_domain('sector:1.5708'), 14, 1e-3)
    assert fit.alpha_hat == pytest.approx(0.5, abs=0.1)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_pairs_reject_bad_alpha(alpha):
    with pytest.raises(BadAlpha):
        check_holder_pairs(resolve_domain('sector:1.5708'), alpha, 10)


def test_pair_constant_is_finite():
    K = check_holder_pairs(resolve_domain('sector:1.5708'), 0.5, n_pairs=2000, seed=4)
    assert 0 < K.value < math.inf
    assert K.uncertainty >= 0
    again = check_holder_pairs(resolve_domain('sector:1.5708'), 0.5, n_pairs=2000, seed=4)
    assert again.value == K.value


def test_tail_lengths_decrease():
    tails = tail_lengths(resolve_domain('sector:3.1416'), 0.0, 10)
    assert tails.size == 11
    assert np.all(np.diff(tails) < 0)
    # l_σ of the image of [0, 1) is σ(1, ∞)
    assert tails[0] == pytest.approx(math.pi / 2, rel=1e-6)


def test_constant_divergence():
    assert constant_diverges(1.0, 1.0 + math.log(3.0))
    assert not constant_diverges(1.0, 1.1)
    assert constant_diverges(1.0, math.inf)


def test_forward_constant():
    d = resolve_domain('sector:1.5708')
    result = check_forward_constant(d, Measured(value=1.0, uncertainty=0.0), Measured(value=1.0, uncertainty=0.0))
    assert result.passed
    assert result.slack == pytest.approx(89.0)


@pytest.mark.slow
def test_analyzer_collects_constants():
    estimate = HolderAnalyzer(resolve_domain('sector:1.5708'), depth=10, samples=2000).analyze()
    assert estimate.alpha_hat == pytest.approx(0.5, abs=0.05)
    assert estimate.K_hat is not None
    assert set(estimate.C_hat) == {'growth', 'C1', 'C2', 'C3'}
    assert all(row.max_growth_excess is not None for row in estimate.annuli)


def test_stable_window_drops_shallow_annuli_with_another_slope():
    ks = fit_window(12)
    x = ks * LOG2
    # slope 0.8 up to k = 9, 0.5 from there on
    y = np.where(ks <= 9, 0.8 * (x - 9 * LOG2), 0.5 * (x - 9 * LOG2))
    fit = stable_window_fit(ks, x, y, lambda sl: 1.0 - sl, drift_tolerance=0.04)
    assert fit.ks.tolist() == [9, 10, 11, 12]
    assert fit.raw_alpha == pytest.approx(0.5)
    assert fit.drift == pytest.approx(0.0, abs=1e-12)


def test_decay_exponent_of_log_decay():
    ks = np.arange(7, 13)
    t = (ks[:-1] + 0.5) * LOG2
    assert decay_exponent(ks, t ** -0.9) == pytest.approx(0.9)
    assert decay_exponent(ks, np.full(5, 0.5)) == 0.0
    assert decay_exponent(ks[:2], np.asarray([0.5])) == 0.0


@pytest.mark.slow
def test_translated_sector_keeps_its_alpha():
    domain = resolve_domain('sector:1.5708:offset=-5,0')
    estimate = scan_spherical_derivative(domain, 16)
    assert estimate.alpha_hat == pytest.approx(0.5, abs=0.05)
    assert estimate.alpha_uncertainty >= abs(estimate.drift)
    growth = estimate_alpha_from_growth(domain, 14, 1e-3)
    assert growth.alpha_hat == pytest.approx(0.5, abs=0.1)
    assert math.isfinite(growth.uncertainty)


def test_panel_remainder():
    j = np.arange(1, 51, dtype=float)
    assert panel_remainder(j ** -0.8) == math.inf
    expected = math.pi ** 2 / 6.0 - float(np.sum(j ** -2.0))
    assert panel_remainder(j ** -2.0) == pytest.approx(expected, rel=1e-3)
    assert panel_remainder(np.zeros(8)) == 0.0


def test_strip_tail_lengths_converge():
    tails = tail_lengths(resolve_domain('strip'), 0.0, 12)
    assert tails[0] == pytest.approx(math.pi, rel=1e-3)
    s = 2.0 ** -np.arange(1, 13, dtype=float)
    np.testing.assert_allclose(tails[1:], 2.0 * np.arctan(1.0 / np.log((2.0 - s) / s)), rtol=1e-3)


@pytest.mark.slow
def test_hyperbolic_growth_constant_is_stable_only_at_the_true_alpha():
    quarter = resolve_domain('sector:1.5708')
    at_half = [check_hyperbolic_growth(quarter, 0.5, depth).value for depth in (12, 14)]
    assert abs(at_half[1] - at_half[0]) < 0.1
    above = [check_hyperbolic_growth(quarter, 0.7, depth).value for depth in (12, 14)]
    assert above[1] - above[0] > 0.25


@pytest.mark.parametrize("angle", [0.0, math.pi])
def test_geodesic_constants_are_ordered(angle):
    conditions = check_geodesic_conditions(resolve_domain('sector:1.5708'), angle, 0.5, 12)
    assert conditions.ordering_ok
    assert conditions.C1 >= conditions.C2 >= conditions.C3
    assert not conditions.notes


def test_geodesic_ordering_toward_a_finite_boundary_point():
    quarter = resolve_domain('sector:1.5708')
    conditions = check_geodesic_conditions(quarter, 0.5 * math.pi, 0.5, 12)
    assert conditions.ordering_ok
    assert conditions.uncertainty >= quarter.boundary_sampler(1e-3).uncertainty


def test_pair_constant_grows_only_above_the_true_alpha():
    quarter = resolve_domain('sector:1.5708')

    def ratio(alpha):
        shallow = check_holder_pairs(quarter, alpha, 20000, seed=1, boundary_depth=10).value
        deep = check_holder_pairs(quarter, alpha, 20000, seed=1, boundary_depth=20).value
        return deep / shallow

    assert ratio(0.5) < 1.3
    assert ratio(0.9) > 1.5
