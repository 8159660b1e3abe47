import math

import numpy as np
import pytest

from holder_metrics.catalog import (
    R_MAX,
    boundary_distance_slack,
    catalog_names,
    derivative_consistency,
    injectivity_violations,
    inverse_consistency,
    koebe_derivative_slack,
    koebe_distortion_slack,
    list_catalog,
    make_koebe,
    make_strip,
    resolve_domain,
    sample_disk,
    sector_derivative_slack,
)
from holder_metrics.exceptions import BadParameter, UnknownDomain


def test_printed_openings_snap_to_exact_multiples():
    d = resolve_domain('sector:1.5708')
    assert d.map.params['theta'] == math.pi / 2
    assert d.known_alpha == pytest.approx(0.5)
    assert d.known_hardy == pytest.approx(2.0)
    assert resolve_domain('sector:3.1416').name == 'sector:3.1416'


def test_named_domains_resolve_case_insensitively():
    assert resolve_domain(' Koebe ').name == 'koebe'
    strip = resolve_domain('STRIP')
    assert strip.known_alpha is None
    assert math.isinf(strip.known_hardy)
    assert not strip.hardy_is_finite


@pytest.mark.parametrize("name", ['disk', 'sector:abc', 'sector:7', 'sector:0', 'sector:1.5:offset=x,1'])
def test_unknown_domains(name):
    with pytest.raises(UnknownDomain):
        resolve_domain(name)


def test_offset_sector():
    d = resolve_domain('sector:1.5708:offset=-5,0')
    assert d.base_point == pytest.approx(-4.0)
    assert d.contains_origin
    assert d.dist_origin_to_complement() == pytest.approx(5.0 * math.sin(math.pi / 4))
    assert resolve_domain('sector:1.5708').dist_origin_to_complement() == 0.0


def test_catalog_listing():
    names = catalog_names()
    assert len(names) == 9
    assert all(resolve_domain(n).name == n for n in names)
    sectors = list_catalog('sector')
    assert len(sectors) == 7
    assert [e.name for e in list_catalog('koebe')] == ['koebe']
    assert list_catalog('nothing') == []


def test_membership_excludes_infinity():
    d = make_koebe()
    w = np.asarray([1.0, -1.0, -0.1, complex(math.inf, 0.0)])
    assert d.contains(w).tolist() == [True, False, True, False]


def test_sample_disk_is_deterministic():
    a, b = sample_disk(500, seed=7, max_radius=0.99), sample_disk(500, seed=7, max_radius=0.99)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.abs(a) <= 0.99)


@pytest.mark.parametrize("name", catalog_names())
def test_map_consistency(name):
    d = resolve_domain(name)
    z = sample_disk(300, seed=1, max_radius=0.99)
    assert derivative_consistency(d.map, z) < 1e-5
    assert inverse_consistency(d.map, sample_disk(300, seed=2, max_radius=0.9)) < 1e-8
    assert injectivity_violations(d.map, z) == 0


@pytest.mark.parametrize("name", catalog_names())
def test_koebe_sandwiches(name):
    d = resolve_domain(name)
    z = sample_disk(2000, seed=3)
    assert koebe_distortion_slack(d.map, z) >= -1e-12
    assert koebe_derivative_slack(d.map, z) >= -1e-12
    assert boundary_distance_slack(d, z) >= -1e-12


@pytest.mark.parametrize("theta", [math.pi / 2, math.pi])
def test_sector_derivative_bounds(theta):
    assert sector_derivative_slack(theta) >= -1e-9


def test_boundary_nets():
    with pytest.raises(BadParameter):
        make_strip().boundary_sampler(0.0)
    net = make_koebe().boundary_sampler(1e-2)
    finite = net.points[np.isfinite(net.points)]
    assert np.all(finite.imag == 0)
    assert np.all(finite.real <= -0.25)
    assert np.max(np.abs(finite)) <= R_MAX + 1.0
    assert net.delta <= 1e-2
