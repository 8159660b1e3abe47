import math

import numpy as np
import pytest

from holder_metrics.catalog import ConformalMap, make_strip
from holder_metrics.exceptions import BadParameter, NoInverse, NotInRegion, OutOfDomain
from holder_metrics.geometry.hyperbolic import (
    GridRegion,
    circle_arc_path,
    disk_automorphism,
    disk_region,
    geodesic_tail_length,
    hyperbolic_density_pushforward,
    hyperbolic_distance_disk,
    hyperbolic_distance_disk_array,
    hyperbolic_distance_domain,
    mobius_geodesic,
    quasihyperbolic_distance,
    quasihyperbolic_distances_from,
    radial_geodesic,
)


def test_disk_distance_closed_form():
    assert hyperbolic_distance_disk(0, 0.5) == pytest.approx(math.log(3.0))
    assert hyperbolic_distance_disk(0.5, 0) == pytest.approx(math.log(3.0))
    assert hyperbolic_distance_disk(0.3j, 0.3j) == 0.0


def test_disk_distance_outside_disk():
    with pytest.raises(OutOfDomain):
        hyperbolic_distance_disk(0, 1.0)
    with pytest.raises(OutOfDomain):
        hyperbolic_distance_disk_array(np.asarray([0.0]), np.asarray([2.0]))


def test_automorphisms_are_isometries():
    phi = disk_automorphism(0.4 - 0.3j)
    assert complex(phi(np.asarray([0j]))[0]) == pytest.approx(0.4 - 0.3j)
    rng = np.random.default_rng(1)
    u = 0.9 * np.sqrt(rng.uniform(size=50)) * np.exp(2j * math.pi * rng.uniform(size=50))
    v = 0.9 * np.sqrt(rng.uniform(size=50)) * np.exp(2j * math.pi * rng.uniform(size=50))
    np.testing.assert_allclose(hyperbolic_distance_disk_array(phi(u), phi(v)),
                               hyperbolic_distance_disk_array(u, v), rtol=1e-9)


def test_strip_distance_along_the_axis():
    # unit density on the real axis of {|Im w| < π/2}
    strip = make_strip().map
    assert hyperbolic_distance_domain(strip, 0, 1) == pytest.approx(1.0, rel=1e-12)
    assert hyperbolic_density_pushforward(strip, 0) == pytest.approx(1.0)


def test_distance_without_inverse():
    bare = ConformalMap('bare', lambda z, omz, opz: z, lambda z, omz, opz: np.ones_like(z))
    with pytest.raises(NoInverse):
        hyperbolic_distance_domain(bare, 0.1, 0.2)


def test_radial_geodesic_parameters():
    path = radial_geodesic(0.0, 0.0, 0.99)
    pts = path.points()
    assert pts[0] == 0 and pts[-1] == pytest.approx(0.99)
    with pytest.raises(BadParameter):
        radial_geodesic(0.0, 0.5, 0.5)


def test_geodesic_tail_through_origin():
    z, length = geodesic_tail_length(0j, 0.0, 0.5)
    assert z == pytest.approx(0.5)
    assert length == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(BadParameter):
        geodesic_tail_length(0j, 0.0, 1.0)


def test_quasihyperbolic_disk_radius():
    result = quasihyperbolic_distance(disk_region(), 0.0, 0.5, 5)
    assert result.value == pytest.approx(math.log(2.0), rel=0.02)
    assert result.error < 0.05
    assert quasihyperbolic_distance(disk_region(), 0.25j, 0.25j, 3).value == 0.0


def test_quasihyperbolic_single_source():
    values, errors = quasihyperbolic_distances_from(disk_region(), 0.0, [0.5, 0.9], 5)
    np.testing.assert_allclose(values, [math.log(2.0), math.log(10.0)], rtol=0.02)
    assert np.all(np.isfinite(errors))


def test_quasihyperbolic_rejects_non_members():
    with pytest.raises(NotInRegion):
        quasihyperbolic_distance(disk_region(), 0.0, 1.5, 3)
    with pytest.raises(BadParameter):
        quasihyperbolic_distance(disk_region(), 0.0, 0.5, -1)


def test_grid_region_cell_must_fit_box():
    with pytest.raises(BadParameter):
        GridRegion((-1, 1, -1, 1), 0.5, lambda w: np.ones(w.shape, bool), lambda w: np.ones(w.shape))


def test_semicircle_reaches_the_upper_chord_bound():
    arc = circle_arc_path(1 + 1j, 2.0, 0.0, math.pi)
    pts = arc.points()
    assert abs(pts[-1] - pts[0]) == pytest.approx(4.0)
    assert arc.euclidean_length() == pytest.approx(2.0 * math.pi, rel=1e-5)
    assert arc.euclidean_length() <= 0.5 * math.pi * 4.0
    with pytest.raises(BadParameter):
        circle_arc_path(0, 0.0, 0.0, 1.0)


def test_mobius_geodesic_runs_through_a_between_two_boundary_points():
    a = 0.6 + 0.2j
    pts = mobius_geodesic(a, 1.0).points()
    assert np.min(np.abs(pts - a)) < 1e-15
    assert np.all(np.abs(pts) < 1.0)
    assert 1.0 - abs(pts[0]) < 1e-9 and 1.0 - abs(pts[-1]) < 1e-9


@pytest.mark.parametrize("a, phi", [(0.6 + 0.2j, 1.0), (-0.85j, 0.3), (0.3 - 0.4j, 2.5)])
def test_geodesic_tail_between_boundary_distance_bounds(a, phi):
    z, tail = geodesic_tail_length(a, phi, 0.0)
    assert z == pytest.approx(a, abs=1e-15)
    d = 1.0 - abs(z)
    assert d <= tail <= 0.5 * math.pi * d
    pts = mobius_geodesic(a, phi).points()
    split = int(np.argmin(np.abs(pts - z)))
    pieces = np.abs(np.diff(pts))
    by_polyline = min(pieces[:split].sum(), pieces[split:].sum())
    assert by_polyline == pytest.approx(tail, rel=2e-3)
