"""Catalog of explicit conformal maps from the unit disk onto unbounded domains.

Every map is written as a function of (z, 1−z, 1+z) so it can be evaluated along
a radius at z = (1−s)·e with s far below machine epsilon.
"""
import logging
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from holder_metrics.exceptions import BadParameter, NoInverse, UnknownDomain
from holder_metrics.geometry.riemann_sphere import BoundaryNet, chordal_array, spherical_density_of_map

logger = logging.getLogger(__name__)

TripleFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

R_MIN = 1e-6
R_MAX = 1e6


@dataclass(frozen=True)
class ConformalMap:
    """Analytic map of 𝔻 given through z, 1−z and 1+z"""

    name: str
    func: TripleFn
    dfunc: TripleFn
    inv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: Dict[str, float] = field(default_factory=dict)

    def eval(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.func(z, 1.0 - z, 1.0 + z)

    def deriv(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.dfunc(z, 1.0 - z, 1.0 + z)

    def spherical_derivative(self, z) -> np.ndarray:
        return spherical_density_of_map(self.eval(z), self.deriv(z))

    def eval_polar(self, angle, s) -> Tuple[np.ndarray, np.ndarray]:
        """f and f′ at z = (1−s)·e^{i·angle}, with 1∓z formed without cancellation.

        Half-angle sines and cosines below 1e-15 are taken as exact zeros so the
        rays at angles 0 and π meet the circle exactly at 1 and −1.
        """
        angle, s = np.broadcast_arrays(np.asarray(angle, dtype=float), np.asarray(s, dtype=float))
        c, sn = np.cos(0.5 * angle), np.sin(0.5 * angle)
        c = np.where(np.abs(c) < 1e-15, 0.0, c)
        sn = np.where(np.abs(sn) < 1e-15, 0.0, sn)
        half = c + 1j * sn
        e = half * half
        z = (1.0 - s) * e
        omz = -2j * sn * half + s * e
        opz = 2.0 * c * half - s * e
        return self.func(z, omz, opz), self.dfunc(z, omz, opz)

    @property
    def has_inverse(self) -> bool:
        return self.inv is not None

    def inverse(self, w) -> np.ndarray:
        if self.inv is None:
            raise NoInverse(f"Map {self.name} has no registered inverse")
        return self.inv(np.asarray(w, dtype=complex))

    @property
    def base_point(self) -> complex:
        return complex(self.eval(np.zeros(1))[0])


@dataclass(frozen=True)
class DomainSpec:
    """An unbounded simply connected domain with its Riemann map and boundary access"""

    name: str
    map: ConformalMap
    contains_fn: Callable[[np.ndarray], np.ndarray]
    net_builder: Callable[[float], BoundaryNet]
    euclid_dist_to_boundary: Optional[Callable[[np.ndarray], np.ndarray]]
    known_alpha: Optional[float]
    known_hardy: float
    provenance: str

    def boundary_sampler(self, delta: float) -> BoundaryNet:
        if not delta > 0:
            raise BadParameter("Chordal mesh must be positive")
        return self.net_builder(float(delta))

    def contains(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return np.isfinite(w) & np.asarray(self.contains_fn(np.where(np.isfinite(w), w, 0.0)), dtype=bool)

    @property
    def base_point(self) -> complex:
        return self.map.base_point

    @property
    def contains_origin(self) -> bool:
        return bool(self.contains(np.zeros(1))[0])

    @property
    def hardy_is_finite(self) -> bool:
        return math.isfinite(self.known_hardy)

    def dist_origin_to_complement(self) -> float:
        """dist(0, ℂ∖D): zero when the origin is outside D"""
        if not self.contains_origin:
            return 0.0
        return float(self.euclid_dist_to_boundary(np.zeros(1))[0])


# ----------------------------------------------------------------------------
# Boundary nets
# ----------------------------------------------------------------------------

def _midpoints(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Parameter midpoints: geometric for same-sign values, doubling toward ±∞"""
    out = 0.5 * (a + b)
    same = (a * b > 0) & np.isfinite(a) & np.isfinite(b)
    out = np.where(same, np.sign(a) * np.sqrt(np.abs(a) * np.abs(b)), out)
    a_inf, b_inf = ~np.isfinite(a), ~np.isfinite(b)
    out = np.where(b_inf, np.where(a == 0, np.sign(b), 2.0 * a), out)
    out = np.where(a_inf, np.where(b == 0, np.sign(a), 2.0 * b), out)
    return out


def _line_component(origin: complex, direction: complex, params: np.ndarray, delta: float) -> np.ndarray:
    """Points origin + t·direction for sorted t, refined until chordal gaps are <= delta"""
    def to_points(t):
        with np.errstate(invalid='ignore'):
            return np.where(np.isfinite(t), origin + np.where(np.isfinite(t), t, 0.0) * direction, complex(math.inf, 0.0))

    t = np.asarray(params, dtype=float)
    for _ in range(64):
        pts = to_points(t)
        gaps = chordal_array(pts[:-1], pts[1:])
        wide = gaps > delta
        if not np.any(wide):
            return pts
        mids = _midpoints(t[:-1][wide], t[1:][wide])
        t = np.sort(np.concatenate([t, mids]))
    raise BadParameter(f"Boundary net did not reach chordal mesh {delta}")


def _geometric_radii(delta: float) -> np.ndarray:
    n = int(math.ceil(math.log(R_MAX / R_MIN) / math.log1p(delta)))
    return R_MIN * np.exp(np.linspace(0.0, math.log(R_MAX / R_MIN), n + 1))


def _ray_params(delta: float) -> np.ndarray:
    return np.concatenate([[0.0], _geometric_radii(delta), [math.inf]])


def _line_params(delta: float) -> np.ndarray:
    r = _geometric_radii(delta)
    return np.concatenate([[-math.inf], -r[::-1], [0.0], r, [math.inf]])


@lru_cache(maxsize=32)
def _sector_net(theta: float, offset: complex, delta: float) -> BoundaryNet:
    params = _ray_params(delta)
    angles = [math.pi] if theta == 2.0 * math.pi else [theta / 2.0, -theta / 2.0]
    comps = [_line_component(offset, np.exp(1j * a), params, delta) for a in angles]
    return BoundaryNet.from_components(comps, straight=True)


@lru_cache(maxsize=32)
def _koebe_net(delta: float) -> BoundaryNet:
    return BoundaryNet.from_components([_line_component(-0.25, -1.0, _ray_params(delta), delta)], straight=True)


@lru_cache(maxsize=32)
def _strip_net(delta: float) -> BoundaryNet:
    params = _line_params(delta)
    comps = [_line_component(sign * 0.5j * math.pi, 1.0, params, delta) for sign in (1, -1)]
    return BoundaryNet.from_components(comps, straight=True)


# ----------------------------------------------------------------------------
# Catalog entries
# ----------------------------------------------------------------------------

def _sector_dist(theta: float, offset: complex) -> Callable[[np.ndarray], np.ndarray]:
    def dist(w):
        v = np.asarray(w, dtype=complex) - offset
        a = np.angle(v)
        radius = np.abs(v)
        out = np.full(v.shape, np.inf)
        for beta in (theta / 2.0, -theta / 2.0):
            d = np.abs(a - beta) % (2.0 * math.pi)
            d = np.minimum(d, 2.0 * math.pi - d)
            out = np.minimum(out, np.where(d >= math.pi / 2.0, radius, radius * np.sin(d)))
        return out
    return dist


def make_translated_sector(theta: float, offset: complex = 0j) -> DomainSpec:
    """S_θ + offset, the image of ((1+z)/(1−z))^{θ/π} + offset"""
    theta = float(theta)
    if not (0.0 < theta <= 2.0 * math.pi):
        raise BadParameter(f"Sector opening must lie in (0, 2π], got {theta}")
    offset = complex(offset)
    kappa = theta / math.pi

    def func(z, omz, opz):
        return offset + np.exp(kappa * np.log(opz / omz))

    def dfunc(z, omz, opz):
        return kappa * np.exp(kappa * np.log(opz / omz)) * 2.0 / (opz * omz)

    def inv(w):
        u = np.exp(np.log(w - offset) / kappa)
        return (u - 1.0) / (u + 1.0)

    def contains(w):
        v = w - offset
        return (v != 0) & (np.abs(np.angle(v)) < theta / 2.0)

    name = f"sector:{theta:.4f}" if offset == 0 else f"sector:{theta:.4f}:offset={offset.real:g},{offset.imag:g}"
    conformal_map = ConformalMap(name, func, dfunc, inv, {'theta': theta, 'offset_re': offset.real, 'offset_im': offset.imag})
    return DomainSpec(
        name=name,
        map=conformal_map,
        contains_fn=contains,
        net_builder=lambda delta: _sector_net(theta, offset, delta),
        euclid_dist_to_boundary=_sector_dist(theta, offset),
        known_alpha=min(kappa, 1.0),
        known_hardy=math.pi / theta,
        provenance="sectors are θ/π-Hölder (1-Hölder for θ ≥ π) with Hardy number π/θ; both invariant under translation",
    )


def make_sector(theta: float) -> DomainSpec:
    return make_translated_sector(theta, 0j)


def make_koebe() -> DomainSpec:
    """z/(1−z)² onto ℂ∖(−∞, −1/4]"""

    def func(z, omz, opz):
        return z / omz ** 2

    def dfunc(z, omz, opz):
        return opz / omz ** 3

    def inv(w):
        s = np.sqrt(1.0 + 4.0 * w)
        plus, minus = (2.0 * w + 1.0) + s, (2.0 * w + 1.0) - s
        den = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
        return 2.0 * w / den

    def contains(w):
        return ~((w.imag == 0) & (w.real <= -0.25))

    def dist(w):
        w = np.asarray(w, dtype=complex)
        return np.where(w.real <= -0.25, np.abs(w.imag), np.abs(w + 0.25))

    return DomainSpec(
        name='koebe',
        map=ConformalMap('koebe', func, dfunc, inv),
        contains_fn=contains,
        net_builder=_koebe_net,
        euclid_dist_to_boundary=dist,
        known_alpha=1.0,
        known_hardy=0.5,
        provenance="affine image of the slit plane S_2π: 1-Hölder, Hardy number 1/2",
    )


def make_strip() -> DomainSpec:
    """log((1+z)/(1−z)) onto {|Im w| < π/2}"""

    def func(z, omz, opz):
        return np.log(opz / omz)

    def dfunc(z, omz, opz):
        return 2.0 / (opz * omz)

    def inv(w):
        return np.tanh(w / 2.0)

    return DomainSpec(
        name='strip',
        map=ConformalMap('strip', func, dfunc, inv),
        contains_fn=lambda w: np.abs(w.imag) < math.pi / 2.0,
        net_builder=_strip_net,
        euclid_dist_to_boundary=lambda w: math.pi / 2.0 - np.abs(np.asarray(w, dtype=complex).imag),
        known_alpha=None,
        known_hardy=math.inf,
        provenance="no α: spherical distance to ∞ decays logarithmically; Hardy number infinite",
    )


# ----------------------------------------------------------------------------
# Names
# ----------------------------------------------------------------------------

_SECTOR_RE = re.compile(r'^sector:(?P<theta>[^:]+)(?::offset=(?P<re>[^,]+),(?P<im>.+))?$')

# printed openings such as 1.5708 resolve to the exact multiple of π/4
_SNAP_TOL = 1e-4


def _snap_theta(theta: float) -> float:
    k = round(theta / (math.pi / 4.0))
    if k > 0 and abs(theta - k * math.pi / 4.0) < _SNAP_TOL:
        return k * math.pi / 4.0
    return theta


def resolve_domain(name: str) -> DomainSpec:
    """Resolve a catalog name such as "sector:1.5708" or "strip" """
    key = name.strip().lower()
    if key == 'koebe':
        return make_koebe()
    if key == 'strip':
        return make_strip()
    match = _SECTOR_RE.match(key)
    if not match:
        raise UnknownDomain(f"Unknown domain: {name}")
    try:
        theta = _snap_theta(float(match.group('theta')))
        offset = 0j
        if match.group('re') is not None:
            offset = complex(float(match.group('re')), float(match.group('im')))
    except ValueError:
        raise UnknownDomain(f"Unknown domain: {name}")
    if not (0.0 < theta <= 2.0 * math.pi):
        raise UnknownDomain(f"Unknown domain: {name} (opening must lie in (0, 2π])")
    return make_translated_sector(theta, offset)


SECTOR_OPENINGS = (math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi, 3 * math.pi / 2, 2 * math.pi)


def catalog_names() -> List[str]:
    names = [f"sector:{t:.4f}" for t in SECTOR_OPENINGS]
    names += ['koebe', 'strip', 'sector:1.5708:offset=-5,0']
    return names


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    known_alpha: Optional[float]
    known_hardy: float
    provenance: str


def list_catalog(name_filter: Optional[str] = None) -> List[CatalogEntry]:
    """Catalog rows, optionally restricted to names containing the filter"""
    entries = []
    for name in catalog_names():
        if name_filter and name_filter not in name:
            continue
        d = resolve_domain(name)
        entries.append(CatalogEntry(name, d.known_alpha, d.known_hardy, d.provenance))
    return entries


# ----------------------------------------------------------------------------
# Invariant suite
# ----------------------------------------------------------------------------

def sample_disk(n: int, seed: int = 0, max_radius: float = 1.0 - 1e-6) -> np.ndarray:
    """Deterministic points of 𝔻, uniform in angle and in log(1−|z|)"""
    rng = np.random.default_rng(seed)
    depth = rng.uniform(0.0, -math.log(1.0 - max_radius), n)
    radius = 1.0 - np.exp(-depth)
    return radius * np.exp(2j * math.pi * rng.uniform(size=n))


def derivative_consistency(conformal_map: ConformalMap, points: np.ndarray) -> float:
    """Largest relative gap between deriv and a central difference"""
    h = 1e-6 * (1.0 - np.abs(points))
    fd = (conformal_map.eval(points + h) - conformal_map.eval(points - h)) / (2.0 * h)
    d = conformal_map.deriv(points)
    return float(np.max(np.abs(fd - d) / np.abs(d)))


def inverse_consistency(conformal_map: ConformalMap, points: np.ndarray) -> float:
    return float(np.max(np.abs(conformal_map.inverse(conformal_map.eval(points)) - points)))


def injectivity_violations(conformal_map: ConformalMap, points: np.ndarray, tol: float = 1e-9) -> int:
    """Pairs with images within tol but preimages farther apart than tol"""
    images = conformal_map.eval(points)
    tree = cKDTree(np.column_stack([images.real, images.imag]))
    bad = 0
    for i, j in tree.query_pairs(tol):
        if abs(points[i] - points[j]) > tol:
            bad += 1
    return bad


def koebe_distortion_slack(conformal_map: ConformalMap, points: np.ndarray) -> float:
    """Smallest relative slack in the two-sided growth bound for |f(z) − f(0)|"""
    r = np.abs(points)
    d0 = abs(complex(conformal_map.deriv(np.zeros(1))[0]))
    growth = np.abs(conformal_map.eval(points) - conformal_map.base_point)
    lower = d0 * r / (1.0 + r) ** 2
    upper = d0 * r / (1.0 - r) ** 2
    return float(min(np.min((growth - lower) / upper), np.min((upper - growth) / upper)))


def koebe_derivative_slack(conformal_map: ConformalMap, points: np.ndarray) -> float:
    """Smallest relative slack in |f′(0)|(1−r)/(1+r)³ <= |f′(z)| <= |f′(0)|(1+r)/(1−r)³"""
    r = np.abs(points)
    d0 = abs(complex(conformal_map.deriv(np.zeros(1))[0]))
    d = np.abs(conformal_map.deriv(points))
    lower = d0 * (1.0 - r) / (1.0 + r) ** 3
    upper = d0 * (1.0 + r) / (1.0 - r) ** 3
    return float(min(np.min((d - lower) / upper), np.min((upper - d) / upper)))


def boundary_distance_slack(domain: DomainSpec, points: np.ndarray) -> float:
    """Smallest relative slack in (1/4)(1−r)|f′| <= dist(f(z), ∂D) <= 2(1−r)|f′|"""
    if domain.euclid_dist_to_boundary is None:
        return math.inf
    r = np.abs(points)
    scale = (1.0 - r) * np.abs(domain.map.deriv(points))
    dist = domain.euclid_dist_to_boundary(domain.map.eval(points))
    return float(min(np.min((dist - 0.25 * scale) / scale), np.min((2.0 * scale - dist) / scale)))


def sector_derivative_slack(theta: float, depth: int = 10) -> float:
    """Slack in the sector bounds on g# over the radial grid 1 − 2^{−k}, k <= depth"""
    domain = make_sector(theta)
    kappa = theta / math.pi
    k = np.arange(1, depth + 1)
    s = 2.0 ** -k
    worst = math.inf
    for j in range(8):
        f, df = domain.map.eval_polar(2.0 * math.pi * j / 8, s)
        sharp = spherical_density_of_map(f, df)
        if theta < math.pi:
            bound = 4.0 * kappa
            vals = sharp * s ** (1.0 - kappa)
        else:
            bound = 4.0 ** kappa * kappa
            vals = sharp
        worst = min(worst, float(np.min(bound - vals) / bound))
    return worst
