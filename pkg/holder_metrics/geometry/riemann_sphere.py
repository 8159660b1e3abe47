"""Chordal and spherical metrics on the Riemann sphere.

Points of the extended plane are carried either as ``ExtendedComplex`` scalars or,
in the vectorized helpers, as complex numpy arrays in which any non-finite entry
stands for the point at infinity.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from holder_metrics.exceptions import BadParameter, EmptyBoundary, NonFiniteIntegrand, OutOfDomain

if TYPE_CHECKING:
    from holder_metrics.catalog import ConformalMap

logger = logging.getLogger(__name__)

GAUSS_NODES = 4
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_NODES)
# nodes and weights mapped to [0, 1]
_GL_U = 0.5 * (_GL_X + 1.0)
_GL_WU = 0.5 * _GL_W


@dataclass(frozen=True)
class ExtendedComplex:
    """A point of C ∪ {∞}; ``value`` is None exactly for ∞"""

    value: Optional[complex] = None

    def __post_init__(self):
        if self.value is not None:
            v = complex(self.value)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise BadParameter(f"Finite point with non-finite parts: {v!r}")
            object.__setattr__(self, 'value', v)

    @classmethod
    def finite(cls, z: complex) -> 'ExtendedComplex':
        return cls(complex(z))

    @classmethod
    def infinity(cls) -> 'ExtendedComplex':
        return INFINITY

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def to_complex(self) -> complex:
        """Array encoding: ∞ becomes complex(inf, 0)"""
        return complex(math.inf, 0.0) if self.value is None else self.value

    def __repr__(self):
        return 'ExtendedComplex(∞)' if self.value is None else f"ExtendedComplex({self.value!r})"


INFINITY = ExtendedComplex(None)

PointLike = Union[ExtendedComplex, complex, float, int]


def as_point(z: PointLike) -> ExtendedComplex:
    """Coerce a number to ExtendedComplex; non-finite numbers become ∞"""
    if isinstance(z, ExtendedComplex):
        return z
    c = complex(z)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        return INFINITY
    return ExtendedComplex(c)


def as_array(points) -> np.ndarray:
    """Complex array view of points, ∞ encoded as a non-finite entry"""
    if isinstance(points, ExtendedComplex):
        return np.asarray(points.to_complex(), dtype=complex)
    if isinstance(points, (list, tuple)) and points and isinstance(points[0], ExtendedComplex):
        return np.array([p.to_complex() for p in points], dtype=complex)
    return np.asarray(points, dtype=complex)


def is_infinite(z: np.ndarray) -> np.ndarray:
    return ~np.isfinite(z)


# ----------------------------------------------------------------------------
# Chordal and spherical distance
# ----------------------------------------------------------------------------

def chordal_array(z, w) -> np.ndarray:
    """Chordal distance, vectorized; hypot keeps large moduli from overflowing"""
    z, w = np.broadcast_arrays(as_array(z), as_array(w))
    zi, wi = is_infinite(z), is_infinite(w)
    out = np.zeros(z.shape, dtype=float)

    both = ~zi & ~wi
    if np.any(both):
        zf, wf = z[both], w[both]
        out[both] = 2.0 * np.abs(zf - wf) / np.hypot(1.0, np.abs(zf)) / np.hypot(1.0, np.abs(wf))
    one = zi ^ wi
    if np.any(one):
        finite = np.where(zi, w, z)[one]
        out[one] = 2.0 / np.hypot(1.0, np.abs(finite))
    return np.clip(out, 0.0, 2.0)


def spherical_from_chordal(chi) -> np.ndarray:
    return 2.0 * np.arcsin(np.clip(np.asarray(chi, dtype=float) / 2.0, 0.0, 1.0))


def spherical_array(z, w) -> np.ndarray:
    return spherical_from_chordal(chordal_array(z, w))


def chordal_distance(z: PointLike, w: PointLike) -> float:
    """χ(z, w) on C ∪ {∞}, range [0, 2]"""
    return float(chordal_array(as_point(z).to_complex(), as_point(w).to_complex()))


def spherical_distance(z: PointLike, w: PointLike) -> float:
    """σ(z, w) = 2·arcsin(χ/2), range [0, π]"""
    return float(spherical_from_chordal(chordal_distance(z, w)))


def stereographic(z) -> np.ndarray:
    """Lift to the unit sphere in R³; chords there are chordal distances"""
    z = as_array(z)
    out = np.empty(z.shape + (3,), dtype=float)
    inf = is_infinite(z)
    zz = np.where(inf, 0.0, z)
    a = np.abs(zz)
    small = a <= 1.0
    with np.errstate(divide='ignore', invalid='ignore'):
        # for |z| > 1 work with u = 1/z
        u = np.where(small, 0.0, 1.0 / np.where(small, 1.0, zz))
    au2 = np.abs(u) ** 2
    d_small = 1.0 + a ** 2
    out[..., 0] = np.where(small, 2.0 * zz.real / d_small, 2.0 * u.real / (1.0 + au2))
    out[..., 1] = np.where(small, 2.0 * zz.imag / d_small, -2.0 * u.imag / (1.0 + au2))
    out[..., 2] = np.where(small, (a ** 2 - 1.0) / d_small, (1.0 - au2) / (1.0 + au2))
    out[inf] = (0.0, 0.0, 1.0)
    return out


def inverse_stereographic(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        z = (p[..., 0] + 1j * p[..., 1]) / (1.0 - p[..., 2])
    return np.where(p[..., 2] >= 1.0, complex(math.inf, 0.0), z)


def sphere_rotation(a: complex, c: complex) -> Callable:
    """The rotation z ↦ (a·z − c̄)/(c·z + ā), normalized so |a|²+|c|² = 1"""
    norm = math.sqrt(abs(a) ** 2 + abs(c) ** 2)
    if norm == 0.0:
        raise BadParameter("Rotation needs (a, c) != (0, 0)")
    a, c = complex(a) / norm, complex(c) / norm

    def rotate(z):
        scalar = isinstance(z, ExtendedComplex)
        arr = as_array(z)
        inf = is_infinite(arr)
        zz = np.where(inf, 0.0, arr)
        num = a * zz - c.conjugate()
        den = c * zz + a.conjugate()
        with np.errstate(divide='ignore', invalid='ignore'):
            out = np.where(den == 0, complex(math.inf, 0.0), num / np.where(den == 0, 1.0, den))
        if c != 0:
            out = np.where(inf, a / c, out)
        else:
            out = np.where(inf, complex(math.inf, 0.0), out)
        if scalar:
            return as_point(complex(out))
        return out

    return rotate


# ----------------------------------------------------------------------------
# Paths and quadrature
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float


@dataclass(frozen=True)
class PolylinePath:
    """Ordered vertices with a Gauss–Legendre subdivision count per segment"""

    vertices: Tuple[ExtendedComplex, ...]
    subdivisions: Tuple[int, ...]

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        object.__setattr__(self, 'vertices', verts)
        if len(verts) < 2:
            raise BadParameter("A path needs at least 2 vertices")
        if len(self.subdivisions) != len(verts) - 1:
            raise BadParameter("One subdivision count per segment is required")
        if any(int(n) < 1 for n in self.subdivisions):
            raise BadParameter("Subdivision counts must be >= 1")
        for i, (p, q) in enumerate(zip(verts[:-1], verts[1:])):
            if p == q:
                raise BadParameter(f"Consecutive vertices {i} and {i + 1} coincide")
        for v in verts[1:-1]:
            if v.is_infinite:
                raise BadParameter("Only endpoints may be ∞")
        if verts[0].is_infinite and verts[1].value == 0:
            raise BadParameter("A segment to ∞ must start at a nonzero point")
        if verts[-1].is_infinite and verts[-2].value == 0:
            raise BadParameter("A segment to ∞ must start at a nonzero point")

    @classmethod
    def through(cls, points: Iterable[PointLike], subdivisions: int = 16) -> 'PolylinePath':
        verts = tuple(as_point(p) for p in points)
        return cls(verts, tuple([int(subdivisions)] * (len(verts) - 1)))

    def refined(self, factor: int = 2) -> 'PolylinePath':
        return PolylinePath(self.vertices, tuple(n * factor for n in self.subdivisions))

    def points(self) -> np.ndarray:
        return as_array(list(self.vertices))

    def euclidean_length(self) -> float:
        pts = self.points()
        if np.any(is_infinite(pts)):
            return math.inf
        return float(np.sum(np.abs(np.diff(pts))))


def _segment_nodes(a: complex, b: complex, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre nodes on [a, b] and weights for |dz|"""
    j = np.arange(n)[:, None]
    u = ((j + _GL_U[None, :]) / n).ravel()
    w = np.tile(_GL_WU / n, n) * abs(b - a)
    return a + (b - a) * u, w


def _spherical_density(z: np.ndarray) -> np.ndarray:
    return 2.0 / (1.0 + np.abs(z) ** 2)


def spherical_density_of_map(values: np.ndarray, derivs: np.ndarray) -> np.ndarray:
    """f# = 2|f'|/(1+|f|²), evaluated without squaring large moduli"""
    a = np.abs(values)
    d = np.abs(derivs)
    big = a > 1.0
    safe = np.where(big, a, 1.0)
    return np.where(big, (2.0 * d / safe) / safe / (1.0 + 1.0 / safe ** 2), 2.0 * d / (1.0 + a ** 2))


def _path_integral(path: PolylinePath, conformal_map: Optional['ConformalMap'], scale: int) -> float:
    verts = path.vertices
    total = 0.0
    for (p, q), n in zip(zip(verts[:-1], verts[1:]), path.subdivisions):
        n = n * scale
        if conformal_map is None:
            if p.is_infinite or q.is_infinite:
                # segment to ∞ along the ray through the finite end; σ is invariant under 1/z
                finite = q.value if p.is_infinite else p.value
                a, b = (0j, 1.0 / finite) if p.is_infinite else (1.0 / finite, 0j)
            else:
                a, b = p.value, q.value
            nodes, weights = _segment_nodes(a, b, n)
            vals = _spherical_density(nodes)
        else:
            if p.is_infinite or q.is_infinite:
                raise NonFiniteIntegrand("Map evaluated at ∞, outside the unit disk")
            nodes, weights = _segment_nodes(p.value, q.value, n)
            if np.any(np.abs(nodes) >= 1.0):
                raise NonFiniteIntegrand("Map evaluated outside the unit disk")
            vals = spherical_density_of_map(conformal_map.eval(nodes), conformal_map.deriv(nodes))
        if not np.all(np.isfinite(vals)):
            raise NonFiniteIntegrand("Spherical density is not finite on the path")
        total += float(np.dot(vals, weights))
    return total


def spherical_path_length(path: PolylinePath, conformal_map: Optional['ConformalMap'] = None) -> QuadratureResult:
    """l_σ of the path, or of its image under the map, with a refinement error estimate"""
    coarse = _path_integral(path, conformal_map, 1)
    fine = _path_integral(path, conformal_map, 2)
    return QuadratureResult(fine, abs(fine - coarse))


def spherical_derivative(conformal_map: 'ConformalMap', z: PointLike) -> float:
    """f#(z) = 2|f'(z)|/(1+|f(z)|²) at a point of the unit disk"""
    p = as_point(z)
    if p.is_infinite or abs(p.value) >= 1.0:
        raise OutOfDomain(f"Spherical derivative requested at {p!r}, outside the unit disk")
    arr = np.asarray([p.value])
    return float(spherical_density_of_map(conformal_map.eval(arr), conformal_map.deriv(arr))[0])


def _rotation_to_north(normal: np.ndarray) -> np.ndarray:
    """Rotation matrix taking the unit vector ``normal`` to (0, 0, 1)"""
    e3 = np.array([0.0, 0.0, 1.0])
    v = np.cross(normal, e3)
    s = np.linalg.norm(v)
    cth = float(np.dot(normal, e3))
    if s < 1e-15:
        return np.eye(3) if cth > 0 else np.diag([1.0, -1.0, -1.0])
    k = v / s
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * kx + (1 - cth) * kx @ kx


def great_circle_path(z: PointLike, w: PointLike, n_vertices: int = 2048) -> Optional[PolylinePath]:
    """Polyline along the shorter great-circle arc from z to w, in rotated coordinates.

    The sphere is rotated so the great circle becomes the equator; the returned
    vertices lie on the unit circle and never come near ∞. Rotations preserve σ,
    so the path's spherical length is that of the arc. None when z = w.
    """
    p, q = stereographic(as_point(z).to_complex()), stereographic(as_point(w).to_complex())
    if np.allclose(p, q, rtol=0.0, atol=1e-15):
        return None
    normal = np.cross(p, q)
    if np.linalg.norm(normal) < 1e-12:
        # antipodal pair: every great circle through p works
        trial = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        normal = np.cross(p, trial)
    normal = normal / np.linalg.norm(normal)
    rot = _rotation_to_north(normal)
    pr, qr = rot @ p, rot @ q
    phi_p = math.atan2(pr[1], pr[0])
    delta = math.atan2(qr[1], qr[0]) - phi_p
    delta = (delta + math.pi) % (2.0 * math.pi) - math.pi
    if abs(abs(delta) - math.pi) < 1e-12:
        delta = math.pi
    phis = phi_p + delta * np.arange(n_vertices + 1) / n_vertices
    return PolylinePath.through(np.exp(1j * phis), subdivisions=1)


def spherical_distance_by_paths(z: PointLike, w: PointLike, n_vertices: int = 2048) -> QuadratureResult:
    """σ(z, w) as the spherical length of a refined great-circle polyline"""
    path = great_circle_path(z, w, n_vertices)
    if path is None:
        return QuadratureResult(0.0, 0.0)
    return spherical_path_length(path)


# ----------------------------------------------------------------------------
# Boundary sample nets
# ----------------------------------------------------------------------------

def segment_chordal_distance(w, starts, ends) -> np.ndarray:
    """Smallest chordal distance from w to the Euclidean segments [starts, ends].

    χ² along p = a + t·d is a ratio of two quadratics in t, so its stationary
    points are the roots of a quadratic; the minimum is taken over those roots,
    the end points and the Euclidean foot.
    """
    w, a, b = np.broadcast_arrays(as_array(w), as_array(starts), as_array(ends))
    d = b - a
    rel = w - a
    A = np.abs(d) ** 2
    B = -2.0 * (rel * np.conj(d)).real
    C = np.abs(rel) ** 2
    E = 2.0 * (a * np.conj(d)).real
    F = 1.0 + np.abs(a) ** 2
    qa, qb, qc = A * (E - B), 2.0 * A * (F - C), B * F - C * E
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        root = np.sqrt(np.maximum(qb * qb - 4.0 * qa * qc, 0.0))
        quadratic = np.abs(qa) > 1e-300
        r1 = np.where(quadratic, (-qb + root) / (2.0 * qa), -qc / qb)
        r2 = np.where(quadratic, (-qb - root) / (2.0 * qa), -qc / qb)
        foot = -0.5 * B / A
    t = np.stack([np.zeros(w.shape), np.ones(w.shape), r1, r2, foot], axis=-1)
    t = np.clip(np.nan_to_num(t, nan=0.0, posinf=1.0, neginf=0.0), 0.0, 1.0)
    chi = chordal_array(w[..., None], a[..., None] + t * d[..., None])
    return chi.min(axis=-1)


@dataclass(frozen=True)
class BoundaryNet:
    """Ordered boundary samples, one array per boundary curve.

    ``delta`` is the largest chordal gap between consecutive samples, so every
    boundary point lies within ``delta`` of the net.
    """

    components: Tuple[np.ndarray, ...]
    delta: float
    straight: bool = False
    _points: np.ndarray = field(init=False, repr=False, compare=False)
    _next_ok: np.ndarray = field(init=False, repr=False, compare=False)
    _sphere_tree: Optional[cKDTree] = field(init=False, repr=False, compare=False, default=None)
    _plane_tree: Optional[cKDTree] = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=complex).ravel() for c in self.components)
        object.__setattr__(self, 'components', comps)
        points = np.concatenate(comps) if comps else np.zeros(0, dtype=complex)
        # next_ok[i]: segment i -> i+1 lies on one curve with two finite ends
        next_ok = np.zeros(points.shape, dtype=bool)
        start = 0
        for c in comps:
            if len(c) > 1:
                fin = np.isfinite(c)
                next_ok[start:start + len(c) - 1] = fin[:-1] & fin[1:]
            start += len(c)
        object.__setattr__(self, '_points', points)
        object.__setattr__(self, '_next_ok', next_ok)

    @classmethod
    def from_components(cls, components: Sequence[np.ndarray], straight: bool = False) -> 'BoundaryNet':
        gaps = [chordal_array(c[:-1], c[1:]) for c in components if len(c) > 1]
        delta = float(max((g.max() for g in gaps if g.size), default=0.0))
        return cls(tuple(components), delta, straight)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def uncertainty(self) -> float:
        """Additive bound (π/2)·(π·δ/2) on the dist_σ error carried by the sampling"""
        return 0.25 * math.pi ** 2 * self.delta

    def euclidean_gap(self) -> float:
        gaps = [np.abs(np.diff(c))[np.isfinite(np.diff(c))] for c in self.components if len(c) > 1]
        return float(max((g.max() for g in gaps if g.size), default=0.0))

    def _require_points(self):
        if self._points.size == 0:
            raise EmptyBoundary("Boundary sample set is empty")

    def _neighbour_segments(self, idx: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Start points, end points and validity of the two segments around idx"""
        n = self._points.size
        prev_idx = np.clip(idx - 1, 0, n - 1)
        next_idx = np.clip(idx + 1, 0, n - 1)
        prev_ok = (idx > 0) & self._next_ok[prev_idx]
        next_ok = self._next_ok[idx]
        starts = np.stack([self._points[prev_idx], self._points[idx]], axis=-1)
        ends = np.stack([self._points[idx], self._points[next_idx]], axis=-1)
        ok = np.stack([prev_ok, next_ok], axis=-1)
        return starts, ends, ok

    def chordal_distance(self, w) -> np.ndarray:
        """Chordal distance to the boundary, refined by projecting onto the neighbouring segments"""
        self._require_points()
        w = as_array(w)
        if self._sphere_tree is None:
            object.__setattr__(self, '_sphere_tree', cKDTree(stereographic(self._points)))
        flat = w.ravel()
        best, idx = self._sphere_tree.query(stereographic(flat))
        best = np.asarray(best, dtype=float)
        starts, ends, ok = self._neighbour_segments(np.asarray(idx))
        ok = ok & np.isfinite(flat)[:, None]
        starts = np.where(ok, starts, 0.0)
        ends = np.where(ok, ends, 1.0)
        chi = np.where(ok, segment_chordal_distance(np.where(ok, flat[:, None], 0.0), starts, ends), np.inf)
        best = np.minimum(best, chi.min(axis=1))
        return best.reshape(w.shape)

    def spherical_distance(self, w) -> np.ndarray:
        return spherical_from_chordal(self.chordal_distance(w))

    def euclidean_distance(self, y) -> np.ndarray:
        """Euclidean distance to the finite samples, projected onto neighbouring segments"""
        self._require_points()
        y = np.asarray(y, dtype=complex)
        finite = np.isfinite(self._points)
        if self._plane_tree is None:
            pts = np.where(finite, self._points, 1e300)
            object.__setattr__(self, '_plane_tree', cKDTree(np.column_stack([pts.real, pts.imag])))
        flat = y.ravel()
        best, idx = self._plane_tree.query(np.column_stack([flat.real, flat.imag]))
        best = np.asarray(best, dtype=float)
        starts, ends, ok = self._neighbour_segments(np.asarray(idx))
        seg = np.where(ok, ends - starts, 1.0)
        rel = flat[:, None] - np.where(ok, starts, 0.0)
        t = np.clip((rel * np.conj(seg)).real / np.abs(seg) ** 2, 0.0, 1.0)
        d = np.abs(rel - t * seg)
        d = np.where(ok, d, np.inf)
        best = np.minimum(best, d.min(axis=1))
        return best.reshape(y.shape)


@dataclass(frozen=True)
class SphereDistance:
    value: float
    uncertainty: float


def dist_sigma_to_boundary(w: PointLike, boundary: BoundaryNet) -> SphereDistance:
    """dist_σ(w, ∂D) from a boundary net, with the net's additive uncertainty"""
    value = float(boundary.spherical_distance(as_point(w).to_complex()))
    return SphereDistance(value, boundary.uncertainty)


def dist_sigma_array(w, boundary: BoundaryNet) -> np.ndarray:
    return boundary.spherical_distance(w)
