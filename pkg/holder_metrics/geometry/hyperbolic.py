"""Hyperbolic and quasi-hyperbolic geometry.

Disk distances and densities are closed forms; the quasi-hyperbolic distance of a
planar region is a shortest path on an 8-connected grid graph, recomputed at two
consecutive refinements to report an error estimate.
"""
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from holder_metrics.exceptions import (
    BadParameter,
    DisconnectedEndpoints,
    NoInverse,
    NotInRegion,
    OutOfDomain,
    PreimageNotInDisk,
    ZeroDerivative,
)
from holder_metrics.geometry.riemann_sphere import PointLike, PolylinePath, as_point

if TYPE_CHECKING:
    from holder_metrics.catalog import ConformalMap

logger = logging.getLogger(__name__)

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class HyperbolicPoint:
    z: complex

    def __post_init__(self):
        p = as_point(self.z)
        if p.is_infinite or abs(p.value) >= 1.0:
            raise OutOfDomain(f"{self.z!r} is not inside the unit disk")
        object.__setattr__(self, 'z', p.value)


def _disk_point(z) -> complex:
    if isinstance(z, HyperbolicPoint):
        return z.z
    return HyperbolicPoint(z).z


def hyperbolic_distance_disk(z1, z2) -> float:
    """h_𝔻(z1, z2) = log((1+p)/(1−p)) with p the pseudo-hyperbolic distance"""
    a, b = _disk_point(z1), _disk_point(z2)
    p = abs(a - b) / abs(1.0 - a.conjugate() * b)
    return 2.0 * math.atanh(min(p, 1.0 - 1e-17))


def hyperbolic_distance_disk_array(z1, z2) -> np.ndarray:
    a, b = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    if np.any(np.abs(a) >= 1.0) or np.any(np.abs(b) >= 1.0):
        raise OutOfDomain("Hyperbolic distance requested outside the unit disk")
    p = np.abs(a - b) / np.abs(1.0 - np.conj(a) * b)
    return 2.0 * np.arctanh(np.minimum(p, 1.0 - 1e-17))


def hyperbolic_distance_domain(conformal_map: 'ConformalMap', w1: PointLike, w2: PointLike) -> float:
    """h_D(w1, w2) through the registered inverse of the map"""
    if not conformal_map.has_inverse:
        raise NoInverse(f"Map {conformal_map.name} has no registered inverse")
    pre = []
    for w in (w1, w2):
        p = as_point(w)
        z = conformal_map.inverse(np.asarray([p.to_complex()]))[0]
        if not np.isfinite(z) or abs(z) >= 1.0:
            raise PreimageNotInDisk(f"Preimage of {p!r} under {conformal_map.name} is not in the disk")
        pre.append(complex(z))
    return hyperbolic_distance_disk(pre[0], pre[1])


def hyperbolic_density_pushforward(conformal_map: 'ConformalMap', z) -> float:
    """λ of the image domain at map(z), from λ_𝔻(z) = 2/(1−|z|²)"""
    zz = _disk_point(z)
    d = abs(complex(conformal_map.deriv(np.asarray([zz]))[0]))
    if d == 0.0:
        raise ZeroDerivative(f"Map {conformal_map.name} has zero derivative at {zz!r}")
    return 2.0 / (1.0 - abs(zz) ** 2) / d


def disk_automorphism(a: complex) -> Callable[[np.ndarray], np.ndarray]:
    """The automorphism u ↦ (u + a)/(1 + ā·u), which sends 0 to a"""
    a = _disk_point(a)

    def phi(u):
        u = np.asarray(u, dtype=complex)
        return (u + a) / (1.0 + np.conj(a) * u)

    phi.derivative = lambda u: (1.0 - abs(a) ** 2) / (1.0 + np.conj(a) * np.asarray(u, dtype=complex)) ** 2
    return phi


def radial_geodesic(theta: float, t0: float, t1: float, n_vertices: int = 64) -> PolylinePath:
    """Radius from t0·e^{iθ} to t1·e^{iθ}, vertices accumulating toward the circle"""
    if not (0.0 <= t0 < t1 < 1.0):
        raise BadParameter(f"Need 0 <= t0 < t1 < 1, got t0={t0}, t1={t1}")
    ratio = (1.0 - t1) / (1.0 - t0)
    t = 1.0 - (1.0 - t0) * ratio ** (np.arange(n_vertices + 1) / n_vertices)
    t[0], t[-1] = t0, t1
    t = np.unique(t)
    return PolylinePath.through(t * np.exp(1j * theta), subdivisions=4)


def circle_arc_path(center: complex, radius: float, phi0: float, phi1: float, n_vertices: int = 512) -> PolylinePath:
    """Arc of the circle |z − center| = radius between the angles phi0 and phi1"""
    if radius <= 0:
        raise BadParameter("Arc radius must be positive")
    phis = np.linspace(phi0, phi1, n_vertices + 1)
    return PolylinePath.through(center + radius * np.exp(1j * phis), subdivisions=1)


def mobius_geodesic(a: complex, phi: float, n_vertices: int = 256) -> PolylinePath:
    """The geodesic through a with both ends on ∂𝔻: image of the diameter at angle phi"""
    automorphism = disk_automorphism(a)
    half = n_vertices // 2
    # uniform near a, geometric toward the two ends
    geometric = 1.0 - 2.0 ** (-np.arange(1, half + 1) * 40.0 / half)
    uniform = np.linspace(0.0, 1.0, half + 1)[1:-1]
    s = np.unique(np.concatenate([geometric, uniform]))
    t = np.concatenate([-s[::-1], [0.0], s])
    return PolylinePath.through(automorphism(t * np.exp(1j * phi)), subdivisions=2)


def _arc_length(speed: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, panels: int = 64) -> float:
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = mid + half * GL_NODES[None, :]
    return float(np.sum(half * GL_WEIGHTS[None, :] * speed(nodes)))


def geodesic_tail_length(a: complex, phi: float, t: float) -> Tuple[complex, float]:
    """Point z = φ_a(t·e^{iφ}) and the Euclidean length from z to the nearer end of the geodesic"""
    if not (-1.0 < t < 1.0):
        raise BadParameter("Geodesic parameter must lie in (-1, 1)")
    automorphism = disk_automorphism(a)
    direction = np.exp(1j * phi)
    z = complex(automorphism(np.asarray([t * direction]))[0])

    def speed(s):
        return np.abs(automorphism.derivative(s * direction))

    forward = _arc_length(speed, t, 1.0)
    backward = _arc_length(speed, -1.0, t)
    return z, min(forward, backward)


# ----------------------------------------------------------------------------
# Quasi-hyperbolic distance on grid regions
# ----------------------------------------------------------------------------

# E, N, NE, NW: each undirected edge of the 8-connected grid appears once
_OFFSETS = ((1, 0), (0, 1), (1, 1), (-1, 1))


@dataclass(frozen=True)
class GridRegion:
    """A bounded region given by membership and boundary distance on a bounding box"""

    box: Tuple[float, float, float, float]
    cell: float
    contains: Callable[[np.ndarray], np.ndarray]
    boundary_distance: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        xmin, xmax, ymin, ymax = self.box
        side = min(xmax - xmin, ymax - ymin)
        if side <= 0:
            raise BadParameter("Bounding box must have positive sides")
        if not (0 < self.cell < side / 8.0):
            raise BadParameter(f"Cell size {self.cell} must be below box side / 8 = {side / 8.0}")

    def members(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        xmin, xmax, ymin, ymax = self.box
        inside = (w.real >= xmin) & (w.real <= xmax) & (w.imag >= ymin) & (w.imag <= ymax)
        ok = np.zeros(w.shape, dtype=bool)
        if np.any(inside):
            ok[inside] = np.asarray(self.contains(w[inside]), dtype=bool)
        if np.any(ok):
            ok[ok] = np.asarray(self.boundary_distance(w[ok])) > 0
        return ok

    def cell_at(self, depth: int) -> float:
        return self.cell / 2.0 ** depth


def disk_region(cell: float = 0.125) -> GridRegion:
    """The unit disk with δ(w) = 1 − |w|"""
    return GridRegion(
        box=(-1.0, 1.0, -1.0, 1.0),
        cell=cell,
        contains=lambda w: np.abs(w) < 1.0,
        boundary_distance=lambda w: 1.0 - np.abs(w),
    )


class GridGraph:
    """Weighted grid graph of one GridRegion at one refinement depth"""

    def __init__(self, region: GridRegion, depth: int):
        self.region = region
        self.depth = depth
        self.cell = region.cell_at(depth)
        xmin, xmax, ymin, ymax = region.box
        nx = int(math.floor((xmax - xmin) / self.cell)) + 1
        ny = int(math.floor((ymax - ymin) / self.cell)) + 1
        gx, gy = np.meshgrid(xmin + self.cell * np.arange(nx), ymin + self.cell * np.arange(ny), indexing='ij')
        points = (gx + 1j * gy).ravel()
        member_inside = np.asarray(region.contains(points), dtype=bool)
        delta = np.zeros(points.shape)
        if np.any(member_inside):
            delta[member_inside] = region.boundary_distance(points[member_inside])
        member = member_inside & (delta > 0)

        index = -np.ones(points.shape, dtype=np.int64)
        index[member] = np.arange(int(member.sum()))
        self.nodes = points[member]
        self._tree = None
        self.delta = delta[member]
        grid_index = index.reshape(nx, ny)

        rows, cols, weights = [], [], []
        for di, dj in _OFFSETS:
            if di < 0:
                a = grid_index[-di:nx, 0:ny - dj]
                b = grid_index[0:nx + di, dj:ny]
            else:
                a = grid_index[0:nx - di, 0:ny - dj]
                b = grid_index[di:nx, dj:ny]
            ok = (a >= 0) & (b >= 0)
            ia, ib = a[ok], b[ok]
            length = self.cell * math.hypot(di, dj)
            rows.append(ia)
            cols.append(ib)
            weights.append(length * 0.5 * (1.0 / self.delta[ia] + 1.0 / self.delta[ib]))
        n = self.nodes.size
        self.matrix = coo_matrix(
            (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()
        logger.debug(f"Grid graph at depth {depth}: {n} nodes, cell {self.cell:.3g}")

    def snap(self, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest member node for each point and the straight-segment cost to reach it"""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        if self.nodes.size == 0:
            raise DisconnectedEndpoints(f"No grid nodes inside the region at depth {self.depth}")
        if self._tree is None:
            self._tree = cKDTree(np.column_stack([self.nodes.real, self.nodes.imag]))
        _, idx = self._tree.query(np.column_stack([w.real, w.imag]))
        idx = np.asarray(idx)
        dw = np.asarray(self.region.boundary_distance(w), dtype=float)
        cost = np.abs(w - self.nodes[idx]) * 0.5 * (1.0 / dw + 1.0 / self.delta[idx])
        return idx, cost

    def distances_from(self, source: complex, targets: Optional[np.ndarray] = None) -> np.ndarray:
        """k from source to the given points, or to every node when targets is None"""
        src_idx, src_cost = self.snap(np.asarray([source]))
        field = dijkstra(self.matrix, directed=False, indices=int(src_idx[0])) + src_cost[0]
        if targets is None:
            return field
        idx, cost = self.snap(targets)
        return field[idx] + cost


@dataclass(frozen=True)
class QuasiHyperbolicResult:
    value: float
    error: float
    cell: float


def _check_members(region: GridRegion, points: np.ndarray):
    ok = region.members(points)
    if not np.all(ok):
        bad = points[~ok][0]
        raise NotInRegion(f"{bad!r} is not a member of the region")


def quasihyperbolic_distance(region: GridRegion, w1: PointLike, w2: PointLike, refinement: int) -> QuasiHyperbolicResult:
    """k(w1, w2) at the given refinement depth with the two-depth error estimate"""
    if refinement < 0:
        raise BadParameter("Refinement depth must be >= 0")
    a, b = as_point(w1), as_point(w2)
    if a.is_infinite or b.is_infinite:
        raise NotInRegion("∞ is not a member of a bounded grid region")
    pts = np.asarray([a.value, b.value])
    _check_members(region, pts)
    if a.value == b.value:
        return QuasiHyperbolicResult(0.0, 0.0, region.cell_at(refinement))

    values = []
    for depth in ([refinement - 1, refinement] if refinement > 0 else [refinement]):
        graph = GridGraph(region, depth)
        idx, cost = graph.snap(pts)
        if idx[0] == idx[1]:
            dw = np.asarray(region.boundary_distance(pts))
            value = abs(pts[1] - pts[0]) * 0.5 * float(np.sum(1.0 / dw))
        else:
            value = float(graph.distances_from(pts[0], pts[1:])[0])
        if not math.isfinite(value):
            raise DisconnectedEndpoints(f"No grid path between {pts[0]!r} and {pts[1]!r} at depth {depth}")
        values.append(value)
    error = abs(values[-1] - values[0]) if len(values) == 2 else math.inf
    return QuasiHyperbolicResult(values[-1], error, region.cell_at(refinement))


def quasihyperbolic_distances_from(region: GridRegion, source: PointLike, targets, refinement: int) -> Tuple[np.ndarray, np.ndarray]:
    """Single-source variant: k(source, t) for many targets, with per-target errors"""
    src = as_point(source)
    if src.is_infinite:
        raise NotInRegion("∞ is not a member of a bounded grid region")
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    _check_members(region, np.concatenate([[src.value], targets]))
    fields = []
    for depth in ([refinement - 1, refinement] if refinement > 0 else [refinement]):
        fields.append(GridGraph(region, depth).distances_from(src.value, targets))
    values = fields[-1]
    values = np.where(targets == src.value, 0.0, values)
    error = np.abs(fields[-1] - fields[0]) if len(fields) == 2 else np.full(values.shape, math.inf)
    return values, error
