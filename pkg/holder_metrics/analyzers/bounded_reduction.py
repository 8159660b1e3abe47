"""Reduction of an unbounded domain to a bounded one.

With w0 = f(0) and r = dist(w0, ∂D)/2, the map g(w) = r/(w − w0) sends D onto a
domain D′ containing ∞ whose boundary lies in the closed disk of radius 1/2.
D₀ = D′ ∩ D(0, 4) is bounded, and D is an unbounded Hölder domain exactly when
D₀ is a quasi-hyperbolic Hölder domain. This module builds D′ and D₀ and checks
the distance comparability, the density bound and that equivalence numerically.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from holder_metrics.analyzers.base_analyzer import BaseAnalyzer
from holder_metrics.analyzers.holder_analyzer import annulus_angles, scan_spherical_derivative
from holder_metrics.catalog import R_MAX, ConformalMap, DomainSpec, sample_disk
from holder_metrics.config import Config
from holder_metrics.exceptions import (
    BadParameter,
    DegenerateBoundary,
    EmptyBoundary,
    HolderMetricsError,
    ZeroDerivative,
)
from holder_metrics.geometry.hyperbolic import GridGraph, GridRegion, hyperbolic_distance_domain
from holder_metrics.geometry.riemann_sphere import (
    BoundaryNet,
    chordal_array,
    spherical_from_chordal,
    stereographic,
)
from holder_metrics.schemas import HolderEstimate, InvariantResult, Measured, ReductionReport

logger = logging.getLogger(__name__)

OUTER_RADIUS = 4.0
DENSITY_FLOOR = 1.0 / 300.0
# quasi-hyperbolic grid; the box holds all of D₀
QH_BOX = (-OUTER_RADIUS, OUTER_RADIUS, -OUTER_RADIUS, OUTER_RADIUS)
QH_CELL = 0.5
# the anchor lies on the segment from ANCHOR_START toward the deepest coarse node
ANCHOR_START = 1.5
ANCHOR_STEPS = 256
# c2 grows without bound when its increments between depths do not shrink
QH_DIVERGENCE_CHANGE = 2.0 * Config.QH_STABILITY_TOL
REFINE_STEPS = 40


def _image(w: np.ndarray, w0: complex, r: float) -> np.ndarray:
    """g(w) = r/(w − w0) with g(∞) = 0"""
    w = np.asarray(w, dtype=complex)
    finite = np.isfinite(w)
    out = np.zeros(w.shape, dtype=complex)
    with np.errstate(divide='ignore', invalid='ignore'):
        out[finite] = r / (w[finite] - w0)
    return out


class ReducedBoundary:
    """g(∂D) seen through a boundary net of D.

    Every segment of a straight net is a piece of ∂D, so its image under g is an
    exact arc of ∂D′; distances are minimized over the segment parameter instead
    of being read off the polyline through the image points.
    """

    def __init__(self, net: BoundaryNet, w0: complex, r: float):
        if net.points.size == 0:
            raise EmptyBoundary("Boundary sample set is empty")
        self.net = net
        self.w0 = w0
        self.r = r
        self.points = _image(net.points, w0, r)
        self.image_net = BoundaryNet.from_components([_image(c, w0, r) for c in net.components])
        n = net.points.size
        same = np.zeros(n, dtype=bool)
        start = 0
        for c in net.components:
            same[start:start + len(c) - 1] = True
            start += len(c)
        self._same = same
        self._plane_tree = cKDTree(np.column_stack([self.points.real, self.points.imag]))
        self._sphere_tree = cKDTree(stereographic(self.points))

    @property
    def euclidean_uncertainty(self) -> float:
        if self.net.straight:
            # the tails beyond R_MAX map into |y| < r/R_MAX
            return 2.0 * self.r / R_MAX
        return 0.5 * self.image_net.euclidean_gap()

    @property
    def chordal_uncertainty(self) -> float:
        if self.net.straight:
            return 4.0 * self.r / R_MAX
        return self.image_net.uncertainty

    def _arc_points(self, lo: np.ndarray, t: np.ndarray, ok: np.ndarray) -> np.ndarray:
        a = np.where(ok, self.net.points[lo], 0.0)
        b = self.net.points[np.minimum(lo + 1, self.net.points.size - 1)]
        finite_b = np.isfinite(b) & ok
        b = np.where(finite_b, b, 0.0)
        on_arc = _image(a + t * (b - a), self.w0, self.r)
        # segments ending at ∞ are short image arcs into 0: taken straight
        toward_zero = self.points[lo] * (1.0 - t)
        return np.where(finite_b, on_arc, toward_zero)

    def _refine(self, y: np.ndarray, idx: np.ndarray, metric) -> np.ndarray:
        n = self.points.size
        best = metric(y, self.points[idx])
        if not self.net.straight:
            return best
        for lo in (idx - 1, idx):
            ok = (lo >= 0) & (lo < n - 1)
            lo = np.clip(lo, 0, max(n - 2, 0))
            ok &= self._same[lo] & np.isfinite(self.net.points[lo])
            if not np.any(ok):
                continue
            a = np.zeros(y.shape)
            b = np.ones(y.shape)
            for _ in range(REFINE_STEPS):
                m1 = a + (b - a) / 3.0
                m2 = b - (b - a) / 3.0
                closer = metric(y, self._arc_points(lo, m1, ok)) < metric(y, self._arc_points(lo, m2, ok))
                b = np.where(closer, m2, b)
                a = np.where(closer, a, m1)
            d = metric(y, self._arc_points(lo, 0.5 * (a + b), ok))
            end = metric(y, self.points[np.minimum(lo + 1, n - 1)])
            best = np.where(ok, np.minimum(best, np.minimum(d, end)), best)
        return best

    def euclidean_distance(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        flat = y.ravel()
        if not self.net.straight:
            return self.image_net.euclidean_distance(y)
        _, idx = self._plane_tree.query(np.column_stack([flat.real, flat.imag]))
        d = self._refine(flat, np.asarray(idx), lambda p, q: np.abs(p - q))
        return d.reshape(y.shape)

    def chordal_distance(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        flat = y.ravel()
        if not self.net.straight:
            return self.image_net.chordal_distance(y)
        _, idx = self._sphere_tree.query(stereographic(flat))
        d = self._refine(flat, np.asarray(idx), chordal_array)
        return d.reshape(y.shape)

    def spherical_distance(self, y) -> np.ndarray:
        return spherical_from_chordal(self.chordal_distance(y))


@dataclass
class ReductionSpec:
    source: DomainSpec
    w0: complex
    r: float
    reduced_map: ConformalMap
    boundary: ReducedBoundary
    region: Optional[GridRegion] = None
    anchor: complex = 0j

    def g(self, w) -> np.ndarray:
        return _image(w, self.w0, self.r)

    def g_inverse(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(y != 0, self.w0 + self.r / np.where(y != 0, y, 1.0), complex(math.inf, 0.0))

    def in_prime(self, y) -> np.ndarray:
        """Finite part of D′; y = 0 is g(∞), a boundary point"""
        y = np.asarray(y, dtype=complex)
        ok = (y != 0) & np.isfinite(y)
        out = np.zeros(y.shape, dtype=bool)
        if np.any(ok):
            out[ok] = self.source.contains(self.g_inverse(y[ok]))
        return out

    def contains(self, y) -> np.ndarray:
        """Membership in D₀ = D′ ∩ D(0, 4)"""
        y = np.asarray(y, dtype=complex)
        return (np.abs(y) < OUTER_RADIUS) & self.in_prime(y)

    def delta_prime(self, y) -> np.ndarray:
        """δ_{D′}: Euclidean distance to g(∂D) only"""
        return self.boundary.euclidean_distance(y)

    def delta_zero(self, y) -> np.ndarray:
        """δ_{D₀}: the circle |y| = 4 is part of ∂D₀"""
        y = np.asarray(y, dtype=complex)
        return np.minimum(self.delta_prime(y), OUTER_RADIUS - np.abs(y))


def _reduced_map(source: DomainSpec, w0: complex, r: float) -> ConformalMap:
    f = source.map

    def func(z, omz, opz):
        return r / (f.func(z, omz, opz) - w0)

    def dfunc(z, omz, opz):
        return -r * f.dfunc(z, omz, opz) / (f.func(z, omz, opz) - w0) ** 2

    inv = None
    if f.has_inverse:
        def inv(y):
            with np.errstate(divide='ignore', invalid='ignore'):
                return f.inverse(w0 + r / y)

    return ConformalMap(f"reduced:{source.name}", func, dfunc, inv, {'r': r})


def _base_distance(domain: DomainSpec, w0: complex, mesh: float) -> float:
    try:
        if domain.euclid_dist_to_boundary is not None:
            d = float(np.asarray(domain.euclid_dist_to_boundary(np.asarray([w0])))[0])
        else:
            d = float(domain.boundary_sampler(mesh).euclidean_distance(np.asarray([w0]))[0])
    except EmptyBoundary as e:
        raise DegenerateBoundary(f"dist(w0, ∂D) not computable for {domain.name}: {e}") from e
    if not (math.isfinite(d) and d > 0):
        raise DegenerateBoundary(f"dist(w0, ∂D) = {d} for {domain.name}")
    return d


def _pick_anchor(reduction: ReductionSpec) -> complex:
    """Point of largest |y| in D₀ ∖ 𝔻̄ on the segment from ANCHOR_START toward the
    deepest node of the coarsest grid; ties go to the point nearer ANCHOR_START"""
    graph = GridGraph(reduction.region, 0)
    if graph.nodes.size == 0:
        raise DegenerateBoundary(f"No grid node inside D₀ for {reduction.source.name}")
    deepest = complex(graph.nodes[int(np.argmax(graph.delta))])
    t = np.linspace(0.0, 1.0, ANCHOR_STEPS + 1)
    segment = ANCHOR_START + t * (deepest - ANCHOR_START)
    usable = (np.abs(segment) > 1.0) & reduction.region.members(segment)
    if not np.any(usable):
        raise DegenerateBoundary(f"No point of D₀ outside the unit disk toward {deepest!r} "
                                 f"for {reduction.source.name}")
    candidates = np.flatnonzero(usable)
    best = candidates[int(np.argmax(np.abs(segment[candidates])))]
    return complex(segment[best])


def build_reduction(domain: DomainSpec, mesh: float = Config.MESH) -> ReductionSpec:
    w0 = domain.base_point
    r = 0.5 * _base_distance(domain, w0, mesh)
    reduction = ReductionSpec(
        source=domain,
        w0=w0,
        r=r,
        reduced_map=_reduced_map(domain, w0, r),
        boundary=ReducedBoundary(domain.boundary_sampler(mesh), w0, r),
    )
    reduction.region = GridRegion(QH_BOX, QH_CELL, reduction.contains, reduction.delta_zero)
    reduction.anchor = _pick_anchor(reduction)
    logger.info(f"{domain.name}: reduction r = {r:.6g}, anchor {reduction.anchor}")
    return reduction


# ----------------------------------------------------------------------------
# Distance comparability between D and D′
# ----------------------------------------------------------------------------

def distance_fraction(w, w0: complex, r: float) -> np.ndarray:
    """(r² + |w − w0|²) / (r(1 + |w|²)); tends to 1/r as |w| → ∞"""
    w = np.asarray(w, dtype=complex)
    return (r * r + np.abs(w - w0) ** 2) / (r * (1.0 + np.abs(w) ** 2))


def fraction_bounds(r: float, w0_modulus: float) -> Tuple[float, float]:
    """Lower and upper envelopes of distance_fraction over the whole plane"""
    if w0_modulus == 0.0:
        return min(r, 1.0) ** 2 / r, max(r, 1.0) ** 2 / r
    far_lo = min(r, 1.0 / (r + 1.0)) ** 2 / r
    far_hi = max(r, (2.0 * r + 1.0) / (r + 1.0)) ** 2 / r
    near_lo = r / (1.0 + ((r + 1.0) / r) ** 2 * w0_modulus ** 2)
    near_hi = (r * r + ((2.0 * r + 1.0) / r) ** 2 * w0_modulus ** 2) / r
    return min(far_lo, near_lo), max(far_hi, near_hi)


@dataclass
class Comparability:
    c1: Measured
    c2: Measured
    fraction_min: float
    fraction_max: float
    bounds: Tuple[float, float]
    envelope_ok: bool
    n_samples: int


def distance_ratios(reduction: ReductionSpec, w: np.ndarray, net: BoundaryNet) -> Tuple[np.ndarray, np.ndarray]:
    """dist_σ(g(w), ∂D′) / dist_σ(w, ∂D) and the per-point uncertainty"""
    d_source = net.spherical_distance(w)
    d_image = reduction.boundary.spherical_distance(reduction.g(w))
    ratio = d_image / d_source
    unc = ratio * (net.uncertainty / d_source + 0.5 * math.pi * reduction.boundary.chordal_uncertainty / d_image)
    return ratio, unc


def check_distance_comparability(reduction: ReductionSpec, n_samples: int = Config.SAMPLES,
                                 seed: int = Config.SEED, depth: int = Config.DEPTH,
                                 mesh: float = Config.MESH) -> Comparability:
    """Empirical c1, c2 with dist_σ(g(w), ∂D′) / dist_σ(w, ∂D) in [c1, c2]"""
    net = reduction.source.boundary_sampler(mesh)
    z = sample_disk(n_samples, seed, max_radius=1.0 - 2.0 ** -depth)
    near = reduction.w0 + 0.1 * reduction.r * np.exp(2j * math.pi * np.arange(16) / 16)
    w = np.concatenate([reduction.source.map.eval(z), near])
    w = w[np.isfinite(w) & (w != reduction.w0)]
    ratio, unc = distance_ratios(reduction, w, net)
    usable = np.isfinite(ratio) & (ratio > 0)
    if not np.any(usable):
        raise EmptyBoundary(f"No sample with a positive boundary distance for {reduction.source.name}")
    ratio, unc, w = ratio[usable], unc[usable], w[usable]

    fraction = distance_fraction(w, reduction.w0, reduction.r)
    lo, hi = fraction_bounds(reduction.r, abs(reduction.w0))
    i_min, i_max = int(np.argmin(ratio)), int(np.argmax(ratio))
    c1 = Measured(value=float(ratio[i_min]), uncertainty=float(unc[i_min]))
    c2 = Measured(value=float(ratio[i_max]), uncertainty=float(unc[i_max]))
    fractions_ok = bool(np.all(fraction >= lo * (1.0 - 1e-12)) and np.all(fraction <= hi * (1.0 + 1e-12)))
    # σ-ratios under g lie within π/2 of sqrt(F(z)F(w)), so the envelopes bound c1 and c2
    ratios_ok = c1.value >= 2.0 / (math.pi * hi) - c1.uncertainty and c2.value <= math.pi / (2.0 * lo) + c2.uncertainty
    return Comparability(
        c1=c1,
        c2=c2,
        fraction_min=float(fraction.min()),
        fraction_max=float(fraction.max()),
        bounds=(lo, hi),
        envelope_ok=bool(fractions_ok and ratios_ok),
        n_samples=int(ratio.size),
    )


# ----------------------------------------------------------------------------
# Density bound on D₀
# ----------------------------------------------------------------------------

def density_product(z, h_deriv, delta) -> np.ndarray:
    """λ_{D′}(h(z))·δ_{D′}(h(z)) with λ_{D′}(h(z)) = (2/(1−|z|²))/|h′(z)|"""
    z = np.asarray(z, dtype=complex)
    return 2.0 / (1.0 - np.abs(z) ** 2) / np.abs(h_deriv) * np.asarray(delta, dtype=float)


@dataclass
class DensityCheck:
    minimum: Measured
    passed: bool
    n_points: int
    argmin: complex


def _density_grid(depth: int) -> Tuple[np.ndarray, np.ndarray]:
    angles, gaps = [], []
    for k in range(1, depth + 1):
        a = annulus_angles(k)
        angles.append(a)
        gaps.append(np.full(a.size, 2.0 ** -k))
    for radius in 0.01 * 1.5 ** np.arange(0, 10):
        a = 2.0 * math.pi * np.arange(256) / 256
        angles.append(a)
        gaps.append(np.full(a.size, 1.0 - radius))
    return np.concatenate(angles), np.concatenate(gaps)


def check_density_bound(reduction: ReductionSpec, depth: int = Config.DEPTH) -> DensityCheck:
    """min of λ_{D′}·δ_{D′} over grid points of 𝔻 whose image lies in D₀"""
    angles, gaps = _density_grid(depth)
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        y, dy = reduction.reduced_map.eval_polar(angles, gaps)
    keep = np.isfinite(y) & np.isfinite(dy) & (np.abs(y) < OUTER_RADIUS)
    angles, gaps, y, dy = angles[keep], gaps[keep], y[keep], dy[keep]
    if y.size == 0:
        raise BadParameter(f"No density sample lands in D₀ for {reduction.source.name}")
    if np.any(dy == 0):
        raise ZeroDerivative(f"h′ vanishes on the density grid of {reduction.source.name}")

    # 1 − |z|² = s(2 − s) for z = (1 − s)e^{iθ}
    lam = 2.0 / (gaps * (2.0 - gaps)) / np.abs(dy)
    product = lam * reduction.delta_prime(y)
    i = int(np.argmin(product))
    uncertainty = float(lam[i] * reduction.boundary.euclidean_uncertainty)
    value = float(product[i])
    z_min = complex((1.0 - gaps[i]) * np.exp(1j * angles[i]))
    logger.info(f"{reduction.source.name}: min λδ on D₀ = {value:.4g} at z = {z_min:.4g}")
    return DensityCheck(
        minimum=Measured(value=value, uncertainty=uncertainty),
        passed=value >= DENSITY_FLOOR - uncertainty,
        n_points=int(y.size),
        argmin=z_min,
    )


# ----------------------------------------------------------------------------
# Quasi-hyperbolic Hölder condition on D₀
# ----------------------------------------------------------------------------

@dataclass
class QHField:
    depth: int
    cell: float
    nodes: np.ndarray
    k: np.ndarray
    delta: np.ndarray


@dataclass
class QHFit:
    c1: Optional[float]
    c2: Optional[float]
    c2_by_depth: List[float]
    verdict: Optional[bool]
    delta_star: float
    grid: Optional[QHField] = None
    notes: List[str] = field(default_factory=list)
    c1_uncertainty: Optional[float] = None
    c2_uncertainty: Optional[float] = None


def qh_field(reduction: ReductionSpec, depth: int) -> QHField:
    """k_{D₀}(z*, ·) on every node of the window grid at one depth"""
    graph = GridGraph(reduction.region, depth)
    k = graph.distances_from(reduction.anchor)
    return QHField(depth, graph.cell, graph.nodes, k, graph.delta)


def qh_envelope(qh: QHField, delta_star: float, window: int,
                sample: Optional[np.ndarray] = None) -> Optional[Tuple[float, float]]:
    """Upper envelope k <= c2·x + c1 with x = log(δ*/δ).

    Nodes are grouped in dyadic strata of δ; c2 is fitted through the per-stratum
    maxima of the deepest `window` strata the grid resolves (δ >= 4 cells).
    """
    idx = np.arange(qh.nodes.size) if sample is None else sample
    k, delta = qh.k[idx], qh.delta[idx]
    ok = np.isfinite(k) & (delta >= 4.0 * qh.cell) & (delta <= delta_star)
    k, delta = k[ok], delta[ok]
    if k.size == 0:
        return None
    x = np.log(delta_star / delta)
    strata = np.floor(x / math.log(2.0)).astype(int)
    xs, ks = [], []
    for j in np.unique(strata):
        members = strata == j
        i = int(np.argmax(k[members]))
        xs.append(x[members][i])
        ks.append(k[members][i])
    if len(xs) < window:
        return None
    c2 = float(np.polyfit(np.asarray(xs[-window:]), np.asarray(ks[-window:]), 1)[0])
    c1 = float(np.max(k - c2 * x))
    return c1, c2


def qh_verdict(c2_by_depth: Sequence[float], stability_tol: float = Config.QH_STABILITY_TOL,
               divergence_change: float = QH_DIVERGENCE_CHANGE) -> Tuple[Optional[bool], Optional[str]]:
    """PASS when the last two c2 agree within stability_tol; FAIL when c2 moves by at
    least divergence_change and its increments do not shrink; inconclusive otherwise"""
    *earlier, c2_shallow, c2 = c2_by_depth
    change = abs(c2 - c2_shallow) / abs(c2_shallow) if c2_shallow != 0 else math.inf
    if change < stability_tol:
        return True, None
    message = f"c2 moves by {100.0 * change:.1f}% between the two deepest grids"
    if earlier:
        previous, last = c2_shallow - earlier[-1], c2 - c2_shallow
        if change >= divergence_change and previous > 0 and last >= previous:
            return False, f"{message}, increments {previous:.4g} → {last:.4g} not shrinking"
        return None, f"{message}: inconclusive, increments {previous:.4g} → {last:.4g}"
    return None, f"{message}: inconclusive with two grids"


def check_qh_holder(reduction: ReductionSpec, depth: int = Config.QH_DEPTH,
                    n_samples: Optional[int] = None, seed: int = Config.SEED,
                    stability_tol: float = Config.QH_STABILITY_TOL) -> QHFit:
    """Fit (c1, c2) at depths depth − 2 .. depth and classify c2 with qh_verdict"""
    if depth < 1:
        raise BadParameter("Quasi-hyperbolic depth must be >= 1")
    delta_star = float(reduction.delta_zero(np.asarray([reduction.anchor]))[0])
    window = max(3, depth // 2)
    rng = np.random.default_rng(seed)
    fits, notes = [], []
    qh = None
    for d in range(max(0, depth - 2), depth + 1):
        qh = qh_field(reduction, d)
        sample = None
        if n_samples is not None and n_samples < qh.nodes.size:
            sample = np.sort(rng.choice(qh.nodes.size, size=n_samples, replace=False))
        fit = qh_envelope(qh, delta_star, window, sample)
        if fit is None:
            notes.append(f"depth {d}: fewer than {window} resolved strata")
        fits.append(fit)
        logger.debug(f"{reduction.source.name}: QH fit at depth {d}: {fit}")

    # the coarsest grid may resolve too few strata; only the deepest two are required
    if fits[-1] is None or fits[-2] is None:
        return QHFit(None, None, [f[1] for f in fits if f is not None], None, delta_star, qh, notes)
    if fits[0] is None:
        fits = fits[1:]
    (c1_shallow, c2_shallow), (c1, c2) = fits[-2], fits[-1]
    c2_by_depth = [f[1] for f in fits]
    verdict, message = qh_verdict(c2_by_depth, stability_tol)
    if message:
        notes.append(message)
    return QHFit(c1, c2, c2_by_depth, verdict, delta_star, qh, notes,
                 c1_uncertainty=abs(c1 - c1_shallow), c2_uncertainty=abs(c2 - c2_shallow))


def check_qh_sandwich(reduction: ReductionSpec, fit: QHFit, n_points: int = 64,
                      seed: int = Config.SEED) -> InvariantResult:
    """2k_{D₀} >= h_{D′} and k_{D₀} <= 300·h_{D′} + 4π + 1 on |y| <= 3"""
    name = 'qh_sandwich'
    qh = fit.grid
    if qh is None or not reduction.reduced_map.has_inverse:
        return InvariantResult(name=name, passed=False, detail="no quasi-hyperbolic field or no inverse")
    usable = np.flatnonzero(np.isfinite(qh.k) & (qh.delta >= 4.0 * qh.cell) & (np.abs(qh.nodes) <= 3.0))
    usable = usable[qh.nodes[usable] != reduction.anchor]
    if usable.size == 0:
        return InvariantResult(name=name, passed=False, detail="no resolved node")
    rng = np.random.default_rng(seed)
    picked = rng.choice(usable, size=min(n_points, usable.size), replace=False)
    lower, upper = math.inf, math.inf
    for i in picked:
        h = hyperbolic_distance_domain(reduction.reduced_map, reduction.anchor, complex(qh.nodes[i]))
        k = float(qh.k[i])
        lower = min(lower, 2.0 * k - h)
        upper = min(upper, 300.0 * h + 4.0 * math.pi + 1.0 - k)
    return InvariantResult(
        name=name,
        passed=lower >= 0.0 and upper >= 0.0,
        slack=min(lower, upper),
        uncertainty=qh.cell,
        detail=f"min(2k − h) = {lower:.4g}, min(300h + 4π + 1 − k) = {upper:.4g} over {picked.size} nodes",
    )


# ----------------------------------------------------------------------------
# Invariants across the reduction
# ----------------------------------------------------------------------------

def check_conformal_invariance(reduction: ReductionSpec, n_pairs: int = 1000,
                               seed: int = Config.SEED) -> InvariantResult:
    """h_D(w1, w2) = h_{D′}(g(w1), g(w2))"""
    f = reduction.source.map
    z = sample_disk(2 * n_pairs, seed, max_radius=0.999)
    w = f.eval(z)
    y = reduction.g(w)
    worst = 0.0
    for i in range(n_pairs):
        a, b = 2 * i, 2 * i + 1
        h_source = hyperbolic_distance_domain(f, complex(w[a]), complex(w[b]))
        h_image = hyperbolic_distance_domain(reduction.reduced_map, complex(y[a]), complex(y[b]))
        worst = max(worst, abs(h_source - h_image) / max(1.0, h_source))
    return InvariantResult(name='conformal_invariance', passed=worst <= 1e-8, slack=1e-8 - worst,
                           detail=f"largest relative gap {worst:.3g} over {n_pairs} pairs")


def check_boundary_image(reduction: ReductionSpec) -> Measured:
    """max |g| over the finite boundary samples; at most 1/2 since |w − w0| >= 2r on ∂D"""
    pts = reduction.boundary.net.points
    pts = pts[np.isfinite(pts)]
    return Measured(value=float(np.max(np.abs(reduction.g(pts)))),
                    uncertainty=reduction.boundary.euclidean_uncertainty)


def check_alpha_c2_consistency(alpha: Optional[float], c2: Optional[float]) -> InvariantResult:
    """(1/α)/(1 + 2c2) within [0.2, 5]: same order of magnitude, not equal"""
    name = 'alpha_c2_consistency'
    if alpha is None or c2 is None:
        return InvariantResult(name=name, passed=True, detail="skipped: α̂ or c2 missing")
    ratio = (1.0 / alpha) / (1.0 + 2.0 * c2)
    return InvariantResult(name=name, passed=0.2 <= ratio <= 5.0, slack=min(ratio - 0.2, 5.0 - ratio),
                           detail=f"(1/α̂)/(1 + 2c2) = {ratio:.4g}")


@dataclass
class Equivalence:
    passed: Optional[bool]
    holder: bool
    qh: Optional[bool]
    note: Optional[str] = None
    fit: Optional[QHFit] = None

    @property
    def inconclusive(self) -> bool:
        """The grid resolved c2 but could not classify it"""
        return self.qh is None and self.fit is not None and self.fit.c2 is not None


def equivalence_verdict(holder: HolderEstimate, fit: QHFit) -> Equivalence:
    has_alpha = holder.alpha_hat is not None
    if fit.verdict is None:
        reason = "inconclusive" if fit.c2 is not None else "unavailable"
        return Equivalence(None, has_alpha, None, f"quasi-hyperbolic verdict {reason}", fit)
    return Equivalence(has_alpha == fit.verdict, has_alpha, fit.verdict, fit=fit)


def check_equivalence(domain: DomainSpec, depth: int = Config.DEPTH, qh_depth: int = Config.QH_DEPTH,
                      mesh: float = Config.MESH, seed: int = Config.SEED,
                      holder: Optional[HolderEstimate] = None,
                      reduction: Optional[ReductionSpec] = None) -> Equivalence:
    """D has an α exactly when D₀ passes the quasi-hyperbolic Hölder check"""
    holder = holder or scan_spherical_derivative(domain, depth)
    fit = check_qh_holder(reduction or build_reduction(domain, mesh), qh_depth, seed=seed)
    return equivalence_verdict(holder, fit)


class ReductionAnalyzer(BaseAnalyzer):
    """Builds D₀ for one domain and runs every reduction check"""

    def __init__(self, domain: DomainSpec, depth: int = Config.DEPTH, samples: int = Config.SAMPLES,
                 seed: int = Config.SEED, mesh: float = Config.MESH, qh_depth: int = Config.QH_DEPTH,
                 holder: Optional[HolderEstimate] = None):
        super().__init__(domain, mesh)
        self.depth = depth
        self.samples = samples
        self.seed = seed
        self.qh_depth = qh_depth
        self.holder = holder
        self.invariants: List[InvariantResult] = []

    def analyze(self) -> ReductionReport:
        reduction = build_reduction(self.domain, self.mesh)
        comparability = check_distance_comparability(reduction, self.samples, self.seed, self.depth, self.mesh)
        if not comparability.envelope_ok:
            self.note(f"distance fraction or ratios left the envelope {comparability.bounds}")
        image_max = check_boundary_image(reduction)
        if image_max.value > 0.5 + image_max.uncertainty + 1e-12:
            self.note(f"boundary image reaches |g| = {image_max.value:.6g} > 1/2")

        density = check_density_bound(reduction, self.depth)
        if not density.passed:
            self.note(f"λδ drops to {density.minimum.value:.4g} below 1/300")

        fit = check_qh_holder(reduction, self.qh_depth, seed=self.seed)
        for n in fit.notes:
            self.note(n)

        holder = self.holder or scan_spherical_derivative(self.domain, self.depth)
        equivalence = equivalence_verdict(holder, fit)
        if equivalence.note:
            self.note(equivalence.note)

        self.invariants = [check_conformal_invariance(reduction, seed=self.seed)]
        if reduction.reduced_map.has_inverse:
            try:
                self.invariants.append(check_qh_sandwich(reduction, fit, seed=self.seed))
            except HolderMetricsError as e:
                self.note(f"sandwich check failed to run: {e}")
        self.invariants.append(check_alpha_c2_consistency(holder.alpha_hat, fit.c2))

        return ReductionReport(
            r=Measured(value=reduction.r, uncertainty="exact"),
            base_point=(reduction.w0.real, reduction.w0.imag),
            anchor=(reduction.anchor.real, reduction.anchor.imag),
            ratio_min=comparability.c1,
            ratio_max=comparability.c2,
            envelope_ok=comparability.envelope_ok,
            boundary_image_max=image_max,
            density_min=density.minimum,
            density_pass=density.passed,
            qh_c1=fit.c1,
            qh_c1_uncertainty=fit.c1_uncertainty,
            qh_c2=fit.c2,
            qh_c2_uncertainty=fit.c2_uncertainty,
            qh_c2_by_depth=fit.c2_by_depth,
            qh_verdict=fit.verdict,
            equivalence=equivalence.passed,
            notes=self.get_notes(),
        )
