"""Hardy number estimation.

The Hardy number is the liminf of h_D(w0, C_r)/log r. Each h_D(w0, C_r) is bounded
from above by sampling rays of the disk: on every ray the crossings of |f| = r are
bracketed on a dyadic grid in 1 − |z| and refined by bisection.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from holder_metrics.analyzers.base_analyzer import BaseAnalyzer
from holder_metrics.analyzers.holder_analyzer import radial_h
from holder_metrics.catalog import DomainSpec
from holder_metrics.config import Config
from holder_metrics.exceptions import BadParameter, MissingAlpha, NoCrossing
from holder_metrics.geometry.riemann_sphere import chordal_array
from holder_metrics.schemas import (
    HardyBoundVerdict,
    HardyEstimate,
    HolderEstimate,
    MeansRow,
    MembershipRow,
    RadiusRatio,
)

logger = logging.getLogger(__name__)

# dyadic gaps 2^0 .. 2^-MAX_GAP_EXPONENT in 1 − |z|
MAX_GAP_EXPONENT = 1000
DEFAULT_SCHEDULE = tuple(10.0 ** j for j in range(1, 7))
HP_DEPTHS = tuple(range(10, 17))


@dataclass(frozen=True)
class CircleDistance:
    value: float
    w_r: complex
    angle: float
    gap: float


def _ray_angles(n_rays: int) -> np.ndarray:
    """Equally spaced angles; an even count puts both 0 and π on the grid"""
    n = n_rays + (n_rays % 2)
    return 2.0 * math.pi * np.arange(n) / n


def _moduli(domain: DomainSpec, angles: np.ndarray, gaps: np.ndarray) -> np.ndarray:
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        f, _ = domain.map.eval_polar(angles, gaps)
        mod = np.abs(f)
    return np.where(np.isnan(mod), np.inf, mod)


def hyperbolic_distance_to_circle(domain: DomainSpec, r: float, n_rays: int = Config.N_RAYS,
                                  depth: int = Config.BISECTION_DEPTH) -> CircleDistance:
    """min over ray crossings of |f| = r of log((1+|z|)/(1−|z|)), an upper bound for h_D(w0, C_r)"""
    if n_rays < 64:
        raise BadParameter(f"n_rays must be >= 64, got {n_rays}")
    w0 = domain.base_point
    if not r > abs(w0):
        raise BadParameter(f"Radius {r} must exceed |w0| = {abs(w0):.6g}")

    angles = _ray_angles(n_rays)
    logs = -np.arange(MAX_GAP_EXPONENT + 1, dtype=float) * math.log(2.0)
    gaps = np.exp(logs)
    level = _moduli(domain, angles[:, None], gaps[None, :]) - r
    # brackets between consecutive dyadic gaps where |f| − r changes sign
    sign_change = (level[:, :-1] < 0) != (level[:, 1:] < 0)
    ray_idx, gap_idx = np.nonzero(sign_change)
    if ray_idx.size == 0:
        raise NoCrossing(f"|f| never crosses r = {r:g} on {angles.size} rays of {domain.name}")

    a = logs[gap_idx]
    b = logs[gap_idx + 1]
    th = angles[ray_idx]
    fa = level[ray_idx, gap_idx] < 0
    for _ in range(depth):
        mid = 0.5 * (a + b)
        fm = (_moduli(domain, th, np.exp(mid)) - r) < 0
        left = fm == fa
        a = np.where(left, mid, a)
        b = np.where(left, b, mid)
    crossing = np.exp(0.5 * (a + b))
    h = radial_h(crossing)
    best = int(np.argmin(h))
    w_r = complex(domain.map.eval_polar(th[best], crossing[best])[0])
    return CircleDistance(float(h[best]), w_r, float(th[best]), float(crossing[best]))


def estimate_hardy(domain: DomainSpec, r_schedule: Sequence[float] = DEFAULT_SCHEDULE,
                   n_rays: int = Config.N_RAYS, depth: int = Config.BISECTION_DEPTH,
                   ceiling: float = Config.HARDY_CEILING) -> HardyEstimate:
    """Liminf surrogate: min of h_D(w0, C_r)/log r over the last half of the schedule"""
    w0 = abs(domain.base_point)
    notes = []
    ratios: List[RadiusRatio] = []
    stopped: Optional[NoCrossing] = None
    for r in r_schedule:
        if r <= w0 + 1.0:
            notes.append(f"radius {r:g} skipped: not above |w0| + 1")
            continue
        try:
            cd = hyperbolic_distance_to_circle(domain, r, n_rays, depth)
        except NoCrossing as e:
            stopped = e
            notes.append(str(e))
            logger.info(f"{domain.name}: {str(e)}")
            break
        chordal_floor = 2.0 / math.sqrt(1.0 + r * r)
        to_infinity = float(chordal_array(cd.w_r, complex(math.inf, 0.0)))
        ratios.append(RadiusRatio(
            r=r,
            distance=cd.value,
            ratio=cd.value / math.log(r),
            w_r=(cd.w_r.real, cd.w_r.imag),
            chordal_bound_ok=bool(2.0 * math.asin(min(to_infinity / 2.0, 1.0)) >= chordal_floor * (1.0 - 1e-9)),
        ))

    values = [row.ratio for row in ratios]
    growing = len(values) >= 2 and values[-1] > ceiling and values[-1] > values[-2]
    if growing:
        notes.append(f"ratios exceed {ceiling:g} and are still increasing: Hardy number flagged non-finite")
        return HardyEstimate(h_hat=None, finite=False, uncertainty=0.0, ratios=ratios, notes=notes)
    if stopped is not None or not values:
        raise stopped or NoCrossing(f"No usable radius in the schedule for {domain.name}")

    tail = values[len(values) // 2:]
    h_hat = float(min(tail))
    if h_hat < 0.5:
        notes.append(f"ĥ = {h_hat:.4f} is below 1/2: numerical anomaly")
    return HardyEstimate(h_hat=h_hat, finite=True, uncertainty=float(max(tail) - min(tail)),
                         ratios=ratios, notes=notes)


def _means_at_gap(domain: DomainSpec, p: float, gap: float, n_angles: int):
    def trapezoid(n):
        angles = 2.0 * math.pi * np.arange(n) / n
        if gap >= 1.0:
            f = np.full(n, domain.base_point)
        else:
            f, _ = domain.map.eval_polar(angles, gap)
        return 2.0 * math.pi * float(np.mean(np.abs(f) ** p))

    coarse, fine = trapezoid(n_angles), trapezoid(2 * n_angles)
    return fine, abs(fine - coarse)


def integral_means(domain: DomainSpec, p: float, r: float, n_angles: int = 4096):
    """Trapezoidal ∫|f(re^{iθ})|^p dθ and the node-doubling error estimate"""
    if not p > 0:
        raise BadParameter("p must be positive")
    if not 0.0 <= r < 1.0:
        raise BadParameter("r must lie in [0, 1)")
    return _means_at_gap(domain, p, 1.0 - r, n_angles)


def means_table(domain: DomainSpec, p: float, depths: Sequence[int] = HP_DEPTHS,
                n_angles: int = 4096) -> List[MeansRow]:
    """Integral means on r = 1 − 2^{−k}; node counts grow with k to resolve the boundary peaks"""
    rows = []
    for k in depths:
        gap = 2.0 ** -k
        value, error = _means_at_gap(domain, p, gap, max(n_angles, 2 ** (k + 5)))
        rows.append(MeansRow(p=p, k=k, r=1.0 - gap, mean=value, error=error))
    return rows


def classify_hp_membership(domain: DomainSpec, p: float, depths: Sequence[int] = HP_DEPTHS,
                           stable_tol: float = Config.HP_STABLE_TOL,
                           growth_ratio: float = Config.HP_GROWTH_RATIO,
                           rows: Optional[List[MeansRow]] = None) -> str:
    """inside if the means vary by less than stable_tol, outside if they grow by more than growth_ratio"""
    rows = rows or means_table(domain, p, depths)
    means = np.array([row.mean for row in rows])
    if not np.all(np.isfinite(means)):
        return 'outside'
    variation = (means.max() - means.min()) / means.max()
    if variation < stable_tol:
        return 'inside'
    if means[-1] / means[0] > growth_ratio:
        return 'outside'
    return 'inconclusive'


def classify_hp_range(domain: DomainSpec, ps: Sequence[float], depths: Sequence[int] = HP_DEPTHS):
    """Sweep increasing p; once outside, larger p is never reported inside"""
    rows, memberships = [], []
    seen_outside = False
    for p in sorted(ps):
        table = means_table(domain, p, depths)
        rows.extend(table)
        verdict = classify_hp_membership(domain, p, depths, rows=table)
        if verdict == 'inside' and seen_outside:
            logger.warning(f"{domain.name}: p={p:g} looks inside after a smaller p was outside")
            verdict = 'inconclusive'
        seen_outside = seen_outside or verdict == 'outside'
        memberships.append(MembershipRow(p=p, verdict=verdict))
    return memberships, rows


def verify_hardy_bound(domain: DomainSpec, holder: HolderEstimate, hardy: HardyEstimate) -> HardyBoundVerdict:
    """ĥ <= 1/α̂ + combined uncertainty"""
    if holder.alpha_hat is None:
        raise MissingAlpha(f"No α̂ for {domain.name}: Hardy bound not applicable")
    bound = 1.0 / holder.alpha_hat
    uncertainty = holder.alpha_uncertainty / holder.alpha_hat ** 2 + hardy.uncertainty + Config.HARDY_BOUND_FLOOR
    if not hardy.finite:
        return HardyBoundVerdict(passed=False, h_hat=None, bound=bound, uncertainty=uncertainty,
                                 note="Hardy number flagged non-finite while α̂ exists")
    slack = bound - hardy.h_hat
    return HardyBoundVerdict(passed=slack >= -uncertainty, h_hat=hardy.h_hat, bound=bound,
                             uncertainty=uncertainty, slack=slack)


class HardyEstimator(BaseAnalyzer):
    """Hardy number, integral means sweep and the bound against a Hölder estimate"""

    def __init__(self, domain: DomainSpec, n_rays: int = Config.N_RAYS,
                 depth: int = Config.BISECTION_DEPTH, ceiling: float = Config.HARDY_CEILING,
                 ps: Sequence[float] = (0.5, 1.0, 4.0), mesh: float = Config.MESH):
        super().__init__(domain, mesh)
        self.n_rays = n_rays
        self.depth = depth
        self.ceiling = ceiling
        self.ps = tuple(ps)

    def analyze(self) -> HardyEstimate:
        estimate = estimate_hardy(self.domain, n_rays=self.n_rays, depth=self.depth, ceiling=self.ceiling)
        for n in estimate.notes:
            self.note(n)
        estimate.memberships, estimate.means = classify_hp_range(self.domain, self.ps)
        estimate.notes = self.get_notes()
        return estimate

    def bound(self, holder: HolderEstimate, hardy: HardyEstimate) -> HardyBoundVerdict:
        try:
            return verify_hardy_bound(self.domain, holder, hardy)
        except MissingAlpha as e:
            self.note(str(e))
            return HardyBoundVerdict(skipped=True, note=str(e))
