"""Hölder exponent estimation by three characterizations.

1. Pair condition: σ(f(z1), f(z2)) <= K·|z1 − z2|^α on stratified random pairs.
2. Spherical derivative: f#(z) <= M/(1−|z|)^{1−α} on an annular grid.
3. Hyperbolic growth: h_D(w0, w) <= C + (1/α)·log(1/dist_σ(w, ∂D)), together with
   the geodesic variants that replace dist_σ(w, ∂D) by the spherical length of the
   geodesic tail or by the distance to its radial limit.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from holder_metrics.analyzers.base_analyzer import BaseAnalyzer
from holder_metrics.catalog import DomainSpec
from holder_metrics.config import Config
from holder_metrics.exceptions import BadAlpha, BadParameter, IntegralDiverged
from holder_metrics.geometry.riemann_sphere import BoundaryNet, spherical_array, spherical_density_of_map
from holder_metrics.schemas import AnnulusRow, HolderEstimate, InvariantResult, Measured

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)
GL_X, GL_W = np.polynomial.legendre.leggauss(8)
TAIL_RTOL = 1e-4


def _check_alpha(alpha: float):
    if not (0.0 < alpha <= 1.0):
        raise BadAlpha(f"Hölder exponent must lie in (0, 1], got {alpha}")


def annulus_angles(k: int) -> np.ndarray:
    """2^{k+3} equally spaced angles, always including 0 and π"""
    n = 2 ** (k + 3)
    return 2.0 * math.pi * np.arange(n) / n


def radial_h(s) -> np.ndarray:
    """h_𝔻(0, z) for 1 − |z| = s, i.e. log((2−s)/s)"""
    s = np.asarray(s, dtype=float)
    return np.log((2.0 - s) / s)


class AnnularGrid:
    """Samples of f on the annuli 1 − |z| = 2^{−k}, k = 1..depth, evaluated lazily"""

    def __init__(self, domain: DomainSpec, depth: int, boundary: Optional[BoundaryNet] = None):
        if depth < 4:
            raise BadParameter(f"Grid depth must be >= 4, got {depth}")
        self.domain = domain
        self.depth = depth
        self.boundary = boundary
        self._values: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self._dsigma: Dict[int, np.ndarray] = {}

    def gaps(self) -> np.ndarray:
        return 2.0 ** -np.arange(1, self.depth + 1, dtype=float)

    def values(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        if k not in self._values:
            self._values[k] = self.domain.map.eval_polar(annulus_angles(k), 2.0 ** -k)
        return self._values[k]

    def max_spherical_derivative(self, k: int) -> float:
        f, df = self.values(k)
        sharp = spherical_density_of_map(f, df)
        return float(np.max(sharp[np.isfinite(sharp)]))

    def dist_sigma(self, k: int) -> np.ndarray:
        if self.boundary is None:
            raise BadParameter("Annular grid was built without a boundary net")
        if k not in self._dsigma:
            self._dsigma[k] = self.boundary.spherical_distance(self.values(k)[0])
        return self._dsigma[k]

    @property
    def n_samples(self) -> int:
        return int(sum(2 ** (k + 3) for k in range(1, self.depth + 1)))


def fit_window(depth: int) -> np.ndarray:
    """Indices 1..depth of the deepest half of the annuli"""
    half = max(2, depth // 2)
    return np.arange(depth - half + 1, depth + 1)


def _linear_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float, float]:
    """Least-squares slope, intercept, rms residual and slope standard error"""
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(res ** 2)))
    if len(x) > 2:
        stderr = float(np.sqrt(np.sum(res ** 2) / (len(x) - 2) / np.sum((x - x.mean()) ** 2)))
    else:
        stderr = 0.0
    return float(slope), float(intercept), rms, stderr


def _clamp_alpha(a: float) -> float:
    return float(min(max(a, 0.0), 1.0))


@dataclass
class WindowFit:
    """Least-squares fit over the stable part of the deepest half of the annuli"""

    ks: np.ndarray
    slope: float
    raw_alpha: float
    residual: float
    stderr: float
    drift: float
    decay: float


def local_exponents(x: np.ndarray, y: np.ndarray, to_alpha: Callable[[float], float]) -> np.ndarray:
    """Raw α of each pair of consecutive annuli"""
    slopes = np.diff(y) / np.diff(x)
    return np.array([to_alpha(float(sl)) for sl in slopes])


def decay_exponent(ks: np.ndarray, local: np.ndarray) -> float:
    """p in α_k ~ t_k^{−p}, t_k = (k + 1/2)·log 2, from the deepest two local exponents"""
    if len(local) < 2:
        return 0.0
    a1, a2 = float(local[-2]), float(local[-1])
    if a1 <= 0.0 or a2 <= 0.0 or a2 >= a1:
        return 0.0
    t1, t2 = (ks[-3] + 0.5) * LOG2, (ks[-2] + 0.5) * LOG2
    return math.log(a1 / a2) / math.log(t2 / t1)


def stable_window_fit(ks: np.ndarray, x: np.ndarray, y: np.ndarray, to_alpha: Callable[[float], float],
                      drift_tolerance: float = Config.DRIFT_TOLERANCE) -> WindowFit:
    """Grow the window from the deepest three annuli toward shallower ones while the
    local exponents inside it stay within drift_tolerance of each other, then fit it"""
    local = local_exponents(x, y, to_alpha)
    start = max(0, len(x) - 3)
    while start > 0:
        trial = local[start - 1:]
        if float(np.max(trial) - np.min(trial)) > drift_tolerance:
            break
        start -= 1
    slope, _, residual, stderr = _linear_fit(x[start:], y[start:])
    inside = local[start:]
    return WindowFit(
        ks=ks[start:],
        slope=slope,
        raw_alpha=to_alpha(slope),
        residual=residual,
        stderr=stderr,
        drift=float(inside[0] - inside[-1]),
        decay=decay_exponent(ks, local),
    )


def _no_alpha_reason(fit: WindowFit, fit_tolerance: float, decay_limit: float) -> Optional[str]:
    if fit.raw_alpha <= fit_tolerance:
        return f"raw α {fit.raw_alpha:.4f} below fit tolerance: no α"
    if fit.decay > decay_limit:
        return (f"local exponent falls off like log(1/(1−|z|))^−{fit.decay:.2f}: "
                f"no positive α")
    return None


def scan_spherical_derivative(domain: DomainSpec, depth: int = Config.DEPTH,
                              fit_tolerance: float = Config.FIT_TOLERANCE,
                              drift_tolerance: float = Config.DRIFT_TOLERANCE,
                              grid: Optional[AnnularGrid] = None,
                              decay_limit: float = Config.DECAY_EXPONENT) -> HolderEstimate:
    """Fit log max f# on annuli against k·log 2; α̂ = 1 − slope"""
    grid = grid or AnnularGrid(domain, depth)
    ks = np.arange(1, depth + 1)
    m = np.array([grid.max_spherical_derivative(int(k)) for k in ks])
    s = 2.0 ** -ks.astype(float)

    window = fit_window(depth)
    fit = stable_window_fit(window, window * LOG2, np.log(m[window - 1]), lambda sl: 1.0 - sl, drift_tolerance)
    slope = fit.slope

    notes = []
    alpha_hat: Optional[float] = _clamp_alpha(fit.raw_alpha)
    reason = _no_alpha_reason(fit, fit_tolerance, decay_limit)
    if reason is not None:
        notes.append(reason)
        alpha_hat = None

    exponent = 1.0 - (alpha_hat if alpha_hat is not None else 0.0)
    scaled = m * s ** exponent
    M_hat = float(np.max(scaled))
    alpha_unc = max(fit.stderr, abs(fit.drift))
    M_unc = M_hat * alpha_unc * depth * LOG2

    logger.info(f"{domain.name}: scan slope {slope:.4f} over k = {fit.ks[0]}..{fit.ks[-1]}, "
                f"α̂ {alpha_hat}, drift {fit.drift:.4f}, decay {fit.decay:.3f}")
    return HolderEstimate(
        alpha_hat=alpha_hat,
        alpha_uncertainty=alpha_unc,
        raw_slope=slope,
        drift=fit.drift,
        M_hat=Measured(value=M_hat, uncertainty=M_unc),
        residual=fit.residual,
        n_samples=grid.n_samples,
        depth=depth,
        annuli=[AnnulusRow(k=int(k), radius_gap=float(sk), max_spherical_derivative=float(mk))
                for k, sk, mk in zip(ks, s, m)],
        notes=notes,
    )


def _sample_pairs(n_pairs: int, rng: np.random.Generator, boundary_depth: int) -> Tuple[np.ndarray, np.ndarray]:
    """Pairs in 𝔻 with log-uniform separation in [1e-6, 2]; half near boundary strata"""
    z1_all, z2_all = [], []
    need = n_pairs
    while need > 0:
        batch = max(need * 2, 64)
        sep = 10.0 ** rng.uniform(-6.0, math.log10(2.0), batch)
        psi = rng.uniform(0.0, 2.0 * math.pi, batch)
        strata = rng.uniform(size=batch) < 0.5
        # uniform points of the disk
        r_uniform = np.sqrt(rng.uniform(size=batch))
        a_uniform = rng.uniform(0.0, 2.0 * math.pi, batch)
        # boundary strata at 1 − 2^{−k} around dyadic anchor angles
        k = rng.integers(1, boundary_depth + 1, batch)
        anchor = 2.0 * math.pi * rng.integers(0, 8, batch) / 8.0
        jitter = (2.0 ** -k) * rng.uniform(-1.0, 1.0, batch)
        r_strata = 1.0 - 2.0 ** -k.astype(float)
        radius = np.where(strata, r_strata, r_uniform)
        angle = np.where(strata, anchor + jitter, a_uniform)
        z1 = radius * np.exp(1j * angle)
        z2 = z1 + sep * np.exp(1j * psi)
        ok = (np.abs(z1) < 1.0) & (np.abs(z2) < 1.0) & (z1 != z2)
        z1_all.append(z1[ok][:need])
        z2_all.append(z2[ok][:need])
        need -= len(z1_all[-1])
    return np.concatenate(z1_all), np.concatenate(z2_all)


def check_holder_pairs(domain: DomainSpec, alpha: float, n_pairs: int = Config.SAMPLES,
                       seed: int = Config.SEED, boundary_depth: int = 20) -> Measured:
    """K̂ = max σ(f(z1), f(z2))/|z1 − z2|^α; the uncertainty is the gain of the second half of the sample"""
    _check_alpha(alpha)
    if n_pairs < 1:
        raise BadParameter("n_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    z1, z2 = _sample_pairs(n_pairs, rng, boundary_depth)
    f = domain.map
    sigma = spherical_array(f.eval(z1), f.eval(z2))
    ratios = sigma / np.abs(z1 - z2) ** alpha
    ratios = np.where(np.isfinite(ratios), ratios, 0.0)
    K_hat = float(np.max(ratios))
    first_half = float(np.max(ratios[: max(1, n_pairs // 2)]))
    return Measured(value=K_hat, uncertainty=K_hat - first_half)


@dataclass
class GrowthFit:
    alpha_hat: Optional[float]
    raw_slope: float
    drift: float
    residual: float
    uncertainty: float
    notes: List[str] = field(default_factory=list)


def _growth_series(grid: AnnularGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Per annulus: h (constant on the annulus) and the smallest log(1/dist_σ)"""
    ks = np.arange(1, grid.depth + 1)
    h = radial_h(2.0 ** -ks.astype(float))
    x = np.array([float(np.min(-np.log(grid.dist_sigma(int(k))))) for k in ks])
    return h, x


def estimate_alpha_from_growth(domain: DomainSpec, depth: int = Config.DEPTH,
                               boundary_mesh: float = Config.MESH,
                               fit_tolerance: float = Config.FIT_TOLERANCE,
                               drift_tolerance: float = Config.DRIFT_TOLERANCE,
                               grid: Optional[AnnularGrid] = None,
                               decay_limit: float = Config.DECAY_EXPONENT) -> GrowthFit:
    """Fit the per-annulus maxima of h against log(1/dist_σ); α̂ = 1/slope"""
    grid = grid or AnnularGrid(domain, depth, domain.boundary_sampler(boundary_mesh))
    h, x = _growth_series(grid)
    window = fit_window(grid.depth)

    def to_alpha(sl):
        return 1.0 / sl if sl > 0 else 0.0

    fit = stable_window_fit(window, x[window - 1], h[window - 1], to_alpha, drift_tolerance)
    slope = fit.slope
    notes = []
    alpha_hat: Optional[float] = _clamp_alpha(fit.raw_alpha)
    reason = _no_alpha_reason(fit, fit_tolerance, decay_limit)
    if reason is not None:
        notes.append(f"growth: {reason}")
        alpha_hat = None
    uncertainty = max(fit.stderr / slope ** 2 if slope > 0 else math.inf, abs(fit.drift))
    return GrowthFit(alpha_hat, slope, fit.drift, fit.residual, uncertainty, notes)


def check_hyperbolic_growth(domain: DomainSpec, alpha: float, depth: int = Config.DEPTH,
                            boundary_mesh: float = Config.MESH,
                            grid: Optional[AnnularGrid] = None) -> Measured:
    """Ĉ = max(h − x/α) over the annular grid and the base point, with the net uncertainty propagated"""
    _check_alpha(alpha)
    grid = grid or AnnularGrid(domain, depth, domain.boundary_sampler(boundary_mesh))
    u = grid.boundary.uncertainty

    def constant(shift: float) -> float:
        d0 = float(grid.boundary.spherical_distance(np.asarray([domain.base_point]))[0]) + shift
        best = -math.log(1.0 / d0) / alpha if d0 > 0 else -math.inf
        for k in range(1, grid.depth + 1):
            d = grid.dist_sigma(k) + shift
            d = d[d > 0]
            if d.size:
                best = max(best, float(radial_h(2.0 ** -k) - np.min(np.log(1.0 / d)) / alpha))
        return best

    value = constant(0.0)
    spread = max(abs(constant(u) - value), abs(value - constant(-u)))
    return Measured(value=value, uncertainty=spread)


@dataclass
class GeodesicConditions:
    C1: float
    C2: float
    C3: float
    ordering_ok: bool
    tail_bound_ratio: Optional[float]
    uncertainty: float
    notes: List[str] = field(default_factory=list)


def _tail_panels(domain: DomainSpec, angle: float, last: int) -> np.ndarray:
    """∫ f# over the panels 1 − |z| ∈ [2^{−j−1}, 2^{−j}], j = 0..last"""
    j = np.arange(last + 1, dtype=float)
    lo, hi = 2.0 ** -(j + 1), 2.0 ** -j
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    u = mid[:, None] + half[:, None] * GL_X[None, :]
    f, df = domain.map.eval_polar(angle, u)
    sharp = spherical_density_of_map(f, df)
    return np.sum(half[:, None] * GL_W[None, :] * sharp, axis=1)


def panel_remainder(panels: np.ndarray, fit_panels: int = 4) -> float:
    """Sum of the panels beyond the last one, assuming p_j ~ (j + 1)^{−β} over the
    last fit_panels panels; infinite when β <= 1"""
    tail = panels[-fit_panels:]
    if tail[-1] == 0.0:
        return 0.0
    if np.any(tail <= 0.0):
        return math.inf
    j = np.arange(panels.size - fit_panels, panels.size, dtype=float) + 1.0
    beta = -float(np.polyfit(np.log(j), np.log(tail), 1)[0])
    if beta <= 1.0:
        return math.inf
    last = j[-1]
    return float(tail[-1] * last ** beta * (last + 0.5) ** (1.0 - beta) / (beta - 1.0))


def tail_lengths(domain: DomainSpec, angle: float, depth: int, extra: int = 40,
                 rtol: float = TAIL_RTOL, refinements: int = 4) -> np.ndarray:
    """l_σ of the image of the radius from 1 − 2^{−k} to the circle, k = 0..depth.

    The panels run to depth + extra, then the extension is doubled until the
    partial sums with their extrapolated remainder agree within rtol. Raises
    IntegralDiverged with the truncated values attached otherwise.
    """
    previous = None
    tails = np.zeros(depth + 1)
    for i in range(refinements):
        panels = _tail_panels(domain, angle, depth + extra * 2 ** i)
        if not np.all(np.isfinite(panels)):
            break
        remainder = panel_remainder(panels)
        tails = np.cumsum(panels[::-1])[::-1][: depth + 1]
        if not math.isfinite(remainder):
            break
        tails = tails + remainder
        if previous is not None and abs(tails[0] - previous) <= rtol * tails[0]:
            return tails
        previous = float(tails[0])
    err = IntegralDiverged(f"Tail integral along angle {angle:.4f} has not converged")
    err.values = tails
    raise err


def check_geodesic_conditions(domain: DomainSpec, boundary_angle: float, alpha: float,
                              depth: int = Config.DEPTH, boundary_mesh: float = Config.MESH,
                              M_hat: Optional[float] = None,
                              boundary: Optional[BoundaryNet] = None) -> GeodesicConditions:
    """Empirical constants of the three geodesic conditions along the radius at boundary_angle"""
    _check_alpha(alpha)
    boundary = boundary or domain.boundary_sampler(boundary_mesh)
    notes = []
    try:
        tails = tail_lengths(domain, boundary_angle, depth)
    except IntegralDiverged as e:
        notes.append(str(e))
        logger.warning(f"{domain.name}: {str(e)}")
        tails = e.values

    k = np.arange(depth + 1, dtype=float)
    s = 2.0 ** -k
    w, _ = domain.map.eval_polar(boundary_angle, s)
    limit, _ = domain.map.eval_polar(boundary_angle, 2.0 ** -(depth + 4))
    to_limit = spherical_array(w, limit)
    to_boundary = boundary.spherical_distance(w)
    h = np.where(k == 0, 0.0, radial_h(s))

    def constant(dist):
        with np.errstate(divide='ignore'):
            return float(np.max(h + np.log(dist) / alpha))

    C1, C2, C3 = constant(tails), constant(to_limit), constant(to_boundary)
    limit_gap = float(boundary.spherical_distance(np.atleast_1d(limit))[0])
    tol = boundary.uncertainty + limit_gap
    ordering_ok = bool(np.all(tails >= to_limit * (1.0 - 1e-9)) and np.all(to_limit >= to_boundary - tol))

    tail_ratio = None
    if M_hat is not None and M_hat > 0:
        tail_ratio = float(np.max(tails[1:] / ((M_hat / alpha) * s[1:] ** alpha)))
    return GeodesicConditions(C1, C2, C3, ordering_ok, tail_ratio, tol, notes)


def check_forward_constant(domain: DomainSpec, M_hat: Measured, K_hat: Measured) -> InvariantResult:
    """M̂ <= 90·K̂·(1 + dist(0, ℂ∖D)) within the reported uncertainties"""
    bound = 90.0 * K_hat.value * (1.0 + domain.dist_origin_to_complement())
    unc = float(M_hat.uncertainty) if M_hat.uncertainty != "exact" else 0.0
    slack = bound - M_hat.value
    return InvariantResult(
        name=f"forward_constant[{domain.name}]",
        passed=slack >= -unc,
        slack=slack,
        uncertainty=unc,
    )


def constant_diverges(shallow: float, deep: float, ratio: float = Config.DIVERGENCE_RATIO) -> bool:
    """Additive constants diverge when they grow by more than log(ratio) between depths"""
    if not math.isfinite(deep):
        return True
    return deep - shallow > math.log(ratio)


class HolderAnalyzer(BaseAnalyzer):
    """Runs the three characterizations on one domain and collects a HolderEstimate"""

    def __init__(self, domain: DomainSpec, depth: int = Config.DEPTH, samples: int = Config.SAMPLES,
                 seed: int = Config.SEED, mesh: float = Config.MESH,
                 boundary_angles: Sequence[float] = (0.0, math.pi),
                 fit_tolerance: float = Config.FIT_TOLERANCE):
        super().__init__(domain, mesh)
        self.depth = depth
        self.samples = samples
        self.seed = seed
        self.fit_tolerance = fit_tolerance
        self.boundary_angles = tuple(boundary_angles)

    def analyze(self) -> HolderEstimate:
        grid = AnnularGrid(self.domain, self.depth, self.boundary)
        estimate = scan_spherical_derivative(self.domain, self.depth, self.fit_tolerance, grid=grid)
        for n in estimate.notes:
            self.note(n)

        growth = estimate_alpha_from_growth(self.domain, self.depth, self.mesh, self.fit_tolerance, grid=grid)
        estimate.alpha_growth = growth.alpha_hat
        estimate.alpha_growth_uncertainty = growth.uncertainty if growth.alpha_hat is not None else None
        for n in growth.notes:
            self.note(n)

        alpha = estimate.alpha_hat
        if alpha is None:
            self.note("no α: pair, growth and geodesic constants skipped")
        else:
            estimate.K_hat = check_holder_pairs(self.domain, alpha, self.samples, self.seed)
            estimate.C_hat['growth'] = check_hyperbolic_growth(self.domain, alpha, grid=grid)
            C1 = C2 = C3 = -math.inf
            unc = 0.0
            for angle in self.boundary_angles:
                cond = check_geodesic_conditions(self.domain, angle, alpha, self.depth,
                                                 M_hat=estimate.M_hat.value, boundary=self.boundary)
                for n in cond.notes:
                    self.note(n)
                if not cond.ordering_ok:
                    self.note(f"geodesic constant ordering violated along angle {angle:.4f}")
                C1, C2, C3 = max(C1, cond.C1), max(C2, cond.C2), max(C3, cond.C3)
                unc = max(unc, cond.uncertainty)
            estimate.C_hat['C1'] = Measured(value=C1, uncertainty=unc)
            estimate.C_hat['C2'] = Measured(value=C2, uncertainty=unc)
            estimate.C_hat['C3'] = Measured(value=C3, uncertainty=unc)
            for row in estimate.annuli:
                d = grid.dist_sigma(row.k)
                row.max_growth_excess = float(radial_h(row.radius_gap) + np.max(np.log(d[d > 0])) / alpha)

        estimate.notes = self.get_notes()
        return estimate
