"""Acceptance suite: every check returns an InvariantResult with its measured slack.

`VerificationSuite.run_all()` covers the whole catalog; `run_domain()` runs the
checks that apply to a single domain. Expensive estimates are computed once per
domain and shared between checks.
"""
import hashlib
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from holder_metrics.analyzers.bounded_reduction import (
    DENSITY_FLOOR,
    ReductionSpec,
    build_reduction,
    check_density_bound,
    check_distance_comparability,
    check_equivalence,
)
from holder_metrics.analyzers.hardy_estimator import estimate_hardy, verify_hardy_bound
from holder_metrics.analyzers.holder_analyzer import (
    check_forward_constant,
    check_geodesic_conditions,
    check_holder_pairs,
    constant_diverges,
    estimate_alpha_from_growth,
    scan_spherical_derivative,
)
from holder_metrics.catalog import (
    DomainSpec,
    boundary_distance_slack,
    make_translated_sector,
    catalog_names,
    koebe_derivative_slack,
    koebe_distortion_slack,
    resolve_domain,
    sample_disk,
)
from holder_metrics.exceptions import HolderMetricsError
from holder_metrics.geometry.hyperbolic import (
    circle_arc_path,
    disk_region,
    geodesic_tail_length,
    mobius_geodesic,
    quasihyperbolic_distance,
)
from holder_metrics.geometry.riemann_sphere import (
    chordal_array,
    inverse_stereographic,
    spherical_distance,
    spherical_distance_by_paths,
    spherical_from_chordal,
)
from holder_metrics.schemas import HardyEstimate, HolderEstimate, InvariantResult, RunParameters

logger = logging.getLogger(__name__)

ACCEPTANCE_DEPTH = 16
SECTOR_TOL = 0.05
CROSS_TOL = 0.1
HARDY_REL_TOL = 0.05
RATIO_REL_TOL = 0.01
SHARP_TOL = 0.1
ORACLE_TOL = 1e-6
INEQUALITY_SLACK = 1e-12
GEODESIC_POLYLINE_TOL = 2e-3
QH_ORACLE_TOL = 0.02
QH_ORACLE_POINTS = (0.5, 0.9, 0.99)
STRIP_ALPHAS = (1.0, 0.5)
EQUIVALENCE_DOMAINS = ('sector:1.5708', 'sector:3.1416', 'sector:6.2832', 'strip')


def _sphere_points(n: int, rng: np.random.Generator) -> np.ndarray:
    p = rng.normal(size=(n, 3))
    p /= np.linalg.norm(p, axis=1)[:, None]
    return inverse_stereographic(p)


def _sector_theta(domain: DomainSpec) -> Optional[float]:
    return domain.map.params.get('theta')


def _is_plain_sector(domain: DomainSpec) -> bool:
    params = domain.map.params
    return 'theta' in params and params.get('offset_re', 0.0) == 0.0 and params.get('offset_im', 0.0) == 0.0


# ----------------------------------------------------------------------------
# Metric and catalog checks
# ----------------------------------------------------------------------------

def check_metric_sandwich(n_pairs: int = 100000, seed: int = 0) -> InvariantResult:
    """χ <= σ <= (π/2)χ on random pairs of the sphere"""
    rng = np.random.default_rng(seed)
    z, w = _sphere_points(n_pairs, rng), _sphere_points(n_pairs, rng)
    chi = chordal_array(z, w)
    sigma = spherical_from_chordal(chi)
    lower = float(np.min(sigma - chi))
    upper = float(np.min(0.5 * math.pi * chi * (1.0 + 1e-15) - sigma))
    return InvariantResult(name='metric_sandwich', passed=lower >= 0.0 and upper >= 0.0,
                           slack=min(lower, upper), detail=f"{n_pairs} pairs")


def check_path_oracle(n_pairs: int = 1000, seed: int = 0, n_vertices: int = 2048) -> InvariantResult:
    """Closed-form σ against the spherical length of a refined great-circle path"""
    rng = np.random.default_rng(seed)
    z, w = _sphere_points(n_pairs, rng), _sphere_points(n_pairs, rng)
    worst = 0.0
    for a, b in zip(z, w):
        by_path = spherical_distance_by_paths(complex(a), complex(b), n_vertices).value
        worst = max(worst, abs(by_path - spherical_distance(complex(a), complex(b))))
    return InvariantResult(name='path_oracle', passed=worst <= ORACLE_TOL, slack=ORACLE_TOL - worst,
                           detail=f"largest gap {worst:.3g} over {n_pairs} pairs")


def check_arc_chord(n_pairs: int = 10000, seed: int = 0, n_vertices: int = 256) -> InvariantResult:
    """|x − y| <= l(C_xy) <= (π/2)|x − y| for the shorter arc C_xy of random circles"""
    rng = np.random.default_rng(seed)
    lower, upper = math.inf, math.inf
    for _ in range(n_pairs):
        center = complex(*rng.normal(size=2))
        radius = 10.0 ** rng.uniform(-3.0, 2.0)
        phi0 = rng.uniform(0.0, 2.0 * math.pi)
        phi1 = phi0 + rng.uniform(-math.pi, math.pi)
        if phi1 == phi0:
            continue
        arc = circle_arc_path(center, radius, phi0, phi1, n_vertices)
        pts = arc.points()
        chord = abs(pts[-1] - pts[0])
        length = arc.euclidean_length()
        lower = min(lower, (length - chord) / chord)
        upper = min(upper, (0.5 * math.pi * chord - length) / chord)
    slack = min(lower, upper)
    return InvariantResult(name='arc_chord', passed=slack >= -INEQUALITY_SLACK, slack=slack,
                           detail=f"relative slacks {lower:.3g} (chord) and {upper:.3g} (π/2·chord) over {n_pairs} arcs")


def check_geodesic_tails(n_points: int = 1000, seed: int = 0, n_vertices: int = 256) -> InvariantResult:
    """1 − |z| <= l(Γ) <= (π/2)(1 − |z|) for the shorter tail Γ from z along non-radial geodesics"""
    rng = np.random.default_rng(seed)
    worst, gap = math.inf, 0.0
    for _ in range(n_points):
        a = complex(0.9 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform()))
        phi = rng.uniform(0.0, 2.0 * math.pi)
        z, tail = geodesic_tail_length(a, phi, 0.0)
        d = 1.0 - abs(z)
        worst = min(worst, (tail - d) / d, (0.5 * math.pi * d - tail) / d)
        # the polyline through the same geodesic, split at z
        pts = mobius_geodesic(a, phi, n_vertices).points()
        split = int(np.argmin(np.abs(pts - z)))
        pieces = np.abs(np.diff(pts))
        by_polyline = min(float(np.sum(pieces[:split])), float(np.sum(pieces[split:])))
        gap = max(gap, abs(by_polyline - tail) / tail)
    passed = worst >= -INEQUALITY_SLACK and gap <= GEODESIC_POLYLINE_TOL
    return InvariantResult(name='geodesic_tails', passed=passed, slack=worst,
                           detail=f"smallest relative slack {worst:.3g}, polyline gap {gap:.3g} over {n_points} points")


def check_koebe_sandwiches(domain: DomainSpec, n_points: int = 10000, seed: int = 0) -> InvariantResult:
    """Distortion, derivative and boundary-distance bounds of univalent maps"""
    z = sample_disk(n_points, seed)
    slacks = {
        'distortion': koebe_distortion_slack(domain.map, z),
        'derivative': koebe_derivative_slack(domain.map, z),
        'boundary_distance': boundary_distance_slack(domain, z),
    }
    worst = min(slacks.values())
    detail = ', '.join(f"{k} {v:.3g}" for k, v in slacks.items())
    return InvariantResult(name=f"koebe_sandwiches[{domain.name}]", passed=worst >= -INEQUALITY_SLACK,
                           slack=worst, detail=detail)


# ----------------------------------------------------------------------------
# Hölder and Hardy checks
# ----------------------------------------------------------------------------

def check_alpha_reproduction(domain: DomainSpec, holder: HolderEstimate) -> InvariantResult:
    name = f"alpha_reproduction[{domain.name}]"
    if domain.known_alpha is None:
        return InvariantResult(name=name, passed=holder.alpha_hat is None,
                               detail=f"expected no α, got {holder.alpha_hat}")
    if holder.alpha_hat is None:
        return InvariantResult(name=name, passed=False, detail=f"expected α = {domain.known_alpha:.4f}, got none")
    gap = abs(holder.alpha_hat - domain.known_alpha)
    return InvariantResult(name=name, passed=gap <= SECTOR_TOL, slack=SECTOR_TOL - gap,
                           uncertainty=holder.alpha_uncertainty,
                           detail=f"α̂ = {holder.alpha_hat:.4f}, known {domain.known_alpha:.4f}")


def check_cross_characterization(domain: DomainSpec, holder: HolderEstimate, alpha_growth: Optional[float]) -> InvariantResult:
    name = f"cross_characterization[{domain.name}]"
    if holder.alpha_hat is None or alpha_growth is None:
        agree = holder.alpha_hat is None and alpha_growth is None
        return InvariantResult(name=name, passed=agree,
                               detail=f"scan {holder.alpha_hat}, growth {alpha_growth}")
    gap = abs(holder.alpha_hat - alpha_growth)
    return InvariantResult(name=name, passed=gap <= CROSS_TOL, slack=CROSS_TOL - gap,
                           detail=f"scan {holder.alpha_hat:.4f}, growth {alpha_growth:.4f}")


def check_hardy_reproduction(domain: DomainSpec, hardy: HardyEstimate) -> InvariantResult:
    name = f"hardy_reproduction[{domain.name}]"
    known = domain.known_hardy
    if not math.isfinite(known):
        return InvariantResult(name=name, passed=not hardy.finite, detail=f"flagged finite: {hardy.finite}")
    if hardy.h_hat is None:
        return InvariantResult(name=name, passed=False, detail="no ĥ")
    rel = abs(hardy.h_hat - known) / known
    slack = HARDY_REL_TOL - rel
    detail = f"ĥ = {hardy.h_hat:.4f}, known {known:.4f}"
    if _is_plain_sector(domain):
        worst = max((abs(row.ratio - known) / known for row in hardy.ratios), default=0.0)
        slack = min(slack, RATIO_REL_TOL - worst)
        detail += f", worst per-radius gap {100.0 * worst:.3f}%"
    return InvariantResult(name=name, passed=slack >= 0.0, slack=slack,
                           uncertainty=hardy.uncertainty, detail=detail)


def check_sharp_bound(domain: DomainSpec, holder: HolderEstimate, hardy: HardyEstimate) -> InvariantResult:
    """ĥ <= 1/α̂ everywhere; close to equality for sectors of opening at most π"""
    name = f"sharp_bound[{domain.name}]"
    if holder.alpha_hat is None:
        return InvariantResult(name=name, passed=True, detail="skipped: no α̂")
    verdict = verify_hardy_bound(domain, holder, hardy)
    passed = verdict.passed
    detail = f"ĥ = {verdict.h_hat}, 1/α̂ = {verdict.bound:.4f}"
    theta = _sector_theta(domain)
    if passed and theta is not None and theta <= math.pi * (1.0 + 1e-12):
        passed = abs(verdict.slack) < SHARP_TOL + verdict.uncertainty
        detail += f", sharpness gap {verdict.slack:.4f}"
    return InvariantResult(name=name, passed=passed, slack=verdict.slack,
                           uncertainty=verdict.uncertainty, detail=detail)


def check_strip_control(domain: DomainSpec, holder: HolderEstimate, hardy: HardyEstimate,
                        depth: int, alphas: Sequence[float] = STRIP_ALPHAS) -> InvariantResult:
    """No α, a non-finite Hardy number, and all three geodesic constants growing
    under depth doubling at every trial α"""
    diverging = True
    parts = []
    for alpha in alphas:
        shallow = check_geodesic_conditions(domain, 0.0, alpha, depth // 2)
        deep = check_geodesic_conditions(domain, 0.0, alpha, depth)
        for label in ('C1', 'C2', 'C3'):
            before, after = getattr(shallow, label), getattr(deep, label)
            diverging = diverging and constant_diverges(before, after)
            parts.append(f"α={alpha:g} {label} {before:.4g} → {after:.4g}")
    passed = holder.alpha_hat is None and not hardy.finite and diverging
    return InvariantResult(
        name=f"negative_control[{domain.name}]",
        passed=passed,
        detail=f"α̂ {holder.alpha_hat}, Hardy finite {hardy.finite}, " + ', '.join(parts),
    )


def check_affine_invariance(domain: DomainSpec, hardy: HardyEstimate, base: DomainSpec,
                            base_hardy: HardyEstimate) -> InvariantResult:
    """A translated sector has the Hardy number of the sector itself"""
    name = f"affine_invariance[{domain.name}]"
    if hardy.h_hat is None or base_hardy.h_hat is None:
        return InvariantResult(name=name, passed=False,
                               detail=f"ĥ {hardy.h_hat} for {domain.name}, {base_hardy.h_hat} for {base.name}")
    rel = abs(hardy.h_hat - base_hardy.h_hat) / base_hardy.h_hat
    return InvariantResult(name=name, passed=rel <= HARDY_REL_TOL, slack=HARDY_REL_TOL - rel,
                           uncertainty=hardy.uncertainty + base_hardy.uncertainty,
                           detail=f"ĥ = {hardy.h_hat:.4f}, {base.name} ĥ = {base_hardy.h_hat:.4f}")


def check_known_forward_constant(domain: DomainSpec, holder: HolderEstimate, n_pairs: int,
                                 seed: int) -> InvariantResult:
    """M̂ of the scan against 90·K̂·(1 + dist(0, ℂ∖D)), K̂ sampled at the known α"""
    name = f"forward_constant[{domain.name}]"
    if domain.known_alpha is None:
        return InvariantResult(name=name, passed=True, detail="skipped: no known α")
    K_hat = check_holder_pairs(domain, domain.known_alpha, n_pairs, seed)
    result = check_forward_constant(domain, holder.M_hat, K_hat)
    result.detail = f"M̂ = {holder.M_hat.value:.4g}, K̂ = {K_hat.value:.4g} at α = {domain.known_alpha:.4f}"
    return result


# ----------------------------------------------------------------------------
# Quasi-hyperbolic and reduction checks
# ----------------------------------------------------------------------------

def check_qh_oracle(refinement: int, points: Sequence[float] = QH_ORACLE_POINTS) -> InvariantResult:
    """k_𝔻(0, x) against log(1/(1−x))"""
    region = disk_region()
    worst, parts = 0.0, []
    for x in points:
        exact = math.log(1.0 / (1.0 - x))
        got = quasihyperbolic_distance(region, 0.0, x, refinement).value
        rel = abs(got - exact) / exact
        worst = max(worst, rel)
        parts.append(f"x={x:g}: {got:.5f} vs {exact:.5f}")
    return InvariantResult(name='qh_disk_oracle', passed=worst <= QH_ORACLE_TOL, slack=QH_ORACLE_TOL - worst,
                           detail='; '.join(parts))


def check_density(reduction: ReductionSpec, depth: int) -> InvariantResult:
    density = check_density_bound(reduction, depth)
    return InvariantResult(name=f"density_bound[{reduction.source.name}]", passed=density.passed,
                           slack=density.minimum.value - DENSITY_FLOOR, uncertainty=density.minimum.uncertainty,
                           detail=f"min λδ = {density.minimum.value:.4g} over {density.n_points} points")


def check_comparability(reduction: ReductionSpec, n_samples: int, seed: int, depth: int,
                        mesh: float) -> InvariantResult:
    comp = check_distance_comparability(reduction, n_samples, seed, depth, mesh)
    positive = 0.0 < comp.c1.value <= comp.c2.value < math.inf
    lo, hi = comp.bounds
    return InvariantResult(
        name=f"distance_comparability[{reduction.source.name}]",
        passed=positive and comp.envelope_ok,
        slack=min(comp.fraction_min - lo, hi - comp.fraction_max),
        detail=(f"ratios in [{comp.c1.value:.4g}, {comp.c2.value:.4g}], "
                f"fraction in [{comp.fraction_min:.4g}, {comp.fraction_max:.4g}] ⊂ [{lo:.4g}, {hi:.4g}]"),
    )


def fingerprint(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def check_determinism(first: str, second: str) -> InvariantResult:
    """Two renders of the same run agree byte for byte"""
    return InvariantResult(name='determinism', passed=first == second,
                           detail=f"{len(first)} bytes, fingerprints {fingerprint(first)} and {fingerprint(second)}")


class VerificationSuite:
    """Runs the acceptance checks with shared per-domain estimates"""

    def __init__(self, params: RunParameters,
                 render: Optional[Callable[[List[InvariantResult]], str]] = None):
        self.params = params
        self.render = render
        self.scan_depth = max(params.depth, ACCEPTANCE_DEPTH)
        self._domains: Dict[str, DomainSpec] = {}
        self._holder: Dict[str, HolderEstimate] = {}
        self._growth: Dict[str, Optional[float]] = {}
        self._hardy: Dict[str, HardyEstimate] = {}
        self._reduction: Dict[str, ReductionSpec] = {}

    def domain(self, name: str) -> DomainSpec:
        if name not in self._domains:
            self._domains[name] = resolve_domain(name)
        return self._domains[name]

    def holder(self, domain: DomainSpec) -> HolderEstimate:
        if domain.name not in self._holder:
            self._holder[domain.name] = scan_spherical_derivative(domain, self.scan_depth)
        return self._holder[domain.name]

    def base_sector(self, domain: DomainSpec) -> DomainSpec:
        return self.domain(make_translated_sector(_sector_theta(domain)).name)

    def alpha_growth(self, domain: DomainSpec) -> Optional[float]:
        if domain.name not in self._growth:
            fit = estimate_alpha_from_growth(domain, self.scan_depth, self.params.mesh)
            self._growth[domain.name] = fit.alpha_hat
        return self._growth[domain.name]

    def hardy(self, domain: DomainSpec) -> HardyEstimate:
        if domain.name not in self._hardy:
            self._hardy[domain.name] = estimate_hardy(domain, n_rays=self.params.n_rays,
                                                      depth=self.params.bisection_depth,
                                                      ceiling=self.params.hardy_ceiling)
        return self._hardy[domain.name]

    def reduction(self, domain: DomainSpec) -> ReductionSpec:
        if domain.name not in self._reduction:
            self._reduction[domain.name] = build_reduction(domain, self.params.mesh)
        return self._reduction[domain.name]

    def equivalence(self, domain: DomainSpec) -> InvariantResult:
        p = self.params
        verdict = check_equivalence(domain, self.scan_depth, p.qh_depth, p.mesh, p.seed,
                                    holder=self.holder(domain), reduction=self.reduction(domain))
        # an unclassified c2 is no contradiction; an unresolved grid is a failure
        passed = bool(verdict.passed) or verdict.inconclusive
        detail = f"Hölder {verdict.holder}, quasi-hyperbolic {verdict.qh}, c2 {verdict.fit.c2_by_depth}"
        if verdict.note:
            detail += f", {verdict.note}"
        return InvariantResult(name=f"equivalence[{domain.name}]", passed=passed, detail=detail)

    def _guarded(self, name: str, check: Callable[[], InvariantResult]) -> InvariantResult:
        try:
            return check()
        except HolderMetricsError as e:
            logger.error(f"{name}: {str(e)}")
            return InvariantResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}")

    def domain_checks(self, domain: DomainSpec) -> List[InvariantResult]:
        p = self.params
        n = domain.name
        results = [
            self._guarded(f"koebe_sandwiches[{n}]", lambda: check_koebe_sandwiches(domain, min(p.samples, 10000), p.seed)),
            self._guarded(f"alpha_reproduction[{n}]", lambda: check_alpha_reproduction(domain, self.holder(domain))),
            self._guarded(f"cross_characterization[{n}]",
                          lambda: check_cross_characterization(domain, self.holder(domain), self.alpha_growth(domain))),
        ]
        results.append(self._guarded(f"hardy_reproduction[{n}]",
                                     lambda: check_hardy_reproduction(domain, self.hardy(domain))))
        if _sector_theta(domain) is not None and not _is_plain_sector(domain):
            results.append(self._guarded(f"affine_invariance[{n}]", lambda: check_affine_invariance(
                domain, self.hardy(domain), self.base_sector(domain), self.hardy(self.base_sector(domain)))))
        results += [
            self._guarded(f"forward_constant[{n}]",
                          lambda: check_known_forward_constant(domain, self.holder(domain), p.samples, p.seed)),
            self._guarded(f"sharp_bound[{n}]", lambda: check_sharp_bound(domain, self.holder(domain), self.hardy(domain))),
            self._guarded(f"density_bound[{n}]", lambda: check_density(self.reduction(domain), p.depth)),
            self._guarded(f"distance_comparability[{n}]",
                          lambda: check_comparability(self.reduction(domain), p.samples, p.seed, p.depth, p.mesh)),
        ]
        if domain.known_alpha is None:
            results.append(self._guarded(f"negative_control[{n}]", lambda: check_strip_control(
                domain, self.holder(domain), self.hardy(domain), p.depth)))
        return results

    def run_domain(self, name: str) -> List[InvariantResult]:
        domain = self.domain(name)
        results = self.domain_checks(domain)
        results.append(self._guarded(f"equivalence[{domain.name}]", lambda: self.equivalence(domain)))
        return results

    def run_all(self) -> List[InvariantResult]:
        p = self.params
        results = [
            self._guarded('metric_sandwich', lambda: check_metric_sandwich(p.samples, p.seed)),
            self._guarded('path_oracle', lambda: check_path_oracle(1000, p.seed)),
            self._guarded('arc_chord', lambda: check_arc_chord(10000, p.seed)),
            self._guarded('geodesic_tails', lambda: check_geodesic_tails(1000, p.seed)),
        ]
        for name in catalog_names():
            results.extend(self.domain_checks(self.domain(name)))
        results.append(self._guarded('qh_disk_oracle', lambda: check_qh_oracle(p.qh_depth)))
        for name in EQUIVALENCE_DOMAINS:
            domain = self.domain(name)
            results.append(self._guarded(f"equivalence[{name}]", lambda: self.equivalence(domain)))
        if self.render is not None:
            results.append(self._guarded('determinism', lambda: self.determinism(results)))
        return results

    def determinism(self, results: List[InvariantResult]) -> InvariantResult:
        """Render this run against a fresh repeat of the whole suite"""
        repeat = VerificationSuite(self.params).run_all()
        return check_determinism(self.render(results), self.render(repeat))


def summarize(results: List[InvariantResult]) -> str:
    lines = []
    for result in results:
        status = "✓ PASS" if result.passed else "✗ FAIL"
        lines.append(f"{status}: {result.name}" + (f" ({result.detail})" if result.detail else ''))
    passed = sum(1 for r in results if r.passed)
    lines.append(f"Total: {passed}/{len(results)} checks passed")
    return '\n'.join(lines) + '\n'
