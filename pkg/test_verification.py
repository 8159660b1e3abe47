import pytest

from holder_metrics import verification
from holder_metrics.catalog import resolve_domain
from holder_metrics.exceptions import NoCrossing
from holder_metrics.schemas import HardyEstimate, HolderEstimate, InvariantResult, Measured, RunParameters
from holder_metrics.verification import (
    VerificationSuite,
    check_affine_invariance,
    check_alpha_reproduction,
    check_arc_chord,
    check_cross_characterization,
    check_determinism,
    check_geodesic_tails,
    check_hardy_reproduction,
    check_known_forward_constant,
    check_koebe_sandwiches,
    check_metric_sandwich,
    check_path_oracle,
    check_qh_oracle,
    check_strip_control,
    fingerprint,
    summarize,
)


def _holder(alpha):
    return HolderEstimate(alpha_hat=alpha, raw_slope=1.0 - (alpha or 0.0), M_hat=Measured(value=1.0), depth=14)


def _params(**overrides):
    values = dict(command='verify', domain='all', depth=8, samples=500, seed=0, mesh=1e-3,
                  qh_depth=4, n_rays=64, bisection_depth=48, hardy_ceiling=10.0)
    values.update(overrides)
    return RunParameters(**values)


def test_metric_sandwich():
    result = check_metric_sandwich(5000, seed=1)
    assert result.passed
    assert result.slack >= -1e-12


def test_path_oracle():
    result = check_path_oracle(20, seed=2)
    assert result.passed, result.detail


def test_koebe_sandwiches_on_koebe():
    assert check_koebe_sandwiches(resolve_domain('koebe'), 2000).passed


def test_qh_disk_oracle():
    result = check_qh_oracle(5)
    assert result.passed, result.detail


def test_alpha_reproduction_verdicts():
    quarter = resolve_domain('sector:1.5708')
    assert check_alpha_reproduction(quarter, _holder(0.52)).passed
    assert not check_alpha_reproduction(quarter, _holder(0.7)).passed
    strip = resolve_domain('strip')
    assert check_alpha_reproduction(strip, _holder(None)).passed
    assert not check_alpha_reproduction(strip, _holder(0.3)).passed


def test_cross_characterization_verdicts():
    quarter = resolve_domain('sector:1.5708')
    assert check_cross_characterization(quarter, _holder(0.5), 0.55).passed
    assert not check_cross_characterization(quarter, _holder(0.5), 0.8).passed


def test_hardy_reproduction_verdicts():
    quarter = resolve_domain('sector:1.5708')
    assert check_hardy_reproduction(quarter, HardyEstimate(h_hat=2.02)).passed
    assert not check_hardy_reproduction(quarter, HardyEstimate(h_hat=2.5)).passed
    strip = resolve_domain('strip')
    assert check_hardy_reproduction(strip, HardyEstimate(h_hat=None, finite=False)).passed


def test_determinism_compares_renders():
    assert check_determinism('{"a": 1}', '{"a": 1}').passed
    result = check_determinism('{"a": 1}', '{"a": 2}')
    assert not result.passed
    assert fingerprint('{"a": 2}') in result.detail
    assert len(fingerprint('x')) == 16


def test_guarded_checks_turn_errors_into_failures():
    suite = VerificationSuite(_params())

    def boom():
        raise NoCrossing("no crossing")

    result = suite._guarded('boom', boom)
    assert not result.passed
    assert 'NoCrossing' in result.detail


def test_suite_scans_at_acceptance_depth():
    assert VerificationSuite(_params(depth=8)).scan_depth == 16
    assert VerificationSuite(_params(depth=18)).scan_depth == 18


def test_summary_lines():
    text = summarize([InvariantResult(name='a', passed=True), InvariantResult(name='b', passed=False, detail='why')])
    assert text.splitlines() == ['✓ PASS: a', '✗ FAIL: b (why)', 'Total: 1/2 checks passed']


@pytest.mark.slow
def test_quarter_plane_domain_checks():
    results = VerificationSuite(_params(domain='sector:1.5708', samples=2000, qh_depth=6)).run_domain('sector:1.5708')
    failed = [r.name for r in results if not r.passed]
    assert not failed, failed
    assert any(r.name.startswith('hardy_reproduction') for r in results)
    assert not any(r.name.startswith('negative_control') for r in results)


def test_arc_chord_bounds():
    result = check_arc_chord(500, seed=3)
    assert result.passed, result.detail
    assert result.slack >= -1e-12


def test_geodesic_tail_bounds_and_polyline_agreement():
    result = check_geodesic_tails(60, seed=5)
    assert result.passed, result.detail


def test_affine_invariance_verdicts():
    offset = resolve_domain('sector:1.5708:offset=-5,0')
    base = resolve_domain('sector:1.5708')
    assert check_affine_invariance(offset, HardyEstimate(h_hat=2.01), base, HardyEstimate(h_hat=2.0)).passed
    assert not check_affine_invariance(offset, HardyEstimate(h_hat=2.4), base, HardyEstimate(h_hat=2.0)).passed
    assert not check_affine_invariance(offset, HardyEstimate(h_hat=None, finite=False), base,
                                       HardyEstimate(h_hat=2.0)).passed


def test_known_forward_constant_skips_domains_without_alpha():
    result = check_known_forward_constant(resolve_domain('strip'), _holder(None), 100, 0)
    assert result.passed
    assert result.detail.startswith('skipped')


def test_known_forward_constant_on_half_plane():
    domain = resolve_domain('sector:3.1416')
    holder = HolderEstimate(alpha_hat=1.0, raw_slope=0.0, M_hat=Measured(value=2.0), depth=12)
    result = check_known_forward_constant(domain, holder, 2000, 0)
    assert result.passed, result.detail
    assert 'α = 1.0000' in result.detail


@pytest.mark.slow
def test_strip_control_sweeps_alphas_and_all_constants():
    strip = resolve_domain('strip')
    result = check_strip_control(strip, _holder(None), HardyEstimate(h_hat=None, finite=False), 12)
    assert result.passed, result.detail
    for alpha in ('α=1', 'α=0.5'):
        for label in ('C1', 'C2', 'C3'):
            assert f"{alpha} {label}" in result.detail


@pytest.mark.slow
def test_offset_sector_matches_its_base_sector():
    suite = VerificationSuite(_params(samples=2000))
    offset = suite.domain('sector:1.5708:offset=-5,0')
    base = suite.base_sector(offset)
    assert base.name == 'sector:1.5708'
    assert suite.hardy(offset).h_hat == pytest.approx(suite.hardy(base).h_hat, rel=0.05)
    results = {r.name: r for r in suite.domain_checks(offset)}
    for name in ('hardy_reproduction', 'affine_invariance', 'alpha_reproduction', 'sharp_bound', 'forward_constant'):
        result = results[f"{name}[{offset.name}]"]
        assert result.passed, result.detail


@pytest.mark.slow
def test_equivalence_on_half_plane():
    suite = VerificationSuite(_params(domain='sector:3.1416', qh_depth=5))
    result = suite.equivalence(suite.domain('sector:3.1416'))
    assert result.passed, result.detail
    assert result.name == 'equivalence[sector:3.1416]'


def _stub_suite(monkeypatch):
    def passing(*args, **kwargs):
        return InvariantResult(name='stub', passed=True)

    for name in ('check_metric_sandwich', 'check_path_oracle', 'check_arc_chord', 'check_geodesic_tails',
                 'check_qh_oracle'):
        monkeypatch.setattr(verification, name, passing)
    monkeypatch.setattr(VerificationSuite, 'domain_checks', lambda self, domain: [passing()])
    monkeypatch.setattr(VerificationSuite, 'equivalence', lambda self, domain: passing())


def test_determinism_renders_two_full_runs(monkeypatch):
    _stub_suite(monkeypatch)
    renders = []

    def render(results):
        renders.append(len(results))
        return ','.join(r.name for r in results)

    results = VerificationSuite(_params(), render=render).run_all()
    assert results[-1].name == 'determinism'
    assert results[-1].passed, results[-1].detail
    # this run and its repeat, both without the determinism entry
    assert renders == [len(results) - 1, len(results) - 1]


def test_determinism_fails_when_renders_differ(monkeypatch):
    _stub_suite(monkeypatch)
    counter = iter(range(10))
    results = VerificationSuite(_params(), render=lambda results: str(next(counter))).run_all()
    assert not results[-1].passed
