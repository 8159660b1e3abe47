"""Command-line front end: holder-metrics <command> <domain> [flags]"""
import argparse
import dataclasses
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from holder_metrics import __version__
from holder_metrics.analyzers.bounded_reduction import ReductionAnalyzer
from holder_metrics.analyzers.hardy_estimator import HardyEstimator
from holder_metrics.analyzers.holder_analyzer import HolderAnalyzer, check_forward_constant, scan_spherical_derivative
from holder_metrics.catalog import list_catalog, resolve_domain
from holder_metrics.config import Config, load_overrides
from holder_metrics.exceptions import BadFlag, HolderMetricsError, UnknownDomain
from holder_metrics.report import render, render_catalog, write_report
from holder_metrics.schemas import AnalysisReport, InvariantResult, RunParameters
from holder_metrics.verification import VerificationSuite, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--depth', type=int, help=f"annulus / radial depth (default {Config.DEPTH})")
    parser.add_argument('--samples', type=int, help=f"random samples per check (default {Config.SAMPLES})")
    parser.add_argument('--seed', type=int, help=f"random seed (default {Config.SEED})")
    parser.add_argument('--mesh', type=float, help=f"chordal mesh of boundary nets (default {Config.MESH})")
    parser.add_argument('--tol', type=float, help="fit tolerance for the α fits (default per check)")
    parser.add_argument('--qh-depth', dest='qh_depth', type=int,
                        help=f"quasi-hyperbolic grid refinement (default {Config.QH_DEPTH})")
    parser.add_argument('--n-rays', dest='n_rays', type=int, help=f"rays for the Hardy number (default {Config.N_RAYS})")
    parser.add_argument('--bisection-depth', dest='bisection_depth', type=int,
                        help=f"bisection steps per crossing (default {Config.BISECTION_DEPTH})")
    parser.add_argument('--hardy-ceiling', dest='hardy_ceiling', type=float,
                        help=f"ratio above which growth means a non-finite Hardy number (default {Config.HARDY_CEILING})")
    parser.add_argument('--format', choices=['json', 'csv'], help=f"report format (default {Config.FORMAT})")
    parser.add_argument('--out', help="write the report to this path instead of stdout")
    parser.add_argument('--config', help="key=value file overriding flag defaults")
    parser.add_argument('-v', '--verbose', action='count', default=0, help="more logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='holder-metrics',
                                     description="Hölder exponents, Hardy numbers and bounded reductions of unbounded domains")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', required=True)

    catalog = commands.add_parser('catalog', help="list catalog domains")
    catalog.add_argument('filter', nargs='?', help="substring of the domain name")
    catalog.add_argument('--format', choices=['json', 'csv'])
    catalog.add_argument('--out')
    catalog.add_argument('-v', '--verbose', action='count', default=0)

    for name, text in (('analyze', "Hölder exponent and constants"),
                       ('hardy', "Hardy number, integral means and the sharp bound"),
                       ('reduce', "bounded reduction checks")):
        sub = commands.add_parser(name, help=text)
        sub.add_argument('domain', help="catalog name, e.g. sector:1.5708 or strip")
        _add_run_flags(sub)

    verify = commands.add_parser('verify', help="run the acceptance suite")
    verify.add_argument('domain', help="catalog name or 'all'")
    _add_run_flags(verify)
    return parser


def _positive(name: str, value: Any, minimum: float = 0.0, strict: bool = True):
    if value is None:
        return
    if (strict and not value > minimum) or (not strict and value < minimum):
        raise BadFlag(f"--{name.replace('_', '-')} must be {'>' if strict else '>='} {minimum:g}, got {value}")


def resolve_params(args: argparse.Namespace) -> RunParameters:
    """Defaults (environment) < config file < explicit flags"""
    merged: Dict[str, Any] = Config.defaults()
    merged.update(load_overrides(getattr(args, 'config', None)))
    for key in list(merged) + ['out']:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    out = merged.pop('out', None)

    _positive('depth', merged['depth'], 4, strict=False)
    _positive('samples', merged['samples'], 1, strict=False)
    _positive('mesh', merged['mesh'])
    _positive('qh_depth', merged['qh_depth'], 1, strict=False)
    _positive('n_rays', merged['n_rays'], 64, strict=False)
    _positive('bisection_depth', merged['bisection_depth'], 1, strict=False)
    _positive('hardy_ceiling', merged['hardy_ceiling'])
    _positive('tol', merged['tol'])
    try:
        params = RunParameters(command=args.command, domain=args.domain, **merged)
    except ValidationError as e:
        raise BadFlag(f"Invalid parameters: {e.errors()[0]['msg']}")
    args.out = out
    return params


def _fit_tolerance(params: RunParameters) -> float:
    return params.tol if params.tol is not None else Config.FIT_TOLERANCE


def build_report(params: RunParameters) -> AnalysisReport:
    """Run one analysis command and collect its report"""
    domain = resolve_domain(params.domain)
    report = AnalysisReport(domain=domain.name, params=params, version=__version__)
    tol = _fit_tolerance(params)

    if params.command == 'analyze':
        holder = HolderAnalyzer(domain, params.depth, params.samples, params.seed, params.mesh,
                                fit_tolerance=tol).analyze()
        report.holder = holder
        if holder.K_hat is not None:
            report.invariants.append(check_forward_constant(domain, holder.M_hat, holder.K_hat))
    elif params.command == 'hardy':
        holder = scan_spherical_derivative(domain, params.depth, tol)
        estimator = HardyEstimator(domain, params.n_rays, params.bisection_depth, params.hardy_ceiling,
                                   mesh=params.mesh)
        report.holder = holder
        report.hardy = estimator.analyze()
        report.hardy_bound = estimator.bound(holder, report.hardy)
    elif params.command == 'reduce':
        holder = scan_spherical_derivative(domain, params.depth, tol)
        analyzer = ReductionAnalyzer(domain, params.depth, params.samples, params.seed, params.mesh,
                                     params.qh_depth, holder=holder)
        report.holder = holder
        report.reduction = analyzer.analyze()
        report.invariants.extend(analyzer.invariants)
    else:
        raise BadFlag(f"Unknown command: {params.command}")
    return report


def verify_report(name: str, params: RunParameters, results: List[InvariantResult]) -> AnalysisReport:
    return AnalysisReport(domain=name, params=params, invariants=results, version=__version__)


def run_verify(params: RunParameters) -> AnalysisReport:
    if params.domain == 'all':
        suite = VerificationSuite(params, render=lambda results: render(verify_report('all', params, results),
                                                                        params.format))
        results = suite.run_all()
        name = 'all'
    else:
        name = resolve_domain(params.domain).name
        results = VerificationSuite(params).run_domain(params.domain)
    sys.stderr.write(summarize(results))
    return verify_report(name, params, results)


def run_catalog(args: argparse.Namespace) -> int:
    entries = [dataclasses.asdict(e) for e in list_catalog(args.filter)]
    text = render_catalog(entries, args.format or Config.FORMAT)
    _emit(text, args.out)
    return EXIT_OK


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _configure_logging(verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, Config.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == 'catalog':
            return run_catalog(args)
        params = resolve_params(args)
        if params.command == 'verify':
            report = run_verify(params)
            code = EXIT_OK if all(r.passed for r in report.invariants) else EXIT_FAILED
        else:
            report = build_report(params)
            code = EXIT_OK
        text = write_report(report, params.format, args.out)
        if not args.out:
            sys.stdout.write(text)
        return code
    except (UnknownDomain, BadFlag) as e:
        logger.error(str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except HolderMetricsError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        sys.stderr.write(f"numerical error: {type(e).__name__}: {e}\n")
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
