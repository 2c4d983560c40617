#!/usr/bin/env python3
"""
Main CLI application for the Disc Invariants toolkit.
"""

import argparse
import logging
import os
import sys
from typing import Dict, Tuple

# Add src directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

import config
from src.complex_rational import Moebius
from src.embedding import EmbeddingMap, precompose, validate
from src.exceptions import DiscInvariantError, PatternMismatch
from src.families import FamilySpec, catalog_specs, load_catalog
from src.invariants import (CANDIDATE_AUTOMORPHISMS, compare_patterns, find_self_crossings,
                            iso_candidates_two_point, ratio_tuples)
from src.kernel import extremal_value_by_bisection, metric_d, min_eigenvalue, pick_feasible, pick_matrix
from src.sweeps import run_sweep, write_sweep_csv
from src.utils import (dump_report, load_json_file, pair_to_complex, parse_complex, parse_complex_list,
                       parse_float_list, setup_logging)
from src.verification import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_VALIDATION_FAILED = 3

STATUS = {
    EXIT_OK: 'ok',
    EXIT_VERIFICATION_FAILED: 'verification_failed',
    EXIT_INPUT_ERROR: 'input_error',
    EXIT_VALIDATION_FAILED: 'validation_failed',
}


def make_report(command: str, inputs: Dict, results: Dict, evidence: Dict, code: int) -> Dict:
    return {
        'schema': config.OUTPUT_CONFIG['schema'],
        'command': command,
        'inputs': inputs,
        'results': results,
        'evidence': evidence,
        'status': STATUS[code],
    }


def resolve_map(source: str) -> Tuple[EmbeddingMap, Dict]:
    """Turn a family reference or a JSON file into an EmbeddingMap."""
    if os.path.isfile(source):
        data = load_json_file(source)
        if isinstance(data, dict) and 'kind' in data:
            spec = FamilySpec.from_json(data)
            return spec.build(), {'source': source, 'family': spec.to_dict()}
        return EmbeddingMap.from_json(data), {'source': source, 'map': data}
    spec = FamilySpec.parse(source)
    return spec.build(), {'source': source, 'family': spec.to_dict()}


def _validation_gate(f: EmbeddingMap, label: str, evidence: Dict) -> bool:
    report = validate(f)
    evidence[f'validation_{label}'] = report.to_dict()
    if not report.passed:
        logger.warning(f"Map {label} failed validation: {report.failed_checks()}")
    return report.passed


def cmd_validate(args) -> Tuple[Dict, int]:
    f, inputs = resolve_map(args.map)
    report = validate(f, args.grid_size)
    code = EXIT_OK if report.passed else EXIT_VALIDATION_FAILED
    if not report.passed:
        logger.warning(f"Validation failed: {report.failed_checks()}")
    results = {'passed': report.passed, 'failed_checks': report.failed_checks()}
    return make_report('validate', inputs, results, report.to_dict(), code), code


def cmd_crossings(args) -> Tuple[Dict, int]:
    f, inputs = resolve_map(args.map)
    evidence: Dict = {}
    valid = _validation_gate(f, 'map', evidence)
    pattern = find_self_crossings(f, args.samples)
    evidence['pattern'] = pattern.to_dict()
    results = {'classes': pattern.to_dict()['classes'], 'class_angles': pattern.to_dict()['class_angles'],
               'residuals': pattern.residuals}
    code = EXIT_OK if valid else EXIT_VALIDATION_FAILED
    return make_report('crossings', inputs, results, evidence, code), code


def cmd_invariants(args) -> Tuple[Dict, int]:
    f, inputs = resolve_map(args.map)
    evidence: Dict = {}
    valid = _validation_gate(f, 'map', evidence)
    pattern = find_self_crossings(f, args.samples)
    evidence['pattern'] = pattern.to_dict()
    results = {'classes': [rt.to_dict() for rt in ratio_tuples(f, pattern)]}
    code = EXIT_OK if valid else EXIT_VALIDATION_FAILED
    return make_report('invariants', inputs, results, evidence, code), code


def cmd_pick(args) -> Tuple[Dict, int]:
    f, inputs = resolve_map(args.map)
    if args.instance:
        data = load_json_file(args.instance)
        nodes = [pair_to_complex(z) for z in data.get('nodes', [])]
        targets = [pair_to_complex(a) for a in data.get('targets', [])]
    else:
        nodes, targets = parse_complex_list(args.nodes), parse_complex_list(args.targets)
    inst = pick_matrix(f, nodes, targets)
    inputs.update({'nodes': list(nodes), 'targets': list(targets)})
    results = {'feasible': pick_feasible(inst), 'min_eigenvalue': min_eigenvalue(inst.matrix)}
    return make_report('pick', inputs, results, {'instance': inst.to_dict()}, EXIT_OK), EXIT_OK


def cmd_metric(args) -> Tuple[Dict, int]:
    f, inputs = resolve_map(args.map)
    z, w = parse_complex(args.z), parse_complex(args.w)
    inputs.update({'z': z, 'w': w})
    d = metric_d(f, z, w)
    oracle = extremal_value_by_bisection(f, z, w)
    results = {'d': d, 'pick_extremal_value': oracle}
    return make_report('metric', inputs, results, {'oracle_gap': abs(d - oracle)}, EXIT_OK), EXIT_OK


def cmd_classify(args) -> Tuple[Dict, int]:
    f, inputs_a = resolve_map(args.map_a)
    g, inputs_b = resolve_map(args.map_b)
    composed = None
    if args.compose_a is not None or args.compose_lambda is not None:
        composed = Moebius(parse_complex(args.compose_lambda or '-1'), parse_complex(args.compose_a or '0'))
        g = precompose(g, composed)
        inputs_b['composed_with'] = composed.to_json()
    inputs = {'map_a': inputs_a, 'map_b': inputs_b}

    evidence: Dict = {}
    valid = _validation_gate(f, 'a', evidence) & _validation_gate(g, 'b', evidence)
    p_f, p_g = find_self_crossings(f, args.samples), find_self_crossings(g, args.samples)
    rt_f, rt_g = ratio_tuples(f, p_f), ratio_tuples(g, p_g)
    evidence['pattern_a'], evidence['pattern_b'] = p_f.to_dict(), p_g.to_dict()

    equality = compare_patterns(p_f, p_g, rt_f, rt_g, allow_automorphisms=False)
    isomorphism = compare_patterns(p_f, p_g, rt_f, rt_g)
    results = {'equality': equality.to_dict(), 'isomorphism': isomorphism.to_dict()}

    try:
        alpha_map, beta_map = iso_candidates_two_point(f, g, p_f, p_g)
        results['two_point_candidates'] = {
            'alpha': alpha_map.center.real, 'beta': beta_map.center.real,
            'mu_alpha': alpha_map.to_json(), 'mu_beta': beta_map.to_json(),
        }
    except PatternMismatch:
        results['two_point_candidates'] = None

    if composed is not None and isomorphism.kind == CANDIDATE_AUTOMORPHISMS:
        results['recovery_error'] = min(m.distance(composed) for m in isomorphism.candidates)

    code = EXIT_OK if valid else EXIT_VALIDATION_FAILED
    return make_report('classify', inputs, results, evidence, code), code


def cmd_verify(args) -> Tuple[Dict, int]:
    outcome = run_suite(args.suite, seed=args.seed)
    code = EXIT_OK if outcome['passed'] else EXIT_VERIFICATION_FAILED
    results = {'passed': outcome['passed'],
               'cases': [{'map': c['map'], 'passed': c['passed']} for c in outcome['cases']]}
    return make_report('verify', {'suite': args.suite, 'seed': args.seed}, results, outcome, code), code


def cmd_sweep(args) -> Tuple[Dict, int]:
    base = FamilySpec.parse(args.family)
    values = parse_float_list(args.values)
    frame = run_sweep(base, args.param, values, n_samples=args.samples)
    if args.out:
        write_sweep_csv(frame, args.out)
    inputs = {'family': base.to_dict(), 'param': args.param, 'values': values, 'out': args.out}
    results = {'rows': len(frame), 'ratio': [None if r != r else r for r in frame['ratio'].tolist()]}
    return make_report('sweep', inputs, results, {'table': frame.to_dict(orient='records')}, EXIT_OK), EXIT_OK


def cmd_families(args) -> Tuple[Dict, int]:
    catalog = load_catalog()
    results = {'families': [spec.label() for spec in catalog_specs()],
               'f_three_crossing': catalog['f_three_crossing']}
    return make_report('families', {}, results, {}, EXIT_OK), EXIT_OK


COMMANDS = {
    'validate': cmd_validate,
    'crossings': cmd_crossings,
    'invariants': cmd_invariants,
    'pick': cmd_pick,
    'metric': cmd_metric,
    'classify': cmd_classify,
    'verify': cmd_verify,
    'sweep': cmd_sweep,
    'families': cmd_families,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Isomorphism-obstruction invariants of analytic discs attached to the unit sphere",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py crossings f_r:r=0.5
  python main.py classify f_r:r=0.3 f_r:r=0.6
  python main.py verify duality --seed 0
  python main.py sweep f_three_crossing --param alpha --values 0.9,0.95,0.99 --out sweep.csv
        """
    )
    parser.add_argument('--seed', type=int, default=0, help='Seed for randomized sampling')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        default=config.LOGGING_CONFIG['level'], help='Logging level')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate', help='Check the analytic-disc axioms')
    p.add_argument('map', help='Family reference (kind:param=value,...) or JSON file')
    p.add_argument('--grid-size', type=int, default=config.VALIDATION_CONFIG['default_grid_size'])

    for name, text in (('crossings', 'Boundary self-crossing classes'),
                       ('invariants', 'Crossing classes with their A-value ratio tuples')):
        p = sub.add_parser(name, help=text)
        p.add_argument('map')
        p.add_argument('--samples', type=int, default=config.CROSSING_CONFIG['default_samples'])

    p = sub.add_parser('pick', help='Pick matrix feasibility')
    p.add_argument('map')
    p.add_argument('--nodes', type=str, default='', help='Comma-separated interior nodes')
    p.add_argument('--targets', type=str, default='', help='Comma-separated target values')
    p.add_argument('--instance', type=str, help='JSON file with "nodes" and "targets"')

    p = sub.add_parser('metric', help='Induced metric d_f with its Pick oracle')
    p.add_argument('map')
    p.add_argument('--z', type=str, required=True)
    p.add_argument('--w', type=str, required=True)

    p = sub.add_parser('classify', help='Compare two maps for isomorphism obstructions')
    p.add_argument('map_a')
    p.add_argument('map_b')
    p.add_argument('--compose-lambda', type=str, help='Precompose map_b with this Moebius (unimodular factor)')
    p.add_argument('--compose-a', type=str, help='Precompose map_b with this Moebius (center)')
    p.add_argument('--samples', type=int, default=config.CROSSING_CONFIG['default_samples'])

    p = sub.add_parser('verify', help='Run a verification suite over the catalog')
    p.add_argument('suite', choices=SUITES)

    p = sub.add_parser('sweep', help='Crossing data over a parameter grid')
    p.add_argument('family', help='Family reference with fixed parameters, e.g. f_three_crossing')
    p.add_argument('--param', type=str, required=True)
    p.add_argument('--values', type=str, default='', help='Comma-separated grid')
    p.add_argument('--out', type=str, help='CSV output path')
    p.add_argument('--samples', type=int, default=config.OUTPUT_CONFIG['sweep_samples'])

    sub.add_parser('families', help='List the family catalog')
    return parser


def run(argv=None) -> Tuple[Dict, int]:
    """Parse arguments and execute one command, mapping errors to exit codes."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except DiscInvariantError as e:
        logger.error(f"{args.command} failed: {e}")
        report = make_report(args.command, {'argv': list(argv) if argv is not None else sys.argv[1:]},
                             {}, e.to_dict(), EXIT_INPUT_ERROR)
        return report, EXIT_INPUT_ERROR


def main(argv=None) -> int:
    """Main application entry point."""
    try:
        report, code = run(argv)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_INPUT_ERROR
    print(dump_report(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
