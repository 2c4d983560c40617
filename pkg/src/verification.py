"""
Property ladders over the family catalog.

Each suite returns a dict with one entry per case and an overall ``passed``
flag; nothing here raises for a failed case.
"""

import logging
from typing import Dict, List

import numpy as np

import config
from src.complex_rational import Polynomial, RationalMap
from src.embedding import EmbeddingMap, boundary_pair_data
from src.families import FamilySpec, catalog_specs, make_f_r
from src.kernel import (boundary_path_metric, cross_path_limit, cross_path_metric, crossing_pick_feasible,
                        expansion_coefficients_check, extremal_value_by_bisection, kernel_diff_ladder,
                        metric_d)
from src.utils import random_disc_points

logger = logging.getLogger(__name__)

SUITES = ('expansion', 'path_metric', 'kernel_diff', 'duality', 'cross_path', 'crossing_pick')
LADDER_RADII = (0.3, 0.5, 0.7)


def _identity_disc() -> EmbeddingMap:
    return EmbeddingMap(1, 1.0, (RationalMap.from_polynomial(Polynomial.monomial(1)),))


def _expansion_suite(seed: int) -> List[Dict]:
    low, high = config.KERNEL_CONFIG['richardson_window']
    x = config.KERNEL_CONFIG['expansion_x']
    cases = []
    for r in LADDER_RADII:
        f = make_f_r(r)
        report = expansion_coefficients_check(f, boundary_pair_data(f, 1.0, -1.0), x)
        passed = True
        for side in ('plus', 'minus', 'mixed'):
            entry = report[side]
            ratio = entry['richardson_ratio']
            passed &= entry['within_bound'] and (entry['exact'] or (ratio is not None and low <= ratio <= high))
        cases.append({'map': f"f_r:r={r:g}", 'passed': bool(passed), 'report': report})

    disc = _identity_disc()
    report = expansion_coefficients_check(disc, boundary_pair_data(disc, 1.0, -1.0, require_crossing=False), x)
    cases.append({'map': 'identity', 'passed': bool(report['plus']['exact'] and report['minus']['exact']),
                  'report': report})
    return cases


def _path_metric_suite(seed: int) -> List[Dict]:
    ladder = config.KERNEL_CONFIG['path_ladder']
    ceiling = config.KERNEL_CONFIG['path_metric_ceiling']
    target = config.KERNEL_CONFIG['wrong_slope_target']
    window = config.KERNEL_CONFIG['wrong_slope_window']
    cases = []
    for r in LADDER_RADII:
        f = make_f_r(r)
        data = boundary_pair_data(f, 1.0, -1.0)
        values = [boundary_path_metric(f, data, t) for t in ladder]
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        at_1e4 = boundary_path_metric(f, data, 1e-4)
        wrong = boundary_path_metric(f, data, 1e-5, slope_factor=config.KERNEL_CONFIG['wrong_slope_factor'])
        cases.append({
            'map': f"f_r:r={r:g}",
            't': list(ladder),
            'values': values,
            'strictly_decreasing': decreasing,
            'value_at_1e-4': at_1e4,
            'wrong_slope_value': wrong,
            'wrong_slope_gap': abs(wrong - target),
            'passed': bool(decreasing and at_1e4 < ceiling and abs(wrong - target) <= window),
        })
    return cases


def _kernel_diff_suite(seed: int) -> List[Dict]:
    cases = []
    for r in LADDER_RADII:
        f = make_f_r(r)
        ladder = kernel_diff_ladder(f, boundary_pair_data(f, 1.0, -1.0))
        at_1e4 = ladder['values'][ladder['t'].index(1e-4)] if 1e-4 in ladder['t'] else ladder['values'][-1]
        passed = ladder['slack_halving'] and at_1e4 <= ladder['bound'] + 0.05
        cases.append({'map': f"f_r:r={r:g}", 'passed': bool(passed), 'ladder': ladder})
    return cases


def _duality_suite(seed: int, pairs: int = None, specs: List[FamilySpec] = None) -> List[Dict]:
    pairs = pairs or config.KERNEL_CONFIG['duality_pairs']
    tolerance = config.KERNEL_CONFIG['duality_tolerance']
    rng = np.random.default_rng(seed)
    cases = []
    for spec in specs or catalog_specs():
        f = spec.build()
        z = random_disc_points(rng, pairs, config.KERNEL_CONFIG['sample_radius'])
        w = random_disc_points(rng, pairs, config.KERNEL_CONFIG['sample_radius'])
        errors = [abs(extremal_value_by_bisection(f, a, b) - metric_d(f, a, b)) for a, b in zip(z, w)]
        worst = float(max(errors))
        cases.append({'map': spec.label(), 'pairs': pairs, 'max_error': worst, 'passed': worst <= tolerance})
    return cases


def _cross_path_suite(seed: int) -> List[Dict]:
    ladder = config.KERNEL_CONFIG['path_ladder']
    window = config.KERNEL_CONFIG['cross_path_window']
    cases = []
    for r, s in config.KERNEL_CONFIG['cross_path_pairs']:
        f, g = make_f_r(r), make_f_r(s)
        data = boundary_pair_data(f, 1.0, -1.0)
        limit = cross_path_limit(f, g, data)
        values = [cross_path_metric(f, g, data, t) for t in ladder]
        gaps = [abs(v - limit['limit']) for v in values]
        cases.append({
            'map': f"f_r:r={r:g} vs f_r:r={s:g}",
            't': list(ladder),
            'values': values,
            'limit': limit,
            'gaps': gaps,
            'passed': bool(gaps[-1] <= window and gaps[-1] < gaps[0]),
        })
    return cases


def _crossing_pick_suite(seed: int) -> List[Dict]:
    a, b = config.KERNEL_CONFIG['crossing_pick_targets']
    ladder = config.KERNEL_CONFIG['crossing_pick_ladder']
    cases = []
    for r in LADDER_RADII:
        f = make_f_r(r)
        data = boundary_pair_data(f, 1.0, -1.0)
        distinct = [crossing_pick_feasible(f, data, t, (a, b)) for t in ladder]
        equal = [crossing_pick_feasible(f, data, t, (a, a)) for t in ladder]
        cases.append({
            'map': f"f_r:r={r:g}",
            't': list(ladder),
            'targets': [a, b],
            'distinct_feasible': distinct,
            'equal_feasible': equal,
            'passed': bool(not any(distinct) and all(equal)),
        })
    return cases


_RUNNERS = {
    'expansion': _expansion_suite,
    'path_metric': _path_metric_suite,
    'kernel_diff': _kernel_diff_suite,
    'duality': _duality_suite,
    'cross_path': _cross_path_suite,
    'crossing_pick': _crossing_pick_suite,
}


def run_suite(name: str, seed: int = 0, **kwargs) -> Dict:
    """
    Run a named verification suite.

    Args:
        name: One of SUITES
        seed: Seed for randomized sampling

    Returns:
        {'suite', 'seed', 'cases', 'passed'}
    """
    if name not in _RUNNERS:
        raise KeyError(name)
    cases = _RUNNERS[name](seed, **kwargs)
    passed = all(case['passed'] for case in cases)
    failed = [case['map'] for case in cases if not case['passed']]
    if failed:
        logger.warning(f"Suite {name}: failing cases {failed}")
    else:
        logger.info(f"Suite {name}: all {len(cases)} cases passed")
    return {'suite': name, 'seed': seed, 'cases': cases, 'passed': passed}
