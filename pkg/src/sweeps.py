import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Sequence

import pandas as pd

import config
from src.exceptions import MalformedInput
from src.families import FAMILY_PARAMS, FamilySpec
from src.invariants import find_self_crossings, ratio_tuples
from src.utils import angle_key

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['param', 'n_classes', 'class_sizes', 'points', 'a_values', 'ratio', 'ratio_tuple']


def sweep_specs(base: FamilySpec, param: str, values: Sequence[float]):
    """Build one spec per grid value; range errors surface before any computation."""
    if param not in FAMILY_PARAMS[base.kind]:
        raise MalformedInput(f"{base.kind} has no parameter {param!r}")
    specs = [base.with_param(param, v) for v in values]
    for spec in specs:
        spec.build()
    return specs


def _row(spec: FamilySpec, param: str, n_samples: int) -> Dict:
    f = spec.build()
    pattern = find_self_crossings(f, n_samples)
    tuples = ratio_tuples(f, pattern)
    first = tuples[0].values if tuples else []
    return {
        'param': spec.params[param],
        'n_classes': len(pattern.classes),
        'class_sizes': json.dumps(pattern.class_sizes),
        'points': json.dumps([[angle_key(p) for p in cls] for cls in pattern.classes]),
        'a_values': json.dumps([rt.values for rt in tuples]),
        'ratio': first[0] / first[1] if len(first) >= 2 else float('nan'),
        'ratio_tuple': json.dumps([rt.normalized() for rt in tuples]),
    }


def run_sweep(base: FamilySpec, param: str, values: Sequence[float],
              n_samples: int = None, max_workers: int = None) -> pd.DataFrame:
    """
    Crossing classes and A-values over a parameter grid, one row per value.

    Rows come back in grid order regardless of which worker finished first.
    """
    n_samples = n_samples or config.OUTPUT_CONFIG['sweep_samples']
    max_workers = max_workers or config.PERFORMANCE_CONFIG['max_workers']
    specs = sweep_specs(base, param, values)
    if config.PERFORMANCE_CONFIG['parallel_processing'] and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda s: _row(s, param, n_samples), specs))
    else:
        rows = [_row(s, param, n_samples) for s in specs]
    logger.info(f"Sweep over {base.kind}.{param}: {len(rows)} rows")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_sweep_csv(frame: pd.DataFrame, path: str) -> str:
    frame.to_csv(path, index=False)
    logger.info(f"Sweep written to {path}")
    return path
