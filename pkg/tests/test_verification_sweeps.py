import json

import pandas as pd
import pytest

from src.exceptions import MalformedInput, ParamOutOfRange
from src.families import FamilySpec
from src.sweeps import SWEEP_COLUMNS, run_sweep, write_sweep_csv
from src.verification import SUITES, _duality_suite, run_suite


@pytest.mark.parametrize('name', ['expansion', 'path_metric', 'kernel_diff', 'cross_path', 'crossing_pick'])
def test_suite_passes(name):
    outcome = run_suite(name)
    assert outcome['passed'], [c['map'] for c in outcome['cases'] if not c['passed']]
    assert outcome['suite'] == name


def test_duality_suite_small():
    specs = [FamilySpec.parse('f_r:r=0.5'), FamilySpec.parse('f_symmetric:r=0.3')]
    cases = _duality_suite(seed=0, pairs=20, specs=specs)
    assert all(case['passed'] for case in cases)
    assert [case['map'] for case in cases] == ['f_r:r=0.5', 'f_symmetric:r=0.3']


def test_duality_suite_is_seeded():
    specs = [FamilySpec.parse('f_r:r=0.7')]
    first = _duality_suite(seed=3, pairs=5, specs=specs)
    second = _duality_suite(seed=3, pairs=5, specs=specs)
    assert first == second


def test_unknown_suite():
    assert 'duality' in SUITES
    with pytest.raises(KeyError):
        run_suite('nonexistent')


def test_sweep_f_r_ratio_column():
    values = [0.1, 0.3, 0.5, 0.7, 0.9]
    frame = run_sweep(FamilySpec.parse('f_r'), 'r', values, n_samples=2048)
    assert list(frame.columns) == SWEEP_COLUMNS
    assert frame['param'].tolist() == values
    for r, ratio in zip(values, frame['ratio']):
        assert abs(ratio - (1 + r) / (1 - r)) <= 1e-10
    assert json.loads(frame['class_sizes'][0]) == [2]


def test_sweep_three_crossing_divergence():
    frame = run_sweep(FamilySpec.parse('f_three_crossing'), 'alpha', [0.9, 0.95, 0.99])
    ratios = frame['ratio'].tolist()
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert frame['n_classes'].tolist() == [1, 1, 1]


def test_sweep_empty_grid_writes_header(tmp_path):
    frame = run_sweep(FamilySpec.parse('f_r'), 'r', [])
    path = write_sweep_csv(frame, str(tmp_path / 'empty.csv'))
    loaded = pd.read_csv(path)
    assert list(loaded.columns) == SWEEP_COLUMNS
    assert len(loaded) == 0


def test_sweep_range_violation_before_compute():
    with pytest.raises(ParamOutOfRange):
        run_sweep(FamilySpec.parse('f_r'), 'r', [0.5, 1.5])


def test_sweep_unknown_parameter():
    with pytest.raises(MalformedInput):
        run_sweep(FamilySpec.parse('f_r'), 'alpha', [0.5])


def test_cross_path_suite_limits():
    cases = run_suite('cross_path')['cases']
    limits = {case['map']: case['limit']['limit'] for case in cases}
    assert limits['f_r:r=0.4 vs f_r:r=0.4'] == pytest.approx(0.0, abs=1e-14)
    assert limits['f_r:r=0.3 vs f_r:r=0.6'] > 0.1
