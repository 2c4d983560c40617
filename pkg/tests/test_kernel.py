import numpy as np
import pytest
from scipy import linalg

import config
from src.embedding import boundary_pair_data
from src.exceptions import (DimensionMismatch, KernelSingularity, NonHermitianInput, NotACrossing,
                            ParamOutOfRange, PathLeftDisc)
from src.families import make_f_r, make_f_rs
from src.kernel import (HermitianMatrix, boundary_path_metric, cross_path_limit, cross_path_metric,
                        crossing_pick_feasible, expansion_coefficients_check,
                        extremal_value_by_bisection, gram, is_psd, kernel_diff_bound, kernel_diff_ladder,
                        kernel_diff_norm_sq, kernel_eval, metric_d, min_eigenvalue, pick_feasible, pick_matrix)
from src.utils import random_disc_points


def _random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def _singular_psd(rng, n):
    rank = max(1, n - 2)
    b = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return b @ b.conj().T


def test_kernel_at_origin(f_half):
    # f_r(0) = (0, r^2)/sqrt2, so k(0, 0) = 1/(1 - r^4/2)
    assert kernel_eval(f_half, 0.0, 0.0) == pytest.approx(1.0 / (1.0 - 0.0625 / 2.0))


def test_kernel_singular_at_boundary_crossing(f_half):
    with pytest.raises(KernelSingularity):
        kernel_eval(f_half, 1.0, -1.0)


def test_gram_is_psd(f_half, rng):
    points = random_disc_points(rng, 8, 0.9)
    assert is_psd(gram(f_half, points))


def test_gram_rejects_boundary_points(f_half):
    with pytest.raises(ParamOutOfRange):
        gram(f_half, [0.1, 1.0])


def test_hermitian_matrix_validation():
    with pytest.raises(NonHermitianInput):
        HermitianMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatch):
        HermitianMatrix(np.eye(65))


def test_psd_oracle_matches_eigenvalues(rng):
    tol = config.tolerance('psd')
    for k in range(200):
        n = int(rng.integers(1, 13))
        if k % 3 == 0:
            m = _random_hermitian(rng, n)
        else:
            sign = 1.0 if k % 3 == 1 else -1.0
            m = _singular_psd(rng, n) + sign * 1e-12 * np.eye(n)
        shift = tol * float(np.max(np.sum(np.abs(m), axis=1)))
        expected = bool(linalg.eigvalsh(m)[0] >= -shift)
        assert is_psd(m) == expected


def test_psd_rejects_clearly_negative():
    m = np.diag([1.0, -1e-3])
    assert not is_psd(m)
    assert min_eigenvalue(m) == pytest.approx(-1e-3)


def test_pick_feasibility(f_half):
    nodes = [0.1, 0.5j]
    assert pick_feasible(pick_matrix(f_half, nodes, [0.0, 0.0]))
    assert not pick_feasible(pick_matrix(f_half, nodes, [1.5, 0.0]))


def test_pick_matrix_errors(f_half):
    with pytest.raises(DimensionMismatch):
        pick_matrix(f_half, [0.1, 0.2], [0.0])
    with pytest.raises(ParamOutOfRange):
        pick_matrix(f_half, [0.1, 0.1], [0.0, 0.0])


def test_metric_properties(f_half):
    assert metric_d(f_half, 0.3, 0.3) == pytest.approx(0.0, abs=1e-7)
    d = metric_d(f_half, 0.3j, -0.4)
    assert 0.0 < d < 1.0
    assert d == pytest.approx(metric_d(f_half, -0.4, 0.3j))


def test_pick_metric_duality(rng):
    for f in (make_f_r(0.3), make_f_r(0.7)):
        z = random_disc_points(rng, 25, 0.9)
        w = random_disc_points(rng, 25, 0.9)
        for a, b in zip(z, w):
            assert abs(extremal_value_by_bisection(f, a, b) - metric_d(f, a, b)) <= 1e-8


@pytest.mark.parametrize('r', [0.3, 0.5, 0.7])
def test_boundary_path_metric_decreases(r):
    f = make_f_r(r)
    data = boundary_pair_data(f, 1.0, -1.0)
    values = [boundary_path_metric(f, data, t) for t in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    assert boundary_path_metric(f, data, 1e-4) < 0.01


@pytest.mark.parametrize('r', [0.3, 0.5, 0.7])
def test_wrong_slope_surrogate(r):
    f = make_f_r(r)
    data = boundary_pair_data(f, 1.0, -1.0)
    assert abs(boundary_path_metric(f, data, 1e-5, slope_factor=2.0) - 1.0 / 9.0) <= 0.02


def test_path_leaves_disc(f_half):
    data = boundary_pair_data(f_half, 1.0, -1.0)
    with pytest.raises(PathLeftDisc):
        boundary_path_metric(f_half, data, 1.0)
    with pytest.raises(PathLeftDisc):
        boundary_path_metric(f_half, data, 0.0)


def test_path_needs_crossing(f_half):
    data = boundary_pair_data(f_half, 1.0, 1j, require_crossing=False)
    with pytest.raises(NotACrossing):
        boundary_path_metric(f_half, data, 1e-3)


@pytest.mark.parametrize('r', [0.3, 0.5, 0.7])
def test_kernel_difference_bounded(r):
    f = make_f_r(r)
    data = boundary_pair_data(f, 1.0, -1.0)
    ladder = kernel_diff_ladder(f, data)
    assert ladder['slack_halving']
    assert kernel_diff_norm_sq(f, data, 1e-4) <= kernel_diff_bound(data) + 0.05


def test_expansion_check_f_half(f_half):
    report = expansion_coefficients_check(f_half, boundary_pair_data(f_half, 1.0, -1.0), 1e-3)
    for side in ('plus', 'minus', 'mixed'):
        entry = report[side]
        assert entry['within_bound']
        assert entry['exact'] or 6.0 <= entry['richardson_ratio'] <= 10.0


def test_expansion_check_range(f_half):
    data = boundary_pair_data(f_half, 1.0, -1.0)
    with pytest.raises(ParamOutOfRange):
        expansion_coefficients_check(f_half, data, 0.5)


def test_kernel_symmetric_under_parameter_swap(rng):
    f, g = make_f_rs(0.3, -0.3), make_f_rs(-0.3, 0.3)
    z = random_disc_points(rng, 20, 0.9)
    w = random_disc_points(rng, 20, 0.9)
    for a, b in zip(z, w):
        assert kernel_eval(f, a, b) == pytest.approx(kernel_eval(g, a, b), rel=1e-12)


def test_cross_path_metric_limit():
    f, g = make_f_r(0.3), make_f_r(0.6)
    data = boundary_pair_data(f, 1.0, -1.0)
    limit = cross_path_limit(f, g, data)
    # a = A_g(1)/A_f(1) = 0.7/0.4, b = A_g(-1)/A_f(-1) = 1.3/1.6
    assert limit['a'] == pytest.approx(1.75)
    assert limit['b'] == pytest.approx(0.8125)
    assert limit['limit'] == pytest.approx(1.0 - 4.0 * 1.75 * 0.8125 / 2.5625 ** 2)
    assert abs(cross_path_metric(f, g, data, 1e-6) - limit['limit']) < 1e-3


def test_cross_path_metric_same_map(f_half):
    data = boundary_pair_data(f_half, 1.0, -1.0)
    assert cross_path_metric(f_half, f_half, data, 1e-4) == pytest.approx(boundary_path_metric(f_half, data, 1e-4))
    assert cross_path_limit(f_half, f_half, data)['limit'] == pytest.approx(0.0, abs=1e-14)


def test_cross_path_limit_needs_shared_crossing(f_half, f_three):
    data = boundary_pair_data(f_half, 1.0, -1.0)
    with pytest.raises(NotACrossing):
        cross_path_limit(f_half, f_three, data)


def test_crossing_pick_separates_targets(f_half):
    data = boundary_pair_data(f_half, 1.0, -1.0)
    assert not crossing_pick_feasible(f_half, data, 1e-5, (0.5, -0.5))
    assert crossing_pick_feasible(f_half, data, 1e-5, (0.5, 0.5))
