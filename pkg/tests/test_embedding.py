import cmath

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.complex_rational import Moebius, Polynomial, RationalMap
from src.embedding import (EmbeddingMap, boundary_pair_data, emb_deriv1, emb_deriv2, emb_eval, emb_inner, precompose,
                           reduction_to_pair, transversality_pairing, validate)
from src.exceptions import DimensionMismatch, MalformedInput, NotACrossing, ParamOutOfRange
from src.families import make_f_r, make_f_rs, make_f_symmetric
from src.utils import random_disc_points


def test_embedding_map_dimension_check():
    z = RationalMap.identity()
    with pytest.raises(DimensionMismatch):
        EmbeddingMap(2, 1.0, (z,))
    with pytest.raises(ParamOutOfRange):
        EmbeddingMap(1, 0.0, (z,))


def test_emb_eval_shapes(f_half):
    assert emb_eval(f_half, 0.2).shape == (2,)
    assert emb_eval(f_half, np.zeros((3, 5))).shape == (3, 5, 2)


def test_f_r_attached_to_sphere(f_half):
    xi = np.exp(1j * np.linspace(0, 2 * np.pi, 101))
    norms = np.sum(np.abs(emb_eval(f_half, xi)) ** 2, axis=-1)
    assert_allclose(norms, 1.0, atol=1e-12)


def test_emb_inner_is_hermitian(f_half):
    z, w = 0.3 - 0.1j, -0.2 + 0.5j
    assert emb_inner(f_half, z, w) == pytest.approx(np.conj(emb_inner(f_half, w, z)))


def test_transversality_pairing_closed_form(f_half):
    # A_{f_r}(1) = 2/(1 - r) and A_{f_r}(-1) = 2/(1 + r)
    assert transversality_pairing(f_half, 1.0) == pytest.approx(4.0)
    assert transversality_pairing(f_half, -1.0) == pytest.approx(4.0 / 3.0)


def test_precompose_pointwise(f_half):
    m = Moebius(cmath.exp(0.4j), 0.2 + 0.1j)
    g = precompose(f_half, m)
    z = np.array([0.0, 0.3j, -0.5 + 0.2j])
    assert_allclose(emb_eval(g, z), emb_eval(f_half, m.apply(z)), atol=1e-13)


def test_json_roundtrip_and_bare_polynomial_component():
    f = EmbeddingMap.from_json({'dim': 1, 'scale': 1.0, 'components': [[[0.0, 0.0], [1.0, 0.0]]]})
    assert emb_eval(f, 0.25) == pytest.approx(np.array([0.25]))
    assert EmbeddingMap.from_json(f.to_json()).to_json() == f.to_json()
    with pytest.raises(MalformedInput):
        EmbeddingMap.from_json({'dim': 1})


@pytest.mark.parametrize('r', [0.3, 0.5, 0.7])
def test_validate_accepts_f_r(r):
    report = validate(make_f_r(r))
    assert report.passed, report.failed_checks()
    assert report.max_boundary_deviation < 1e-12


def test_validate_accepts_three_crossing(f_three):
    assert validate(f_three).passed


def test_validate_reports_non_attached_map():
    half_disc = EmbeddingMap(1, 0.5, (RationalMap.identity(),))
    report = validate(half_disc)
    assert not report.passed
    assert 'sphere_attachment' in report.failed_checks()


def test_validate_reports_vanishing_derivative():
    z_squared = EmbeddingMap(1, 1.0, (RationalMap.from_polynomial(Polynomial.monomial(2)),))
    report = validate(z_squared)
    assert 'derivative_nonvanishing' in report.failed_checks()
    assert report.min_derivative_norm == pytest.approx(0.0)


def test_validate_reports_pole():
    pole = RationalMap(Polynomial((1.0,)), Polynomial((-0.5, 1.0)))
    report = validate(EmbeddingMap(1, 1.0, (pole,)))
    assert not report.pole_free_ok
    assert not report.passed


def test_validate_grid_size_floor(f_half):
    with pytest.raises(ParamOutOfRange):
        validate(f_half, grid_size=64)


def test_reduction_to_standard_pair_is_identity():
    assert reduction_to_pair(1.0, -1.0).is_identity(1e-12)


def test_reduction_to_pair_maps_endpoints():
    xi, zeta = cmath.exp(0.4j), cmath.exp(2.9j)
    mu = reduction_to_pair(xi, zeta)
    assert abs(mu.apply(1.0) - xi) < 1e-12
    assert abs(mu.apply(-1.0) - zeta) < 1e-12


def test_boundary_pair_data_f_half(f_half):
    data = boundary_pair_data(f_half, 1.0, -1.0)
    assert data.A == pytest.approx(4.0)
    assert data.B == pytest.approx(4.0 / 3.0)
    assert data.is_crossing
    assert data.crossing_residual < 1e-12
    # C = ||f'(1)||^2 = (4 + 4 b'(1)^2)/2 with b'(1) = 3
    assert data.C == pytest.approx(20.0)


def test_boundary_pair_data_requires_crossing(f_half):
    with pytest.raises(NotACrossing):
        boundary_pair_data(f_half, 1.0, 1j)
    data = boundary_pair_data(f_half, 1.0, 1j, require_crossing=False)
    assert not data.is_crossing


def test_boundary_pair_data_rejects_repeated_point(f_half):
    with pytest.raises(NotACrossing):
        boundary_pair_data(f_half, 1.0, 1.0, require_crossing=False)


def test_derivative_against_difference_quotient(f_half):
    z, h = 0.2 + 0.3j, 1e-6
    numeric = (emb_eval(f_half, z + h) - emb_eval(f_half, z - h)) / (2 * h)
    assert_allclose(emb_deriv1(f_half, z), numeric, atol=1e-8)


def test_derivatives_on_random_points(rng, f_half):
    h = 1e-5
    for z in random_disc_points(rng, 50, 0.9):
        d1 = (emb_eval(f_half, z + h) - emb_eval(f_half, z - h)) / (2 * h)
        d2 = (emb_eval(f_half, z + h) - 2 * emb_eval(f_half, z) + emb_eval(f_half, z - h)) / h ** 2
        assert_allclose(emb_deriv1(f_half, z), d1, atol=1e-7)
        assert_allclose(emb_deriv2(f_half, z), d2, atol=1e-4)


def test_emb_inner_hermitian_on_random_pairs(rng, f_symmetric_half):
    z = random_disc_points(rng, 100, 0.95)
    w = random_disc_points(rng, 100, 0.95)
    assert_allclose(emb_inner(f_symmetric_half, z, w), np.conj(emb_inner(f_symmetric_half, w, z)), atol=1e-14)


@pytest.mark.parametrize('f', [make_f_r(0.5), make_f_symmetric(0.4), make_f_rs(0.2, 0.6)])
def test_boundary_pair_data_cauchy_schwarz(f):
    data = boundary_pair_data(f, 1.0, -1.0)
    assert abs(data.E) ** 2 <= data.C * data.D * (1 + 1e-12)


@pytest.mark.parametrize('f', [make_f_symmetric(0.3), make_f_symmetric(0.5), make_f_rs(0.2, 0.6), make_f_r(0.9)])
def test_validate_accepts_other_families(f):
    report = validate(f)
    assert report.passed, report.failed_checks()


def test_validate_z_squared_is_not_injective():
    z_squared = EmbeddingMap(1, 1.0, (RationalMap.from_polynomial(Polynomial.monomial(2)),))
    report = validate(z_squared)
    assert report.injectivity_ok is False
    assert 'injectivity' in report.failed_checks()
