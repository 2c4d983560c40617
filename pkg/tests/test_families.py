import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.complex_rational import Moebius, Polynomial, rat_eval
from src.embedding import emb_eval, precompose
from src.exceptions import (DegeneratePair, InjectivityScreenFailed, MalformedInput, ParamOutOfRange,
                            RootFindingFailure)
from src.families import (OMEGA, FamilySpec, catalog_specs, catalog_three_crossing_params,
                          check_log_derivative, g_contribution, injectivity_polynomial, injectivity_screen,
                          load_catalog, log_derivative_g, make_f_rs, make_f_three_crossing, make_g_alpha,
                          normalize_to_symmetric, reduce_to_base, roots_in_disc, scan_alpha1, screen_roots,
                          winding_count)
from src.invariants import a_invariant


@pytest.mark.parametrize('alpha', [-0.9, 0.0, 0.5, 0.9])
def test_g_alpha_equals_one_at_cube_roots(alpha):
    g = make_g_alpha(alpha)
    for k in range(3):
        assert abs(rat_eval(g, OMEGA ** k) - 1.0) <= 1e-12


def test_g_alpha_degenerate_parameter():
    with pytest.raises(ParamOutOfRange):
        make_g_alpha(-0.5)
    with pytest.raises(ParamOutOfRange):
        make_g_alpha(1.0)


def test_g_alpha_basic_values():
    g = make_g_alpha(0.5)
    assert rat_eval(g, 0.0) == 0
    z = 0.3 + 0.4j
    assert abs(rat_eval(g, z.conjugate()) - rat_eval(g, z).conjugate()) < 1e-14


def test_log_derivative_closed_form():
    for alpha in (0.2, 0.5, 0.9):
        assert check_log_derivative(alpha, 0.3 - 0.2j) < 1e-10


def test_normalization_spot_value():
    assert normalize_to_symmetric(0.0, 0.6) == pytest.approx(-1.0 / 3.0, abs=1e-15)


@pytest.mark.parametrize('rho', [0.2, 0.6, 0.95])
def test_normalization_identity(rho):
    t = normalize_to_symmetric(0.0, rho)
    assert -1.0 < t < 0.0
    assert t == pytest.approx((-1.0 + math.sqrt(1.0 - rho * rho)) / rho)
    lhs = precompose(make_f_rs(0.0, rho), Moebius.blaschke(t))
    rhs = make_f_rs(t, -t)
    theta = 2 * np.pi * np.arange(256) / 256
    z = np.concatenate([0.9 * np.exp(1j * theta[:128]), np.exp(1j * theta[128:])])
    assert np.max(np.abs(emb_eval(lhs, z) - emb_eval(rhs, z))) <= 1e-12


def test_reduce_to_base():
    rho, flip = reduce_to_base(0.2, 0.6)
    assert rho == pytest.approx(0.4 / 0.88)
    assert not flip
    rho, flip = reduce_to_base(0.6, 0.2)
    assert flip
    with pytest.raises(DegeneratePair):
        reduce_to_base(0.3, 0.3)


def test_f_rs_reduction_pointwise():
    r, s = 0.2, 0.6
    lhs = precompose(make_f_rs(r, s), Moebius.blaschke(-r))
    rhs = make_f_rs(0.0, (s - r) / (1 - s * r))
    z = np.array([0.0, 0.5j, -0.3 + 0.4j, 1.0])
    assert_allclose(emb_eval(lhs, z), emb_eval(rhs, z), atol=1e-12)


def test_f_rs_degenerate():
    with pytest.raises(DegeneratePair):
        make_f_rs(0.4, 0.4)


def test_injectivity_polynomial_roots_on_circle():
    h = injectivity_polynomial(0.5)
    assert h.degree == 4
    for root in (1.0, OMEGA, OMEGA ** 2):
        assert abs(h(root)) < 1e-12
    assert winding_count(h, 0.999) == 0
    assert screen_roots(0.5) == []


def test_roots_in_disc_finds_interior_roots():
    roots = [0.3 + 0.2j, -0.45 - 0.1j]
    p = Polynomial.from_roots(roots + [1.7, -2.1j])
    found = roots_in_disc(p)
    assert len(found) == 2
    for root in roots:
        assert min(abs(root - z) for z in found) < 1e-10


def test_roots_in_disc_degree_limit():
    with pytest.raises(RootFindingFailure):
        roots_in_disc(Polynomial.from_roots([0.1 * k for k in range(10)]))


def test_injectivity_screen_catalog_choice():
    params = catalog_three_crossing_params()
    assert injectivity_screen(params['alpha0'], params['alpha1'])


def test_scan_alpha1_matches_catalog():
    entry = load_catalog()['f_three_crossing']
    result = scan_alpha1(entry['alpha0'])
    assert result['alpha1'] == pytest.approx(entry['alpha1'])
    assert result['roots_in_disc'] == entry['alpha1_evidence']['roots_in_disc']
    assert result['scan_domain'] == entry['alpha1_evidence']['scan_domain'] == [-0.5, 1.0]


def test_three_crossing_defaults(f_three):
    assert f_three.dim == 4
    assert f_three.scale == 0.5
    values = emb_eval(f_three, np.array([1.0, OMEGA, OMEGA ** 2]))
    assert np.max(np.abs(values - values[0])) < 1e-12


def test_three_crossing_a_symmetry_and_closed_form(f_three):
    params = catalog_three_crossing_params()
    a_omega = a_invariant(f_three, OMEGA)
    assert a_omega == pytest.approx(a_invariant(f_three, OMEGA.conjugate()), rel=1e-12)
    closed = 0.25 * (3.0 + sum(g_contribution(params[k], 1.0) for k in ('alpha0', 'alpha1', 'alpha')))
    assert a_invariant(f_three, 1.0) == pytest.approx(closed, rel=1e-10)


def test_three_crossing_rejects_pole_parameter():
    with pytest.raises(ParamOutOfRange):
        make_f_three_crossing(alpha=-0.7)


def test_three_crossing_screen_failure(monkeypatch):
    monkeypatch.setattr('src.families.injectivity_screen', lambda a0, a1: False)
    with pytest.raises(InjectivityScreenFailed):
        make_f_three_crossing()


def test_divergence_of_a_ratio():
    alphas = [0.9, 0.95, 0.99, 0.999]
    ratios = []
    for alpha in alphas:
        f = make_f_three_crossing(alpha=alpha)
        ratios.append(a_invariant(f, 1.0) / a_invariant(f, OMEGA))
        assert abs(log_derivative_g(alpha, OMEGA)) < 10.0
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert g_contribution(0.999, 1.0) > 25.0 * g_contribution(0.9, 1.0)


def test_g_contribution_closed_form():
    alpha = 0.9
    beta = -alpha / (1 + alpha)
    expected = 1 + (1 + alpha) / (1 - alpha) + (1 + beta) / (1 - beta)
    assert g_contribution(alpha, 1.0) == pytest.approx(expected, rel=1e-12)


def test_family_spec_parse():
    spec = FamilySpec.parse('f_rs:r=0.2,s=0.6')
    assert spec.kind == 'f_rs'
    assert spec.params == {'r': 0.2, 's': 0.6}
    assert spec.label() == 'f_rs:r=0.2,s=0.6'
    assert FamilySpec.from_json(spec.to_dict()) == spec


@pytest.mark.parametrize('text', ['unknown:r=1', 'f_r:q=0.5', 'f_r:r', 'f_r:r=abc'])
def test_family_spec_parse_errors(text):
    with pytest.raises(MalformedInput):
        FamilySpec.parse(text)


def test_family_spec_missing_parameter():
    with pytest.raises(MalformedInput):
        FamilySpec.parse('f_r').build()


def test_family_spec_range_error():
    with pytest.raises(ParamOutOfRange):
        FamilySpec.parse('f_r:r=1.5').build()


def test_catalog_specs_build():
    specs = catalog_specs()
    assert {s.kind for s in specs} >= {'f_r', 'f_symmetric', 'f_rs', 'f_three_crossing'}
    for spec in specs:
        assert spec.build().dim in (2, 4)
