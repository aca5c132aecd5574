import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from holodyn.convolution import (
    OperatorSymbol,
    SymbolKind,
    alpha_estimate,
    alpha_ray_search,
    apply,
    borel_eval,
    borel_gradient,
    check_commutation,
    eigen_relative_error,
    fit_exponential_slice,
    fit_geometric_envelope,
    functional_dual_norms,
    functional_of,
    verify_exp_restriction,
)
from holodyn.errors import DimensionMismatch, PreconditionError, TrivialOperatorError, TruncationError
from holodyn.norms import COEFF_L1
from holodyn.taylor import TaylorPoly, all_multi_indices, evaluate, exp_of_linear, monomial, taylor_shift

from oracles import exp_coeff, poly_close, poly_deriv, poly_from, poly_shift

D = OperatorSymbol.directional_derivative([1])


def rand_symbol(rng, dim, S):
    terms = {tuple(a): complex(*rng.standard_normal(2)) for a in all_multi_indices(dim, S)}
    return OperatorSymbol.generic(dim, terms), terms


def rand_poly(rng, dim, degree):
    idx = all_multi_indices(dim, degree)
    return TaylorPoly(dim, degree, rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx)))


# construction ---------------------------------------------------------------

def test_kinds_and_degrees():
    assert D.kind is SymbolKind.DIRECTIONAL_DERIVATIVE and D.symbol_degree == 1
    assert OperatorSymbol.translation([1, 0]).symbol_degree is None
    assert OperatorSymbol.scaled_identity(2, 3).symbol_degree == 0
    g = OperatorSymbol.generic(1, {(2,): 1, (0,): 1, (5,): 0})
    assert g.symbol_degree == 2


def test_triviality():
    assert OperatorSymbol.scaled_identity(1, 2).is_trivial
    assert OperatorSymbol.translation([0, 0]).is_trivial
    assert OperatorSymbol.generic(1, {(0,): 5}).is_trivial
    assert not OperatorSymbol.generic(1, {(0,): 5, (1,): 1e-3}).is_trivial
    with pytest.raises(TrivialOperatorError):
        alpha_estimate(OperatorSymbol.scaled_identity(1, 2))


@pytest.mark.parametrize(
    "T",
    [
        OperatorSymbol.translation([1 + 2j, -0.5]),
        OperatorSymbol.directional_derivative([3, 4j]),
        OperatorSymbol.scaled_identity(2, 1.5 - 1j),
        OperatorSymbol.generic(2, {(0, 0): 1, (2, 1): -0.25j, (1, 0): 0.1}),
    ],
)
def test_symbol_json_round_trip(T):
    U = OperatorSymbol.from_dict(json.loads(json.dumps(T.to_dict())))
    assert U.kind is T.kind and U.dim == T.dim
    assert U.to_dict() == T.to_dict()
    g = np.array([0.3, -0.2j])
    assert borel_eval(U, g) == borel_eval(T, g)


@pytest.mark.parametrize(
    "data, field",
    [
        ({"kind": "translation", "z0": [1]}, "dim"),
        ({"dim": 1, "kind": "translation"}, "z0"),
        ({"dim": 2, "kind": "directional_derivative", "a": [{"re": 1}]}, "a"),
        ({"dim": 1, "kind": "generic", "terms": [{"re": 1}]}, "alpha"),
        ({"dim": 1, "kind": "banana"}, "kind"),
    ],
)
def test_malformed_symbol_names_field(data, field):
    with pytest.raises(PreconditionError, match=field):
        OperatorSymbol.from_dict(data)


# action ---------------------------------------------------------------------

def test_apply_examples():
    assert apply(D, monomial((2,))).terms() == {(1,): 2}
    T = OperatorSymbol.generic(1, {(2,): 1, (0,): 1})
    assert apply(T, monomial((3,))).terms() == {(1,): 6, (3,): 1}
    shifted = apply(OperatorSymbol.translation([1]), monomial((2,)))
    assert poly_close(poly_from(shifted), {(0,): 1, (1,): 2, (2,): 1}, 0)
    assert apply(OperatorSymbol.scaled_identity(1, 2), monomial((1,))).terms() == {(1,): 2}


def test_apply_zero_symbol():
    T = OperatorSymbol.generic(1, {})
    assert apply(T, monomial((3,))).terms() == {}


def test_apply_rejects_short_series():
    T = OperatorSymbol.generic(1, {(4,): 1})
    with pytest.raises(TruncationError):
        apply(T, exp_of_linear([1.0], 3))


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply(D, monomial((1, 0)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 7), st.integers(0, 2**32 - 1))
def test_apply_matches_oracle(dim, S, degree, seed):
    rng = np.random.default_rng(seed)
    T, terms = rand_symbol(rng, dim, S)
    f = rand_poly(rng, dim, degree)
    p = poly_from(f)
    expected = {}
    for alpha, b in terms.items():
        for k, v in poly_deriv(p, alpha).items():
            expected[k] = expected.get(k, 0) + b * v
    assert poly_close(poly_from(apply(T, f)), expected, 1e-9)


# eigen relation and commutation ----------------------------------------------

def test_eigen_relation_directional():
    gamma = [0.5 - 1j, 2.0]
    T = OperatorSymbol.directional_derivative([1j, -3])
    e = exp_of_linear(gamma, 12)
    lhs = apply(T, e)
    Phi = borel_eval(T, gamma)
    assert Phi == pytest.approx(1j * (0.5 - 1j) - 6)
    for alpha, c in lhs.terms().items():
        assert c == pytest.approx(Phi * exp_coeff(gamma, alpha), abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_eigen_relation_generic(dim, S, seed):
    rng = np.random.default_rng(seed)
    T, _ = rand_symbol(rng, dim, S)
    gamma = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    assert eigen_relative_error(T, gamma, 14) <= 1e-12


def test_eigen_relation_translation():
    T = OperatorSymbol.translation([0.5j, 1.0])
    assert eigen_relative_error(T, [1.0, -0.5], 40) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_commutation_with_translations(dim, S, degree, seed):
    rng = np.random.default_rng(seed)
    T, _ = rand_symbol(rng, dim, S)
    f = rand_poly(rng, dim, degree)
    z0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    assert check_commutation(T, z0, f) <= 1e-10
    U = OperatorSymbol.translation(rng.standard_normal(dim))
    assert check_commutation(U, z0, f) <= 1e-10


def test_borel_gradient():
    T = OperatorSymbol.generic(2, {(2, 0): 1, (1, 1): 3})
    g = np.array([1.0 + 1j, 2.0])
    assert np.allclose(borel_gradient(T, g), [2 * g[0] + 3 * g[1], 3 * g[0]])
    U = OperatorSymbol.translation([1.0, 2.0])
    assert np.allclose(borel_gradient(U, g), np.array([1, 2]) * np.exp(g[0] + 2 * g[1]))


# functional representation -----------------------------------------------------

def test_functional_example():
    phi = functional_of(D)
    assert phi.convolve_at(monomial((4,)), [2.0]) == pytest.approx(4 * 8)
    T = OperatorSymbol.generic(1, {(4,): 1})
    assert functional_of(T).convolve_at(monomial((4,)), [2.0]) == pytest.approx(24)
    assert functional_of(T)(taylor_shift(monomial((4,)), [2.0])) == pytest.approx(24)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_functional_reproduces_operator(dim, S, seed):
    rng = np.random.default_rng(seed)
    T, _ = rand_symbol(rng, dim, S)
    f = rand_poly(rng, dim, 6)
    Tf = apply(T, f)
    phi = functional_of(T)
    for _ in range(5):
        x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        ref = evaluate(Tf, x)
        assert abs(phi.convolve_at(f, x) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_functional_of_translation_is_point_evaluation():
    T = OperatorSymbol.translation([1.0, -1j])
    f = TaylorPoly.from_terms(2, 3, {(1, 2): 1, (0, 0): 2})
    assert functional_of(T)(f) == pytest.approx(evaluate(f, [1.0, -1j]))
    assert poly_close(poly_from(apply(T, f)), poly_shift(poly_from(f), [1.0, -1j]), 1e-12)


# alpha ------------------------------------------------------------------------------

def _oracle_alpha(T, dirs):
    """Brute-force ``min |gamma|`` over rays by bounded scalar minimisation of ``(|Phi|-1)^2``."""
    best = math.inf
    for u in dirs:
        u = u / np.linalg.norm(u)
        res = minimize_scalar(lambda t: (abs(borel_eval(T, t * u)) - 1) ** 2, bounds=(0, 10), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < 1e-16:
            best = min(best, res.x)
    return best


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_alpha_unit_direction_closed_form(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    a /= np.linalg.norm(a)
    est = alpha_estimate(OperatorSymbol.directional_derivative(a))
    assert abs(est.value - 1.0) <= 1e-9
    assert abs(abs(borel_eval(OperatorSymbol.directional_derivative(a), est.certificate)) - 1) <= 1e-12


def test_alpha_non_unit_direction_against_rays():
    a = np.array([3.0, 4.0])
    T = OperatorSymbol.directional_derivative(a)
    est = alpha_estimate(T)
    assert est.value == pytest.approx(5.0)
    assert abs(borel_eval(T, est.certificate)) == pytest.approx(1.0)
    assert np.linalg.norm(est.certificate) == pytest.approx(0.2)
    # along conj(a) the symbol grows fastest, so that ray attains the infimum
    assert _oracle_alpha(T, [np.conj(a), np.array([1.0, 0.0])]) == pytest.approx(0.2, abs=1e-6)
    search = alpha_ray_search(T)
    assert 0.2 <= search.value <= 0.21


def test_alpha_translation_and_affine():
    assert alpha_estimate(OperatorSymbol.translation([1.0, 2j])).value == 0
    assert alpha_estimate(OperatorSymbol.generic(1, {(0,): 1, (1,): 1})).value <= 1e-6


def test_alpha_ray_search_on_quadratic():
    # |gamma^2 / 4| = 1 on |gamma| = 2
    T = OperatorSymbol.generic(1, {(2,): 0.25})
    est = alpha_estimate(T)
    assert est.found and est.value == pytest.approx(2.0, rel=1e-10)


def test_alpha_not_found():
    T = OperatorSymbol.generic(1, {(1,): 1e-6})
    est = alpha_estimate(T, t_max=1.0)
    assert not est.found and math.isinf(est.value)


# exponential slices ---------------------------------------------------------------------

def test_translation_slices_are_exponential():
    T = OperatorSymbol.translation([1.0 + 1j, -2.0])
    fit = fit_exponential_slice(T, [0.3, 0.1j])
    assert fit.ok and fit.winding == 0
    assert fit.p == pytest.approx(np.dot([0.3, 0.1j], [1.0 + 1j, -2.0]))
    assert fit.C == pytest.approx(1.0)


def test_polynomial_slices_fail():
    fit = fit_exponential_slice(D, [1.0])
    assert not fit.ok and fit.winding == 1
    T = OperatorSymbol.generic(1, {(0,): 1, (1,): 0.5})  # zero outside the unit disc
    fit = fit_exponential_slice(T, [1.0])
    assert fit.winding == 0 and not fit.ok


# restriction to exponential types -----------------------------------------------------------

def test_dual_norms():
    T = OperatorSymbol.generic(2, {(1, 0): 3, (0, 1): 4, (2, 0): 1})
    d = functional_dual_norms(T, 3)
    assert d[0] == 0 and d[1] == pytest.approx(5) and d[2] == pytest.approx(2) and d[3] == 0
    assert functional_dual_norms(T, 2, COEFF_L1)[2] == pytest.approx(2)
    t = functional_dual_norms(OperatorSymbol.translation([3, 4]), 3)
    assert np.allclose(t, [1, 5, 25, 125])


def test_dual_norm_is_attained():
    # |phi(P)| <= ||phi_m|| ||P||_B, with equality at the Riesz representer
    T = OperatorSymbol.generic(2, {(1, 1): 2 - 1j, (2, 0): 0.5})
    m = 2
    rep = TaylorPoly.from_terms(2, 2, {(1, 1): np.conj(2 - 1j) * 1 * 2, (2, 0): np.conj(0.5) * 2 * 1})
    from holodyn.norms import hom_norm

    P = rep.homogeneous(m)
    val = abs(functional_of(T)(rep))
    assert val == pytest.approx(functional_dual_norms(T, m)[m] * hom_norm(P), rel=1e-12)


def test_geometric_envelope():
    c, M = fit_geometric_envelope(np.array([1.0, 2.0, 4.0, 8.0]))
    assert (c, M) == pytest.approx((1.0, 2.0))
    vals = np.array([0.5, 0.0, 9.0])
    c, M = fit_geometric_envelope(vals)
    assert np.all(vals <= c * M ** np.arange(3) * (1 + 1e-12))


@pytest.mark.parametrize(
    "T",
    [
        OperatorSymbol.directional_derivative([0.6, 0.8j]),
        OperatorSymbol.generic(2, {(0, 0): 1, (1, 1): -2, (0, 3): 0.5j}),
        OperatorSymbol.translation([0.3, -0.4]),
        OperatorSymbol.generic(2, {}),
    ],
)
@pytest.mark.parametrize("f", [exp_of_linear([0.5, 0.5j], 40), TaylorPoly.from_terms(2, 4, {(4, 0): 2, (1, 2): -1j})])
def test_exp_restriction_holds(T, f):
    rep = verify_exp_restriction(T, f, r=0.5, eps=0.25)
    assert rep.holds, rep


def test_exp_restriction_needs_type_margin():
    with pytest.raises(PreconditionError):
        verify_exp_restriction(D, exp_of_linear([2.0], 40), r=0.5, eps=0.1)
