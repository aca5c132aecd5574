import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holodyn.errors import DimensionMismatch, TruncationError
from holodyn.taylor import (
    MultiIndex,
    TaylorPoly,
    add,
    all_multi_indices,
    directional_derivative,
    evaluate,
    exp_of_linear,
    monomial,
    partial_derivative,
    scale,
    taylor_shift,
)

from oracles import poly_close, poly_deriv, poly_eval, poly_from, poly_shift


def rand_poly(rng, dim, degree):
    idx = all_multi_indices(dim, degree)
    c = rng.standard_normal((len(idx), 2))
    return TaylorPoly(dim, degree, c[:, 0] + 1j * c[:, 1])


@st.composite
def polys(draw, max_dim=3, max_degree=8):
    dim = draw(st.integers(1, max_dim))
    degree = draw(st.integers(0, max_degree))
    seed = draw(st.integers(0, 2**32 - 1))
    return rand_poly(np.random.default_rng(seed), dim, degree)


def vec(rng, n, scale_=1.0):
    return scale_ * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


# multi-indices ------------------------------------------------------------

def test_multi_index_degree_and_order():
    a = MultiIndex((2, 0, 1))
    assert a.degree == 3 and a.factorial() == 2
    idx = all_multi_indices(2, 3)
    assert [tuple(i) for i in idx[:4]] == [(0, 0), (1, 0), (0, 1), (2, 0)]
    assert all(x < y for x, y in zip(idx, idx[1:]))


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


# add / scale --------------------------------------------------------------

def test_add_examples():
    z = monomial((1,))
    one = monomial((0,))
    assert add(z, one).terms() == {(0,): 1, (1,): 1}
    assert add(monomial((2,)), scale(monomial((2,)), -1)).terms() == {}
    s = add(exp_of_linear([1.0], 4), exp_of_linear([-1.0], 4))
    expected = {(0,): 2, (2,): 1, (4,): 2 / 24}
    assert s.trunc_degree == 4 and s.valid_degree == 4
    assert poly_close(poly_from(s), expected, 1e-15)


def test_add_truncated_takes_min():
    f = exp_of_linear([1.0], 6)
    g = exp_of_linear([1.0], 4)
    h = add(f, g)
    assert h.trunc_degree == 4 and h.valid_degree == 4


def test_add_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        add(monomial((1,)), monomial((1, 0)))


def test_scale_examples():
    assert scale(monomial((1,)), 0).terms() == {}
    assert scale(TaylorPoly.from_terms(1, 1, {(0,): 1, (1,): 1}), 2).terms() == {(0,): 2, (1,): 2}
    assert scale(monomial((3,)), 1j).terms() == {(3,): 1j}


# derivatives --------------------------------------------------------------

def test_directional_derivative_examples():
    assert directional_derivative(monomial((2,)), [1]).terms() == {(1,): 2}
    assert directional_derivative(monomial((1, 1)), [1, 0]).terms() == {(0, 1): 1}
    e = exp_of_linear([2.0], 6)
    d = directional_derivative(e, [1])
    assert d.trunc_degree == 5 and d.valid_degree == 5
    assert np.allclose(d.coeffs, 2 * exp_of_linear([2.0], 5).coeffs, rtol=1e-15)


def test_constant_derivative_is_zero():
    d = directional_derivative(monomial((0, 0)), [1, 2])
    assert not np.any(d.coeffs)


def test_partial_derivative_examples():
    assert partial_derivative(monomial((3,)), (2,)).terms() == {(1,): 6}
    assert partial_derivative(monomial((2, 1)), (1, 1)).terms() == {(1, 0): 2}
    d = partial_derivative(exp_of_linear([1.0], 8), (3,))
    assert d.valid_degree == 5
    assert np.allclose(d.coeffs, exp_of_linear([1.0], 5).coeffs, rtol=1e-15)


def test_derivative_beyond_valid_range():
    with pytest.raises(TruncationError):
        partial_derivative(exp_of_linear([1.0], 3), (4,))
    # an exact polynomial simply differentiates to zero
    assert not np.any(partial_derivative(monomial((3,)), (4,)).coeffs)


@settings(max_examples=40, deadline=None)
@given(polys(), st.data())
def test_partial_derivative_matches_oracle(f, data):
    alpha = tuple(data.draw(st.integers(0, 3)) for _ in range(f.dim))
    got = poly_from(partial_derivative(f, alpha))
    assert poly_close(got, poly_deriv(poly_from(f), alpha), 1e-9)


# shift --------------------------------------------------------------------

def test_shift_examples():
    assert poly_close(poly_from(taylor_shift(monomial((2,)), [1])), {(0,): 1, (1,): 2, (2,): 1}, 0)
    got = poly_from(taylor_shift(monomial((1, 1)), [1, -1]))
    assert poly_close(got, {(1, 1): 1, (1, 0): -1, (0, 1): 1, (0, 0): -1}, 0)


def test_shift_of_truncated_exponential():
    D = 10
    got = taylor_shift(exp_of_linear([1.0], D), [1])
    assert got.tail_contaminated and got.valid_degree == D
    err = np.abs(got.coeffs - math.e * exp_of_linear([1.0], D).coeffs)
    # coefficient k misses sum_{m > D} binom(m, k)/m! = (1/k!) sum_{i > D-k} 1/i!
    for k in range(D + 1):
        bound = math.e / (math.factorial(k) * math.factorial(D - k + 1))
        assert err[k] <= bound
    assert err[0] <= math.e / math.factorial(11)


def test_shift_of_exact_poly_is_clean():
    assert not taylor_shift(monomial((3,)), [2]).tail_contaminated


@settings(max_examples=40, deadline=None)
@given(polys(max_degree=7), st.integers(0, 2**32 - 1))
def test_shift_matches_oracle(f, seed):
    z0 = vec(np.random.default_rng(seed), f.dim)
    assert poly_close(poly_from(taylor_shift(f, z0)), poly_shift(poly_from(f), z0), 1e-8)


@settings(max_examples=40, deadline=None)
@given(polys(max_degree=7), st.integers(0, 2**32 - 1))
def test_shift_group_law(f, seed):
    rng = np.random.default_rng(seed)
    a, b = vec(rng, f.dim), vec(rng, f.dim)
    lhs = taylor_shift(taylor_shift(f, a), b)
    rhs = taylor_shift(f, a + b)
    scale_ = max(1.0, np.abs(rhs.coeffs).max())
    assert lhs.max_error(rhs) <= 1e-11 * scale_


@settings(max_examples=40, deadline=None)
@given(polys(max_degree=7), st.integers(0, 2**32 - 1))
def test_derivative_commutes_with_shift(f, seed):
    rng = np.random.default_rng(seed)
    z0, a = vec(rng, f.dim), vec(rng, f.dim)
    lhs = directional_derivative(taylor_shift(f, z0), a)
    rhs = taylor_shift(directional_derivative(f, a), z0)
    assert lhs.max_error(rhs) <= 1e-10 * max(1.0, np.abs(rhs.coeffs).max())


# linearity ------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 12), st.integers(0, 2**32 - 1))
def test_operations_are_linear(dim, degree, seed):
    rng = np.random.default_rng(seed)
    f, g = rand_poly(rng, dim, degree), rand_poly(rng, dim, degree)
    c = complex(*rng.standard_normal(2))
    z0, a, z = vec(rng, dim, 0.5), vec(rng, dim), vec(rng, dim, 0.5)
    alpha = tuple(int(x) for x in rng.integers(0, 2, dim))
    combo = add(f, scale(g, c))
    for op in (
        lambda h: taylor_shift(h, z0),
        lambda h: directional_derivative(h, a),
        lambda h: partial_derivative(h, alpha),
    ):
        lhs = op(combo)
        rhs = add(op(f), scale(op(g), c))
        assert lhs.max_error(rhs) <= 1e-12 * max(1.0, np.abs(lhs.coeffs).max())
    lhs = evaluate(combo, z)
    rhs = evaluate(f, z) + c * evaluate(g, z)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


# evaluation ---------------------------------------------------------------------

def test_evaluate_examples():
    f = TaylorPoly.from_terms(1, 2, {(0,): 1, (1,): 1, (2,): 0.5})
    assert evaluate(f, [0]) == 1
    assert evaluate(TaylorPoly.from_terms(2, 1, {(1, 0): 1, (0, 1): 1}), [1, 2]) == 3
    assert abs(evaluate(exp_of_linear([1.0], 15), [1.0]) - math.e) <= 1e-12


def test_evaluate_batch():
    f = TaylorPoly.from_terms(2, 2, {(1, 1): 2, (0, 0): 1})
    pts = np.array([[1, 1], [2, 0.5], [0, 3]])
    assert np.allclose(evaluate(f, pts), [3, 3, 1])


@settings(max_examples=40, deadline=None)
@given(polys(), st.integers(0, 2**32 - 1))
def test_evaluate_matches_oracle(f, seed):
    z = vec(np.random.default_rng(seed), f.dim, 0.7)
    exp = poly_eval(poly_from(f), z)
    assert abs(evaluate(f, z) - exp) <= 1e-10 * max(1.0, abs(exp))


@settings(max_examples=30, deadline=None)
@given(polys(max_degree=6), st.data())
def test_coefficients_are_scaled_derivatives_at_zero(f, data):
    alpha = tuple(data.draw(st.integers(0, 3)) for _ in range(f.dim))
    if sum(alpha) > f.trunc_degree:
        return
    value = evaluate(partial_derivative(f, alpha), np.zeros(f.dim))
    fact = math.prod(math.factorial(a) for a in alpha)
    assert abs(value / fact - f.coefficient(alpha)) <= 1e-12 * max(1.0, abs(value))


# exponentials ---------------------------------------------------------------------

def test_exp_of_linear_examples():
    assert exp_of_linear([0.0], 5).terms() == {(0,): 1}
    assert poly_close(poly_from(exp_of_linear([1.0], 2)), {(0,): 1, (1,): 1, (2,): 0.5}, 1e-15)
    got = poly_from(exp_of_linear([2.0, 0.0], 3))
    assert poly_close(got, {(0, 0): 1, (1, 0): 2, (2, 0): 2, (3, 0): 4 / 3}, 1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 14), st.integers(0, 2**32 - 1))
def test_exp_of_linear_lagrange_bound(dim, D, seed):
    rng = np.random.default_rng(seed)
    gamma, z = vec(rng, dim), vec(rng, dim)
    w = complex(np.dot(gamma, z))
    err = abs(evaluate(exp_of_linear(gamma, D), z) - np.exp(w))
    bound = abs(w) ** (D + 1) / math.factorial(D + 1) * math.exp(abs(w))
    assert err <= bound + 1e-12 * math.exp(abs(w))


def test_exp_homogeneous_parts_are_powers():
    gamma = np.array([0.3 + 1j, -0.5, 2.0])
    e = exp_of_linear(gamma, 6)
    z = np.array([0.2, -0.1j, 0.4])
    for k in range(7):
        assert abs(e.homogeneous(k)(z) - np.dot(gamma, z) ** k / math.factorial(k)) <= 1e-14


# serialization -----------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(polys())
def test_json_round_trip_is_bit_exact(f):
    g = TaylorPoly.from_dict(json.loads(json.dumps(f.to_dict())))
    assert g.dim == f.dim and g.trunc_degree == f.trunc_degree and g.valid_degree == f.valid_degree
    assert g.coeffs.tobytes() == f.coeffs.tobytes()


def test_json_round_trip_keeps_flags():
    f = taylor_shift(exp_of_linear([0.3j, 1.0], 5), [1, 1])
    g = TaylorPoly.from_dict(json.loads(json.dumps(f.to_dict())))
    assert (g.exact, g.tail_contaminated) == (f.exact, f.tail_contaminated)
    assert g.coeffs.tobytes() == f.coeffs.tobytes()


def test_values_are_immutable():
    f = monomial((2,))
    with pytest.raises(ValueError):
        f.coeffs[0] = 1
