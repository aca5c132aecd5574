"""Independent reference computations used by the tests.

Polynomials here are plain dicts ``{alpha: coeff}`` manipulated monomial by
monomial, and homogeneous norms go through explicit symmetric tensors, so
none of this shares code paths with the package.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np


def poly_from(f) -> dict:
    return {a: c for a, c in f.terms().items() if c != 0}


def poly_add(p, q):
    out = defaultdict(complex)
    for a, c in itertools.chain(p.items(), q.items()):
        out[a] += c
    return dict(out)


def poly_deriv(p, alpha):
    out = defaultdict(complex)
    for beta, c in p.items():
        if all(b >= a for a, b in zip(alpha, beta)):
            w = math.prod(math.perm(b, a) for a, b in zip(alpha, beta))
            out[tuple(b - a for a, b in zip(alpha, beta))] += c * w
    return dict(out)


def poly_shift(p, z0):
    """Expand each ``prod (z_i + z0_i)^{b_i}`` by the binomial theorem."""
    out = defaultdict(complex)
    for beta, c in p.items():
        ranges = [range(b + 1) for b in beta]
        for gamma in itertools.product(*ranges):
            w = c
            for b, g, s in zip(beta, gamma, z0):
                w *= math.comb(b, g) * s ** (b - g)
            out[gamma] += w
    return dict(out)


def poly_eval(p, z):
    return sum(c * math.prod(complex(zi) ** a for zi, a in zip(z, alpha)) for alpha, c in p.items())


def poly_close(p, q, tol):
    keys = set(p) | set(q)
    return max((abs(p.get(k, 0) - q.get(k, 0)) for k in keys), default=0.0) <= tol


def symmetric_tensor(coeffs: dict, dim: int, k: int) -> np.ndarray:
    """Symmetric k-tensor ``A`` with ``P(x) = A(x, ..., x)``."""
    A = np.zeros((dim,) * k, dtype=complex)
    for idx in itertools.product(range(dim), repeat=k):
        alpha = tuple(idx.count(i) for i in range(dim))
        mult = math.factorial(k) // math.prod(math.factorial(a) for a in alpha)
        A[idx] = coeffs.get(alpha, 0) / mult
    return A


def tensor_to_poly(A: np.ndarray, dim: int) -> dict:
    k = A.ndim
    out = defaultdict(complex)
    for idx in itertools.product(range(dim), repeat=k):
        alpha = tuple(idx.count(i) for i in range(dim))
        out[alpha] += A[idx] if k else A
    if k == 0:
        return {(0,) * dim: complex(A)}
    return dict(out)


def bombieri_norm(coeffs: dict, dim: int, k: int) -> float:
    """Hilbert-Schmidt (Frobenius) norm of the symmetric tensor."""
    return float(np.sqrt(np.sum(np.abs(symmetric_tensor(coeffs, dim, k)) ** 2)))


def contraction(coeffs: dict, dim: int, k: int, a, l: int) -> dict:
    """``x -> A(a, ..., a, x, ..., x)`` with ``l`` copies of ``a``."""
    A = symmetric_tensor(coeffs, dim, k)
    a = np.asarray(a, dtype=complex)
    for _ in range(l):
        A = np.tensordot(a, A, axes=(0, 0))
    return tensor_to_poly(A, dim)


def exp_coeff(gamma, alpha):
    return math.prod(complex(g) ** a / math.factorial(a) for g, a in zip(gamma, alpha))


def bump(theta, center, half_width):
    u = (theta - center) / half_width
    return math.exp(1.0 - 1.0 / (1.0 - u * u)) if abs(u) < 1 else 0.0
