"""Truncated multivariate Taylor series over C^n.

A :class:`TaylorPoly` stores the coefficients ``c_alpha`` of ``z^alpha`` for
all multi-indices of total degree ``<= trunc_degree`` in one dense complex
array, ordered graded-lexicographically (degree first, then exponents in
descending lexicographic order).  ``c_alpha`` equals ``d^alpha f(0) / alpha!``.

Two pieces of bookkeeping travel with every value:

``valid_degree``
    coefficients of degree ``<= valid_degree`` are exact given exact inputs.
``exact``
    the represented function *is* the stored polynomial (its tail vanishes).
    Truncated entire functions such as ``exp_of_linear`` carry ``exact=False``.

Translating a non-exact series mixes the unknown tail into every degree, so
:func:`taylor_shift` keeps ``valid_degree`` but sets ``tail_contaminated``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, TruncationError

__all__ = [
    "MultiIndex",
    "HomogeneousPart",
    "TaylorPoly",
    "add",
    "scale",
    "directional_derivative",
    "partial_derivative",
    "taylor_shift",
    "evaluate",
    "exp_of_linear",
    "monomial",
]


@dataclass(frozen=True, order=False)
class MultiIndex:
    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def sort_key(self):
        # graded, then descending lex: z1^k comes first within degree k
        return (self.degree, tuple(-e for e in self.exponents))

    def __lt__(self, other: "MultiIndex") -> bool:
        return self.sort_key() < other.sort_key()

    def factorial(self) -> int:
        return math.prod(math.factorial(e) for e in self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __len__(self):
        return len(self.exponents)


def _as_tuple(alpha) -> tuple[int, ...]:
    if isinstance(alpha, MultiIndex):
        return alpha.exponents
    if isinstance(alpha, (int, np.integer)):
        return (int(alpha),)
    return tuple(int(a) for a in alpha)


def _compositions(k: int, n: int):
    """Exponent tuples of total degree k in n variables, descending lex."""
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


class _Basis:
    """Monomial layout shared by every TaylorPoly of a given (dim, degree)."""

    def __init__(self, dim: int, degree: int):
        self.dim = dim
        self.degree = degree
        exps = []
        offsets = [0]
        for k in range(degree + 1):
            block = list(_compositions(k, dim))
            exps.extend(block)
            offsets.append(offsets[-1] + len(block))
        self.exps = np.array(exps, dtype=np.int64).reshape(-1, dim)
        self.exps.setflags(write=False)
        self.offsets = np.array(offsets, dtype=np.int64)
        self.size = len(exps)
        self.index = {e: i for i, e in enumerate(exps)}
        self.degrees = self.exps.sum(axis=1)
        self.log_factorial = np.array(
            [sum(math.lgamma(e + 1) for e in row) for row in exps]
        )
        self.tensor_index = tuple(self.exps[:, i] for i in range(dim))

    def block(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))


@lru_cache(maxsize=None)
def basis(dim: int, degree: int) -> _Basis:
    if dim < 1:
        raise ValueError("dimension must be positive")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    return _Basis(dim, degree)


@lru_cache(maxsize=4096)
def _derivative_map(dim: int, degree: int, alpha: tuple[int, ...]):
    """Source indices and falling-factorial weights for d^alpha."""
    order = sum(alpha)
    src = basis(dim, degree)
    out = basis(dim, degree - order)
    idx = np.empty(out.size, dtype=np.int64)
    weight = np.empty(out.size)
    for i, beta in enumerate(map(tuple, out.exps)):
        shifted = tuple(b + a for b, a in zip(beta, alpha))
        idx[i] = src.index[shifted]
        weight[i] = math.prod(math.perm(s, a) for s, a in zip(shifted, alpha))
    return idx, weight


@lru_cache(maxsize=256)
def _binomial_table(degree: int) -> np.ndarray:
    table = np.zeros((degree + 1, degree + 1))
    for a in range(degree + 1):
        for b in range(a + 1):
            table[b, a] = math.comb(a, b)
    return table


@dataclass(frozen=True, eq=False)
class HomogeneousPart:
    """Degree-k homogeneous polynomial; ``coeffs`` follow the graded-lex block."""

    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        expected = basis(self.dim, self.degree).offsets
        if c.shape != (int(expected[-1] - expected[-2]),):
            raise ValueError("coefficient block has the wrong length")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def exponents(self) -> np.ndarray:
        return basis(self.dim, self.degree).exps[basis(self.dim, self.degree).block(self.degree)]

    @classmethod
    def power_of_linear(cls, gamma: Sequence[complex], k: int) -> "HomogeneousPart":
        """The polynomial ``z -> <gamma, z>^k``."""
        gamma = np.asarray(gamma, dtype=complex)
        return exp_of_linear(gamma, k).homogeneous(k) * math.factorial(k)

    def to_poly(self) -> "TaylorPoly":
        b = basis(self.dim, self.degree)
        coeffs = np.zeros(b.size, dtype=complex)
        coeffs[b.block(self.degree)] = self.coeffs
        return TaylorPoly(self.dim, self.degree, coeffs, self.degree, exact=True)

    def __call__(self, z) -> complex:
        return evaluate(self.to_poly(), z)

    def __mul__(self, c) -> "HomogeneousPart":
        return HomogeneousPart(self.dim, self.degree, self.coeffs * complex(c))

    __rmul__ = __mul__

    def __add__(self, other: "HomogeneousPart") -> "HomogeneousPart":
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise DimensionMismatch("homogeneous parts differ in dim or degree")
        return HomogeneousPart(self.dim, self.degree, self.coeffs + other.coeffs)


@dataclass(frozen=True, eq=False)
class TaylorPoly:
    dim: int
    trunc_degree: int
    coeffs: np.ndarray
    valid_degree: int | None = None
    exact: bool = True
    tail_contaminated: bool = False

    def __post_init__(self):
        b = basis(self.dim, self.trunc_degree)
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (b.size,):
            raise ValueError(
                f"expected {b.size} coefficients for dim={self.dim}, "
                f"degree={self.trunc_degree}, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        valid = self.trunc_degree if self.valid_degree is None else int(self.valid_degree)
        if not 0 <= valid <= self.trunc_degree:
            raise ValueError("valid_degree must lie in [0, trunc_degree]")
        object.__setattr__(self, "valid_degree", valid)

    # construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, dim: int, degree: int, *, exact: bool = True) -> "TaylorPoly":
        return cls(dim, degree, np.zeros(basis(dim, degree).size, dtype=complex), exact=exact)

    @classmethod
    def from_terms(
        cls,
        dim: int,
        degree: int,
        terms: Mapping,
        *,
        valid_degree: int | None = None,
        exact: bool = True,
    ) -> "TaylorPoly":
        b = basis(dim, degree)
        coeffs = np.zeros(b.size, dtype=complex)
        for alpha, value in terms.items():
            alpha = _as_tuple(alpha)
            if len(alpha) != dim:
                raise DimensionMismatch(f"multi-index {alpha} does not have length {dim}")
            if sum(alpha) > degree:
                raise ValueError(f"multi-index {alpha} exceeds truncation degree {degree}")
            coeffs[b.index[alpha]] += value
        return cls(dim, degree, coeffs, valid_degree, exact=exact)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, degree: int, **kwargs) -> "TaylorPoly":
        dim = tensor.ndim
        b = basis(dim, degree)
        return cls(dim, degree, tensor[b.tensor_index], **kwargs)

    # views ----------------------------------------------------------------

    @property
    def basis(self) -> _Basis:
        return basis(self.dim, self.trunc_degree)

    @property
    def exponents(self) -> np.ndarray:
        return self.basis.exps

    def coefficient(self, alpha) -> complex:
        alpha = _as_tuple(alpha)
        if len(alpha) != self.dim:
            raise DimensionMismatch(f"multi-index {alpha} does not have length {self.dim}")
        if sum(alpha) > self.trunc_degree:
            return 0j
        return complex(self.coeffs[self.basis.index[alpha]])

    def homogeneous(self, k: int) -> HomogeneousPart:
        if k > self.trunc_degree:
            blk = basis(self.dim, k).block(k)
            return HomogeneousPart(self.dim, k, np.zeros(blk.stop - blk.start))
        return HomogeneousPart(self.dim, k, self.coeffs[self.basis.block(k)])

    def terms(self) -> dict[tuple[int, ...], complex]:
        """Nonzero coefficients keyed by exponent tuple."""
        return {
            tuple(int(e) for e in alpha): complex(c)
            for alpha, c in zip(self.basis.exps, self.coeffs)
            if c != 0
        }

    def to_tensor(self) -> np.ndarray:
        t = np.zeros((self.trunc_degree + 1,) * self.dim, dtype=complex)
        t[self.basis.tensor_index] = self.coeffs
        return t

    def truncate(self, degree: int) -> "TaylorPoly":
        degree = min(degree, self.trunc_degree)
        if degree < 0:
            raise ValueError("degree must be non-negative")
        size = basis(self.dim, degree).size
        exact = self.exact and not np.any(self.coeffs[size:])
        return TaylorPoly(
            self.dim,
            degree,
            self.coeffs[:size],
            min(self.valid_degree, degree),
            exact=exact,
            tail_contaminated=self.tail_contaminated,
        )

    def extend(self, degree: int) -> "TaylorPoly":
        """Zero-pad to a larger truncation; only meaningful for exact inputs."""
        if degree <= self.trunc_degree:
            return self.truncate(degree)
        coeffs = np.zeros(basis(self.dim, degree).size, dtype=complex)
        coeffs[: self.basis.size] = self.coeffs
        valid = degree if self.exact else self.valid_degree
        return TaylorPoly(self.dim, degree, coeffs, valid, self.exact, self.tail_contaminated)

    def max_error(self, other: "TaylorPoly", degree: int | None = None) -> float:
        """Max coefficient difference on degrees <= ``degree`` (default: common valid range)."""
        if self.dim != other.dim:
            raise DimensionMismatch("dimension mismatch")
        if degree is None:
            degree = min(self.valid_degree, other.valid_degree)
        a = self.extend(degree).coeffs if self.exact else self.truncate(degree).coeffs
        b = other.extend(degree).coeffs if other.exact else other.truncate(degree).coeffs
        n = min(a.size, b.size)
        diff = np.abs(a[:n] - b[:n])
        tails = [np.abs(a[n:]), np.abs(b[n:])]
        return float(max([diff.max(initial=0.0)] + [t.max(initial=0.0) for t in tails]))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, TaylorPoly):
            return add(self, other)
        return add(self, TaylorPoly.from_terms(self.dim, self.trunc_degree, {(0,) * self.dim: other}))

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, TaylorPoly):
            return NotImplemented
        return scale(self, c)

    __rmul__ = __mul__

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self):
        shown = ", ".join(f"{a}: {c:.6g}" for a, c in list(self.terms().items())[:6])
        more = "" if len(self.terms()) <= 6 else ", ..."
        return (
            f"TaylorPoly(dim={self.dim}, D={self.trunc_degree}, valid={self.valid_degree}, "
            f"exact={self.exact}, {{{shown}{more}}})"
        )

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        terms = []
        for alpha, c in zip(self.basis.exps, self.coeffs):
            # keep signed zeros so the round trip is bit-exact
            if c.real == 0 and c.imag == 0 and not (np.signbit(c.real) or np.signbit(c.imag)):
                continue
            terms.append({"alpha": [int(e) for e in alpha], "re": float(c.real), "im": float(c.imag)})
        return {
            "dim": self.dim,
            "trunc_degree": self.trunc_degree,
            "valid_degree": self.valid_degree,
            "exact": self.exact,
            "tail_contaminated": self.tail_contaminated,
            "terms": terms,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TaylorPoly":
        for key in ("dim", "trunc_degree", "valid_degree", "terms"):
            if key not in data:
                raise ValueError(f"TaylorPoly record is missing field '{key}'")
        dim, degree = int(data["dim"]), int(data["trunc_degree"])
        b = basis(dim, degree)
        coeffs = np.zeros(b.size, dtype=complex)
        for term in data["terms"]:
            alpha = tuple(int(a) for a in term["alpha"])
            if len(alpha) != dim or sum(alpha) > degree:
                raise ValueError(f"term index {list(alpha)} is outside the basis")
            coeffs[b.index[alpha]] = complex(float(term["re"]), float(term["im"]))
        return cls(
            dim,
            degree,
            coeffs,
            int(data["valid_degree"]),
            exact=bool(data.get("exact", False)),
            tail_contaminated=bool(data.get("tail_contaminated", False)),
        )


def monomial(alpha, degree: int | None = None, coeff: complex = 1.0) -> TaylorPoly:
    alpha = _as_tuple(alpha)
    degree = sum(alpha) if degree is None else degree
    return TaylorPoly.from_terms(len(alpha), degree, {alpha: coeff})


def _check_dim(f: TaylorPoly, n: int):
    if f.dim != n:
        raise DimensionMismatch(f"expected dimension {f.dim}, got {n}")


def add(f: TaylorPoly, g: TaylorPoly) -> TaylorPoly:
    if f.dim != g.dim:
        raise DimensionMismatch(f"cannot add dim {f.dim} and dim {g.dim}")
    if f.exact and g.exact:
        # exact polynomials can be zero-padded without losing anything
        degree = max(f.trunc_degree, g.trunc_degree)
        a, b = f.extend(degree), g.extend(degree)
        return TaylorPoly(
            f.dim, degree, a.coeffs + b.coeffs, degree,
            exact=True, tail_contaminated=f.tail_contaminated or g.tail_contaminated,
        )
    degree = min(f.trunc_degree, g.trunc_degree)
    size = basis(f.dim, degree).size
    valid = min(f.valid_degree, g.valid_degree, degree)
    return TaylorPoly(
        f.dim,
        degree,
        f.coeffs[:size] + g.coeffs[:size],
        valid,
        exact=False,
        tail_contaminated=f.tail_contaminated or g.tail_contaminated,
    )


def scale(f: TaylorPoly, c: complex) -> TaylorPoly:
    return TaylorPoly(
        f.dim, f.trunc_degree, f.coeffs * complex(c), f.valid_degree, f.exact, f.tail_contaminated
    )


def partial_derivative(f: TaylorPoly, alpha) -> TaylorPoly:
    """``d^alpha f``: coefficient ``c_beta <- c_{beta+alpha} (beta+alpha)!/beta!``."""
    alpha = _as_tuple(alpha)
    _check_dim(f, len(alpha))
    order = sum(alpha)
    if order == 0:
        return f
    if order > f.valid_degree:
        if f.exact:
            return TaylorPoly.zeros(f.dim, 0)
        raise TruncationError(
            f"derivative of order {order} exceeds valid_degree {f.valid_degree}: "
            "no exact coefficients survive"
        )
    degree = f.trunc_degree - order
    idx, weight = _derivative_map(f.dim, f.trunc_degree, alpha)
    return TaylorPoly(
        f.dim,
        degree,
        f.coeffs[idx] * weight,
        f.valid_degree - order,
        exact=f.exact,
        tail_contaminated=f.tail_contaminated,
    )


def directional_derivative(f: TaylorPoly, a: Sequence[complex]) -> TaylorPoly:
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    _check_dim(f, a.size)
    out = None
    for i, ai in enumerate(a):
        e = [0] * f.dim
        e[i] = 1
        term = scale(partial_derivative(f, e), ai)
        out = term if out is None else add(out, term)
    return out


def taylor_shift(f: TaylorPoly, z0: Sequence[complex]) -> TaylorPoly:
    """Return ``z -> f(z0 + z)`` re-expanded at the origin.

    Works one variable at a time on the dense coefficient tensor, applying
    the upper-triangular matrix ``binom(a, b) z0_i^(a-b)`` along each axis.
    Exact (up to rounding) whenever ``f`` is an exact polynomial.
    """
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    _check_dim(f, z0.size)
    D = f.trunc_degree
    if not np.any(z0):
        return f
    tensor = f.to_tensor()
    binom = _binomial_table(D)
    powers = np.arange(D + 1)
    gap = powers[None, :] - powers[:, None]
    for axis, s in enumerate(z0):
        if s == 0:
            continue
        with np.errstate(invalid="ignore"):
            shift = np.where(gap >= 0, binom * s ** np.maximum(gap, 0), 0)
        tensor = np.moveaxis(np.tensordot(shift, tensor, axes=([1], [axis])), 0, axis)
    return TaylorPoly.from_tensor(
        tensor,
        D,
        valid_degree=f.valid_degree,
        exact=f.exact,
        tail_contaminated=f.tail_contaminated or not f.exact,
    )


def evaluate(f: TaylorPoly, z):
    """Evaluate at one point (shape ``(n,)``) or a batch (shape ``(P, n)``).

    Nested Horner scheme on the coefficient tensor, innermost variable first.
    """
    pts = np.asarray(z, dtype=complex)
    single = pts.ndim == 0 or (pts.ndim == 1 and (f.dim > 1 or pts.size == 1))
    pts = pts.reshape(-1, f.dim) if (single or pts.ndim == 1) else pts
    if pts.shape[1] != f.dim:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, expected {f.dim}")
    D = f.trunc_degree
    acc = f.to_tensor()[None, ...]  # leading axis broadcasts over points
    for axis in range(f.dim - 1, -1, -1):
        x = pts[:, axis].reshape((-1,) + (1,) * axis)
        res = acc[..., D]
        for k in range(D - 1, -1, -1):
            res = res * x + acc[..., k]
        acc = res
    out = acc.reshape(-1)
    return complex(out[0]) if single else out


def exp_of_linear(gamma: Sequence[complex], D: int) -> TaylorPoly:
    """Taylor series of ``z -> exp(<gamma, z>)`` truncated at degree ``D``.

    ``<gamma, z> = sum_i gamma_i z_i`` (bilinear pairing of C^n with its dual).
    """
    if D < 0:
        raise ValueError("degree must be non-negative")
    gamma = np.atleast_1d(np.asarray(gamma, dtype=complex))
    b = basis(gamma.size, D)
    coeffs = _exp_coefficients(gamma[None, :], b)[0]
    return TaylorPoly(gamma.size, D, coeffs, D, exact=False)


def _exp_coefficients(gammas: np.ndarray, b: _Basis) -> np.ndarray:
    """Rows ``gamma^alpha / alpha!`` for a batch of duals (shape ``(P, n)``)."""
    gammas = np.asarray(gammas, dtype=complex)
    out = np.ones((gammas.shape[0], b.size), dtype=complex)
    for i in range(b.dim):
        # powers table avoids repeated complex pow calls
        pw = gammas[:, i : i + 1] ** np.arange(b.degree + 1)[None, :]
        out *= pw[:, b.exps[:, i]]
    return out * np.exp(-b.log_factorial)[None, :]


def multi_binomial(alpha, beta) -> int:
    return math.prod(math.comb(a, b) for a, b in zip(alpha, beta))


def all_multi_indices(dim: int, degree: int):
    return [MultiIndex(e) for e in itertools.chain.from_iterable(
        _compositions(k, dim) for k in range(degree + 1))]
