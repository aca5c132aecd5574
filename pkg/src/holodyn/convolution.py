"""Convolution operators ``Phi(D)`` on truncated Taylor series.

A convolution operator is described by its symbol ``Phi`` on the dual space:
the Borel transform of the functional ``phi = delta_0 o T``.  Four kinds:

GENERIC
    ``Phi(gamma) = sum_alpha b_alpha gamma^alpha`` (finite degree ``S``);
    acts by ``f -> sum_alpha b_alpha d^alpha f``.
TRANSLATION(z0)
    ``Phi(gamma) = exp(<gamma, z0>)``; acts exactly by Taylor shift.
DIRECTIONAL_DERIVATIVE(a)
    ``Phi(gamma) = <gamma, a>``; the ``S = 1`` generic case.
SCALED_IDENTITY(lam)
    trivial operator ``f -> lam f``; rejected by every dynamics entry point.

Exponentials ``e^gamma`` are eigenvectors: ``T e^gamma = Phi(gamma) e^gamma``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, PreconditionError, TrivialOperatorError, TruncationError
from .norms import BOMBIERI, Flavor, NormBackend, NormKind, SeminormFamily, c_eps, limsup_type, seminorm
from .taylor import (
    TaylorPoly,
    add,
    basis,
    directional_derivative,
    evaluate,
    partial_derivative,
    scale,
    taylor_shift,
)


class SymbolKind(enum.Enum):
    GENERIC = "generic"
    TRANSLATION = "translation"
    DIRECTIONAL_DERIVATIVE = "directional_derivative"
    SCALED_IDENTITY = "scaled_identity"


def _vector(v, dim=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"expected a vector of length {dim}, got {v.size}")
    return v


@dataclass(frozen=True, eq=False)
class OperatorSymbol:
    """Symbol of a convolution operator.  Use the classmethod constructors."""

    dim: int
    kind: SymbolKind
    poly: TaylorPoly | None = None  # coefficients b_alpha, as a polynomial in gamma
    z0: np.ndarray | None = None
    lam: complex | None = None

    @classmethod
    def generic(cls, dim: int, terms: dict) -> "OperatorSymbol":
        degree = max((sum(np.atleast_1d(a)) for a in terms), default=0)
        poly = TaylorPoly.from_terms(dim, int(degree), terms)
        return cls(dim, SymbolKind.GENERIC, poly=_trim(poly))

    @classmethod
    def from_coefficients(cls, poly: TaylorPoly) -> "OperatorSymbol":
        return cls(poly.dim, SymbolKind.GENERIC, poly=_trim(poly))

    @classmethod
    def translation(cls, z0: Sequence[complex]) -> "OperatorSymbol":
        z0 = _vector(z0)
        z0.setflags(write=False)
        return cls(z0.size, SymbolKind.TRANSLATION, z0=z0)

    @classmethod
    def directional_derivative(cls, a: Sequence[complex]) -> "OperatorSymbol":
        a = _vector(a)
        terms = {tuple(int(i == j) for j in range(a.size)): ai for i, ai in enumerate(a)}
        poly = TaylorPoly.from_terms(a.size, 1, terms)
        return cls(a.size, SymbolKind.DIRECTIONAL_DERIVATIVE, poly=poly)

    @classmethod
    def scaled_identity(cls, dim: int, lam: complex) -> "OperatorSymbol":
        return cls(dim, SymbolKind.SCALED_IDENTITY, lam=complex(lam))

    @property
    def direction(self) -> np.ndarray:
        if self.kind is not SymbolKind.DIRECTIONAL_DERIVATIVE:
            raise AttributeError("only directional derivatives carry a direction")
        return self.poly.coeffs[1 : 1 + self.dim].copy()

    @property
    def symbol_degree(self) -> int | None:
        """``S``; ``None`` for the infinite-order translation symbol."""
        if self.kind is SymbolKind.TRANSLATION:
            return None
        if self.kind is SymbolKind.SCALED_IDENTITY:
            return 0
        return self.poly.trunc_degree

    @property
    def is_trivial(self) -> bool:
        if self.kind is SymbolKind.SCALED_IDENTITY:
            return True
        if self.kind is SymbolKind.TRANSLATION:
            return not np.any(self.z0)
        return not np.any(self.poly.coeffs[1:])

    def require_nontrivial(self):
        if self.is_trivial:
            raise TrivialOperatorError("operator is a multiple of the identity")

    def terms(self) -> dict:
        return self.poly.terms() if self.poly is not None else {}

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        out = {"dim": self.dim, "kind": self.kind.value}
        if self.kind is SymbolKind.TRANSLATION:
            out["z0"] = _complex_list(self.z0)
        elif self.kind is SymbolKind.DIRECTIONAL_DERIVATIVE:
            out["a"] = _complex_list(self.direction)
        elif self.kind is SymbolKind.SCALED_IDENTITY:
            out["lambda"] = {"re": self.lam.real, "im": self.lam.imag}
        else:
            out["terms"] = [
                {"alpha": list(alpha), "re": c.real, "im": c.imag}
                for alpha, c in self.terms().items()
            ]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "OperatorSymbol":
        for key in ("dim", "kind"):
            if key not in data:
                raise PreconditionError(f"operator spec is missing field '{key}'")
        dim = int(data["dim"])
        try:
            kind = SymbolKind(data["kind"])
        except ValueError:
            raise PreconditionError(f"operator spec field 'kind': unknown kind {data['kind']!r}") from None
        need = {
            SymbolKind.TRANSLATION: "z0",
            SymbolKind.DIRECTIONAL_DERIVATIVE: "a",
            SymbolKind.SCALED_IDENTITY: "lambda",
            SymbolKind.GENERIC: "terms",
        }[kind]
        if need not in data:
            raise PreconditionError(f"operator spec field '{need}' is required for kind {kind.value}")
        if kind is SymbolKind.TRANSLATION:
            return cls.translation(_parse_vector(data["z0"], dim, "z0"))
        if kind is SymbolKind.DIRECTIONAL_DERIVATIVE:
            return cls.directional_derivative(_parse_vector(data["a"], dim, "a"))
        if kind is SymbolKind.SCALED_IDENTITY:
            return cls.scaled_identity(dim, _parse_complex(data["lambda"], "lambda"))
        terms = {}
        for i, t in enumerate(data["terms"]):
            if "alpha" not in t:
                raise PreconditionError(f"operator spec field 'terms[{i}].alpha' is missing")
            alpha = tuple(int(x) for x in t["alpha"])
            if len(alpha) != dim:
                raise PreconditionError(f"operator spec field 'terms[{i}].alpha' must have length {dim}")
            terms[alpha] = terms.get(alpha, 0) + complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
        return cls.generic(dim, terms)


def _trim(poly: TaylorPoly) -> TaylorPoly:
    """Drop trailing zero degrees so ``symbol_degree`` is the true degree."""
    b = poly.basis
    nz = np.flatnonzero(poly.coeffs)
    degree = int(b.degrees[nz].max()) if nz.size else 0
    return poly.truncate(degree)


def _complex_list(v) -> list:
    return [{"re": float(c.real), "im": float(c.imag)} for c in np.atleast_1d(v)]


def _parse_complex(x, name):
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(x)
    raise PreconditionError(f"operator spec field '{name}' is not a complex number")


def _parse_vector(v, dim, name):
    if not isinstance(v, (list, tuple)) or len(v) != dim:
        raise PreconditionError(f"operator spec field '{name}' must be a list of {dim} complex numbers")
    return np.array([_parse_complex(x, f"{name}[{i}]") for i, x in enumerate(v)])


# action ---------------------------------------------------------------------

def apply(T: OperatorSymbol, f: TaylorPoly) -> TaylorPoly:
    if T.dim != f.dim:
        raise DimensionMismatch(f"operator acts on C^{T.dim}, function lives on C^{f.dim}")
    if T.kind is SymbolKind.TRANSLATION:
        return taylor_shift(f, T.z0)
    if T.kind is SymbolKind.SCALED_IDENTITY:
        return scale(f, T.lam)
    S = T.symbol_degree
    if S > f.valid_degree and not f.exact:
        raise TruncationError(
            f"symbol of degree {S} applied to a series valid only to degree {f.valid_degree}"
        )
    # add() zero-pads exact inputs and truncates to the common valid range otherwise
    out = None
    for alpha, b in T.terms().items():
        term = scale(partial_derivative(f, alpha), b)
        out = term if out is None else add(out, term)
    if out is None:  # zero symbol
        return scale(f, 0.0)
    return out


def borel_eval(T: OperatorSymbol, gamma) -> complex:
    """``Phi(gamma) = phi(e^gamma)``."""
    gamma = _vector(gamma, T.dim)
    if T.kind is SymbolKind.TRANSLATION:
        return cmath.exp(complex(np.dot(gamma, T.z0)))
    if T.kind is SymbolKind.SCALED_IDENTITY:
        return T.lam
    return evaluate(T.poly, gamma)


def borel_gradient(T: OperatorSymbol, gamma) -> np.ndarray:
    """Holomorphic gradient ``(dPhi/dgamma_i)``."""
    gamma = _vector(gamma, T.dim)
    if T.kind is SymbolKind.TRANSLATION:
        return T.z0 * borel_eval(T, gamma)
    if T.kind is SymbolKind.SCALED_IDENTITY:
        return np.zeros(T.dim, dtype=complex)
    grad = np.empty(T.dim, dtype=complex)
    for i in range(T.dim):
        e = np.zeros(T.dim)
        e[i] = 1
        grad[i] = evaluate(directional_derivative(T.poly, e), gamma) if T.poly.trunc_degree else 0
    return grad


@dataclass(frozen=True)
class FunctionalValue:
    """``phi = delta_0 o T``, evaluated directly from the symbol coefficients."""

    symbol: OperatorSymbol

    def __call__(self, f: TaylorPoly) -> complex:
        T = self.symbol
        if T.kind is SymbolKind.TRANSLATION:
            return evaluate(f, T.z0)
        if T.kind is SymbolKind.SCALED_IDENTITY:
            return T.lam * f.coefficient((0,) * f.dim)
        total = 0j
        for alpha, b in T.terms().items():
            # d^alpha f(0) = alpha! c_alpha
            total += b * math.prod(math.factorial(a) for a in alpha) * f.coefficient(alpha)
        return total

    def convolve_at(self, f: TaylorPoly, x) -> complex:
        """``(phi * f)(x) = phi(tau_x f)``."""
        return self(taylor_shift(f, x))


def functional_of(T: OperatorSymbol) -> FunctionalValue:
    return FunctionalValue(T)


def check_commutation(T: OperatorSymbol, z0, f: TaylorPoly) -> float:
    """Max coefficient gap between ``T tau_z0 f`` and ``tau_z0 T f``."""
    lhs = apply(T, taylor_shift(f, z0))
    rhs = taylor_shift(apply(T, f), z0)
    return lhs.max_error(rhs)


def eigen_relative_error(T: OperatorSymbol, gamma, D: int) -> float:
    """Relative gap in ``T e^gamma = Phi(gamma) e^gamma`` on the valid degrees.

    The error is scaled by ``(sum_alpha |b_alpha gamma^alpha|) * max|coeff e^gamma|``,
    the magnitude of the terms actually summed, so cancellation in ``Phi`` does
    not inflate it.
    """
    from .taylor import exp_of_linear

    gamma = _vector(gamma, T.dim)
    e = exp_of_linear(gamma, D)
    lhs = apply(T, e)
    top = lhs.valid_degree
    rhs = scale(e.truncate(top), borel_eval(T, gamma))
    if T.kind is SymbolKind.TRANSLATION:
        mag = abs(borel_eval(T, gamma))
    elif T.kind is SymbolKind.SCALED_IDENTITY:
        mag = abs(T.lam)
    else:
        mag = sum(abs(b) * abs(np.prod(gamma ** np.array(a))) for a, b in T.terms().items())
    denom = mag * np.abs(e.coeffs[: rhs.basis.size]).max()
    err = np.abs(lhs.coeffs[: rhs.basis.size] - rhs.coeffs).max()
    return float(err / denom) if denom > 0 else float(err)


# alpha_T --------------------------------------------------------------------

class AlphaEstimate(NamedTuple):
    value: float
    certificate: np.ndarray | None
    method: str
    found: bool


def alpha_estimate(T: OperatorSymbol, rays: int = 256, t_max: float = 8.0, grid: int = 400, seed: int = 0) -> AlphaEstimate:
    """``alpha_T = inf{|gamma| : |Phi(gamma)| = 1}``.

    Closed forms for translations (0) and directional derivatives; ray search
    otherwise, which only yields an upper bound.

    For ``D_a`` the reported value is the conventional ``|a|``.  The defining
    infimum is ``1/|a|`` (``|<a, gamma>| = 1`` forces ``|gamma| >= 1/|a|``); the
    two agree for unit ``a``.  The certificate is the minimiser
    ``conj(a)/|a|^2`` of the infimum, and :func:`alpha_ray_search` returns
    the infimum itself.
    """
    T.require_nontrivial()
    if T.kind is SymbolKind.TRANSLATION:
        return AlphaEstimate(0.0, np.zeros(T.dim, dtype=complex), "closed-form", True)
    if T.kind is SymbolKind.DIRECTIONAL_DERIVATIVE:
        a = T.direction
        norm = float(np.linalg.norm(a))
        return AlphaEstimate(norm, np.conj(a) / norm**2, "closed-form", True)
    return alpha_ray_search(T, rays=rays, t_max=t_max, grid=grid, seed=seed)


def alpha_ray_search(T: OperatorSymbol, rays: int = 256, t_max: float = 8.0, grid: int = 400, seed: int = 0) -> AlphaEstimate:
    """Scan rays ``t u`` from the origin for the first crossing of ``|Phi| = 1``.

    Each crossing is located by bisection; the smallest radius wins.
    """
    T.require_nontrivial()
    base = abs(borel_eval(T, np.zeros(T.dim))) - 1.0
    if abs(base) <= 1e-14:
        return AlphaEstimate(0.0, np.zeros(T.dim, dtype=complex), "ray-search", True)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((rays, T.dim)) + 1j * rng.standard_normal((rays, T.dim))
    # coordinate directions with a spread of phases catch axis-aligned minima
    phases = np.exp(2j * np.pi * np.arange(8) / 8)
    eye = np.eye(T.dim)
    extra = (eye[:, None, :] * phases[None, :, None]).reshape(-1, T.dim)
    dirs = np.concatenate([extra, dirs])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    ts = np.linspace(0.0, t_max, grid + 1)
    best, cert = math.inf, None
    for u in dirs:
        pts = ts[:, None] * u[None, :]
        vals = np.abs(_borel_many(T, pts)) - 1.0
        flips = np.flatnonzero(np.sign(vals[1:]) != np.sign(base))
        if flips.size == 0:
            continue
        i = flips[0]
        if ts[i] >= best:
            continue
        g = lambda t: abs(borel_eval(T, t * u)) - 1.0
        ga, gb = g(ts[i]), g(ts[i + 1])
        if gb == 0 or ga * gb > 0:  # crossing sits on the grid point itself
            t = ts[i + 1]
        else:
            t = brentq(g, ts[i], ts[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if t < best:
            best, cert = t, t * u
    if cert is None:
        return AlphaEstimate(math.inf, None, "ray-search", False)
    return AlphaEstimate(float(best), cert, "ray-search", True)


def _borel_many(T: OperatorSymbol, gammas: np.ndarray) -> np.ndarray:
    if T.kind is SymbolKind.TRANSLATION:
        return np.exp(gammas @ T.z0)
    if T.kind is SymbolKind.SCALED_IDENTITY:
        return np.full(len(gammas), T.lam)
    return evaluate(T.poly, gammas)


# exponential-type slices -----------------------------------------------------

class SliceFit(NamedTuple):
    C: complex
    p: complex
    residual: float
    winding: int
    ok: bool


def fit_exponential_slice(T: OperatorSymbol, gamma, radius: float = 1.0, points: int = 64, tol: float = 1e-6) -> SliceFit:
    """Fit ``w -> Phi(w gamma)`` on ``|w| = radius`` by ``C exp(p w)``.

    A zero-free exponential has winding number 0 on every circle and a
    single-valued logarithm that is affine in ``w``.  Symbols with zeros
    inside the circle fail the fit.
    """
    gamma = _vector(gamma, T.dim)
    w = radius * np.exp(2j * np.pi * np.arange(points) / points)
    vals = _borel_many(T, w[:, None] * gamma[None, :])
    if np.any(vals == 0):
        return SliceFit(0j, 0j, math.inf, 0, False)
    arg = np.unwrap(np.angle(np.concatenate([vals, vals[:1]])))
    winding = int(round((arg[-1] - arg[0]) / (2 * np.pi)))
    if winding != 0:
        return SliceFit(0j, 0j, math.inf, winding, False)
    logs = np.log(np.abs(vals)) + 1j * arg[:-1]
    A = np.stack([np.ones_like(w), w], axis=1)
    (logC, p), *_ = np.linalg.lstsq(A, logs, rcond=None)
    fitted = np.exp(logC + p * w)
    residual = float(np.abs(fitted - vals).max() / np.abs(vals).max())
    return SliceFit(complex(np.exp(logC)), complex(p), residual, 0, residual <= tol)


# restriction to exponential-type spaces --------------------------------------

def functional_dual_norms(T: OperatorSymbol, upto: int, backend: NormBackend = BOMBIERI) -> np.ndarray:
    """Dual norms of ``phi`` restricted to each degree ``m = 0..upto``.

    BOMBIERI: ``sqrt(m! sum |b_alpha|^2 alpha!)`` (exact, Cauchy-Schwarz).
    COEFF_L1: ``max |b_alpha| alpha!``.  For a translation by ``z0`` the
    Bombieri dual norm of point evaluation is ``|z0|^m``.
    """
    out = np.zeros(upto + 1)
    if T.kind is SymbolKind.SCALED_IDENTITY:
        out[0] = abs(T.lam)
        return out
    if T.kind is SymbolKind.TRANSLATION:
        if backend.kind is not NormKind.BOMBIERI:
            raise PreconditionError("translation dual norms are implemented for BOMBIERI only")
        return float(np.linalg.norm(T.z0)) ** np.arange(upto + 1)
    if backend.kind is NormKind.SUP_SAMPLED:
        raise PreconditionError("dual norms are not computable for SUP_SAMPLED")
    b = T.poly.basis
    fact = np.exp(b.log_factorial)
    for m in range(min(upto, T.poly.trunc_degree) + 1):
        blk = b.block(m)
        coeffs = np.abs(T.poly.coeffs[blk])
        if backend.kind is NormKind.BOMBIERI:
            out[m] = math.sqrt(math.factorial(m) * float(np.sum(coeffs**2 * fact[blk])))
        else:
            out[m] = float(np.max(coeffs * fact[blk], initial=0.0))
    return out


@dataclass
class ExpRestrictionReport:
    lhs: float  # q_r(T f)
    rhs: float  # c c_eps e^(M/r) q_{r(1+eps)}(f)
    q_inflated: float
    c: float
    M: float
    c_eps: float
    r: float
    eps: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)


def verify_exp_restriction(T: OperatorSymbol, f: TaylorPoly, r: float, eps: float, backend: NormBackend = BOMBIERI) -> ExpRestrictionReport:
    """Compare ``q_r(T f)`` with ``c c_eps e^(M/r) q_{r(1+eps)}(f)``.

    ``(c, M)`` are measured so that the degree-m dual norms of ``phi`` obey
    ``||phi_m|| <= c M^m``; ``c_eps`` comes from :func:`holodyn.norms.c_eps`.
    """
    if r <= 0 or eps <= 0:
        raise PreconditionError("r and eps must be positive")
    if f.exact:
        kind = 0.0
    else:
        kind = limsup_type(f, backend).value
    if r * (1 + eps) * kind >= 1:
        raise PreconditionError(
            f"r(1+eps) = {r * (1 + eps):.4g} is not below 1/type = {1 / kind:.4g}"
        )
    fam = SeminormFamily(backend, Flavor.Q_R)
    Tf = apply(T, f)
    lhs = seminorm(Tf, fam, r).value
    q_inf = seminorm(f, fam, r * (1 + eps)).value
    S = T.symbol_degree if T.symbol_degree is not None else f.trunc_degree
    duals = functional_dual_norms(T, max(S, 0), backend)
    c, M = fit_geometric_envelope(duals)
    ce = c_eps(eps)
    rhs = c * ce * math.exp(M / r) * q_inf
    return ExpRestrictionReport(lhs, rhs, q_inf, c, M, ce, r, eps)


def fit_geometric_envelope(values: np.ndarray) -> tuple[float, float]:
    """Smallest-M envelope ``values[m] <= c M^m`` (M from the root test, then c)."""
    values = np.asarray(values, dtype=float)
    m = np.arange(values.size)
    pos = (m >= 1) & (values > 0)
    M = float(np.max(values[pos] ** (1.0 / m[pos]))) if np.any(pos) else 0.0
    if M == 0.0:
        return float(values[0]) if values.size else 0.0, 0.0
    c = float(np.max(values / M**m))
    return c, M
