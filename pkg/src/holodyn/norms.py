"""Norm families on homogeneous polynomials and the seminorms built from them.

Three backends model a holomorphy type on C^n with the Euclidean norm:

* ``BOMBIERI``  -- Hilbert-Schmidt (Bombieri) norm,
  ``||P||^2 = sum_alpha |c_alpha|^2 alpha!/k!``.  Satisfies
  ``||<gamma, .>^k|| = |gamma|_2^k`` exactly.
* ``COEFF_L1``  -- sum of absolute coefficients.
* ``SUP_SAMPLED`` -- max of ``|P|`` over seeded sample points of the unit
  sphere, refined by local search.  A lower bound for the sup norm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import PreconditionError
from .taylor import HomogeneousPart, TaylorPoly, basis, directional_derivative, evaluate


class NormKind(enum.Enum):
    BOMBIERI = "bombieri"
    COEFF_L1 = "coeff_l1"
    SUP_SAMPLED = "sup_sampled"


@dataclass(frozen=True)
class NormBackend:
    kind: NormKind = NormKind.BOMBIERI
    points: int = 2048
    rounds: int = 4
    seed: int = 0

    def __post_init__(self):
        kind = NormKind(self.kind) if not isinstance(self.kind, NormKind) else self.kind
        object.__setattr__(self, "kind", kind)
        if kind is NormKind.SUP_SAMPLED and self.points < 1:
            raise PreconditionError("SUP_SAMPLED needs at least one sample point")
        if self.rounds < 0:
            raise PreconditionError("refinement rounds must be non-negative")


BOMBIERI = NormBackend(NormKind.BOMBIERI)
COEFF_L1 = NormBackend(NormKind.COEFF_L1)


class Flavor(enum.Enum):
    P_S = "p_s"
    Q_R = "q_r"


@dataclass(frozen=True)
class SeminormFamily:
    backend: NormBackend = BOMBIERI
    flavor: Flavor = Flavor.P_S
    grid: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        grid = tuple(float(s) for s in self.grid)
        if any(s <= 0 for s in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise PreconditionError("parameter grid must be increasing and positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "flavor", Flavor(self.flavor))


class Seminorm(NamedTuple):
    value: float
    tail: float  # magnitude of the last summed term


class TypeEstimate(NamedTuple):
    value: float
    window: tuple[int, int]


# sampling on the unit sphere ------------------------------------------------

def sphere_points(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sphere_max(func, n: int, radius: float, count: int, rounds: int, rng) -> float:
    """Max of ``func`` (vectorized over ``(P, n)`` points) on the sphere of given radius.

    For ``n == 1`` the circle is sampled on a uniform grid; otherwise on seeded
    random points.  Each refinement round perturbs the best points with a
    shrinking step and keeps improvements.
    """
    if n == 1:
        theta = 2 * np.pi * np.arange(count) / count
        pts = np.exp(1j * theta)[:, None]
    else:
        pts = sphere_points(rng, n, count)
    vals = func(radius * pts)
    step = 2 * np.pi / count if n == 1 else 0.5
    keep = min(8, len(vals))
    for _ in range(rounds):
        best = pts[np.argsort(vals)[-keep:]]
        if n == 1:
            offsets = np.linspace(-step, step, 9)
            cand = (best[:, 0][:, None] * np.exp(1j * offsets)[None, :]).reshape(-1, 1)
        else:
            noise = rng.standard_normal((keep, 16, n)) + 1j * rng.standard_normal((keep, 16, n))
            cand = (best[:, None, :] + step * noise).reshape(-1, n)
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        cvals = func(radius * cand)
        pts = np.concatenate([pts, cand])
        vals = np.concatenate([vals, cvals])
        step /= 4
    return float(vals.max())


# norms ---------------------------------------------------------------------

def _bombieri_weights(dim: int, k: int) -> np.ndarray:
    b = basis(dim, k)
    return np.exp(b.log_factorial[b.block(k)] - math.lgamma(k + 1))


def hom_norm(P: HomogeneousPart, backend: NormBackend = BOMBIERI) -> float:
    kind = backend.kind
    if kind is NormKind.BOMBIERI:
        w = _bombieri_weights(P.dim, P.degree)
        return float(np.sqrt(np.sum(np.abs(P.coeffs) ** 2 * w)))
    if kind is NormKind.COEFF_L1:
        return float(np.sum(np.abs(P.coeffs)))
    if not np.any(P.coeffs):
        return 0.0
    if P.dim == 1:
        return float(abs(P.coeffs[0]))
    poly = P.to_poly()
    rng = np.random.default_rng(backend.seed)
    return sphere_max(lambda z: np.abs(evaluate(poly, z)), P.dim, 1.0, backend.points, backend.rounds, rng)


def degree_norms(f: TaylorPoly, backend: NormBackend = BOMBIERI, upto: int | None = None) -> np.ndarray:
    """``||f_k||`` for k = 0..upto (default ``valid_degree``)."""
    upto = f.valid_degree if upto is None else upto
    if backend.kind is NormKind.SUP_SAMPLED:
        return np.array([hom_norm(f.homogeneous(k), backend) for k in range(upto + 1)])
    return _degree_norms(f.coeffs[None, :], f.dim, upto, backend)[0]


def _degree_norms(coeffs: np.ndarray, dim: int, upto: int, backend: NormBackend) -> np.ndarray:
    """Vectorized per-degree norms for a batch of coefficient rows."""
    b = basis(dim, upto)
    c = coeffs[:, : b.size]
    starts = b.offsets[:-1]
    if backend.kind is NormKind.BOMBIERI:
        w = np.exp(b.log_factorial - np.array([math.lgamma(k + 1) for k in b.degrees]))
        return np.sqrt(np.add.reduceat(np.abs(c) ** 2 * w[None, :], starts, axis=1))
    if backend.kind is NormKind.COEFF_L1:
        return np.add.reduceat(np.abs(c), starts, axis=1)
    raise PreconditionError("batched norms are only available for BOMBIERI and COEFF_L1")


def _log_weights(flavor: Flavor, param: float, upto: int) -> np.ndarray:
    k = np.arange(upto + 1)
    logs = k * math.log(param)
    if flavor is Flavor.Q_R:
        # d^k f(0) = k! f_k
        logs = logs + np.array([math.lgamma(i + 1) for i in k])
    return logs


def _seminorm_weights(flavor: Flavor, param: float, upto: int) -> np.ndarray:
    return np.exp(_log_weights(flavor, param, upto))


def _weighted(flavor: Flavor, param: float, norms: np.ndarray) -> np.ndarray:
    """``weight_k * norms_k`` formed in logs, so huge weights on zero norms give 0."""
    norms = np.asarray(norms, dtype=float)
    logw = _log_weights(flavor, param, norms.shape[-1] - 1)
    with np.errstate(divide="ignore"):
        return np.where(norms > 0, np.exp(logw + np.log(norms)), 0.0)


def seminorm(f: TaylorPoly, fam: SeminormFamily, param: float) -> Seminorm:
    """``p_s(f) = sum s^k ||f_k||`` or ``q_r(f) = sum r^k ||d^k f(0)||`` over valid degrees."""
    if param <= 0:
        raise PreconditionError("seminorm parameter must be positive")
    terms = _weighted(fam.flavor, param, degree_norms(f, fam.backend))
    return Seminorm(float(terms.sum()), float(terms[-1]))


def seminorm_terms(f: TaylorPoly, fam: SeminormFamily, param: float) -> np.ndarray:
    if param <= 0:
        raise PreconditionError("seminorm parameter must be positive")
    return _weighted(fam.flavor, param, degree_norms(f, fam.backend))


def limsup_type(f: TaylorPoly, backend: NormBackend = BOMBIERI, window: int = 8) -> TypeEstimate:
    """Trailing-window estimate of ``limsup_k ||d^k f(0)||^(1/k)``."""
    if f.valid_degree < 4:
        raise PreconditionError(f"need valid_degree >= 4, got {f.valid_degree}")
    if window < 1:
        raise PreconditionError("window must be positive")
    hi = f.valid_degree
    lo = max(1, hi - window + 1)
    norms = degree_norms(f, backend)[lo : hi + 1]
    k = np.arange(lo, hi + 1)
    with np.errstate(divide="ignore"):
        logs = np.log(norms) + np.array([math.lgamma(i + 1) for i in k])
    roots = np.where(norms > 0, np.exp(logs / k), 0.0)
    return TypeEstimate(float(roots.max()), (lo, hi))


# holomorphy-type constants -------------------------------------------------

def _xlogx(n: int) -> float:
    return n * math.log(n) if n > 0 else 0.0


def c_kl_bound(k: int, l: int) -> float:
    """``(k+l)^(k+l)/(k+l)! * k!/k^k * l!/l^l`` (with ``0^0 = 1``)."""
    if k < 0 or l < 0:
        raise ValueError("k and l must be non-negative")
    if k * l == 0:
        return 1.0
    log = (
        _xlogx(k + l) - math.lgamma(k + l + 1)
        + math.lgamma(k + 1) - _xlogx(k)
        + math.lgamma(l + 1) - _xlogx(l)
    )
    return math.exp(log)


def c_kl_exact(k: int, l: int) -> Fraction:
    """Same quantity in exact rational arithmetic."""
    if k * l == 0:
        return Fraction(1)
    n = k + l
    return Fraction(n**n * math.factorial(k) * math.factorial(l), math.factorial(n) * k**k * l**l)


def c_kl_relaxed(k: int, l: int) -> float:
    """Stirling relaxation ``e^2 (kl/(k+l))^(1/2)``; meaningful for k, l >= 1."""
    if k + l == 0:
        return 0.0
    return math.e**2 * math.sqrt(k * l / (k + l))


def c_eps(eps: float) -> float:
    """Smallest ``C`` with ``max_l c_kl_bound(k, l) <= C (1+eps)^k`` for every k.

    The relaxed envelope ``e^2 sqrt(k/2)`` decays against ``(1+eps)^k`` past
    ``k* = 1/(2 log(1+eps))``; scanning to a safe multiple of ``k*`` suffices.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    kstar = 1.0 / (2.0 * math.log1p(eps))
    kmax = int(max(60, 8 * kstar))
    best = 1.0
    for k in range(kmax + 1):
        top = max(c_kl_bound(k, l) for l in range(k + 1))
        best = max(best, top / (1 + eps) ** k)
    return best


# contractions and the holomorphy-type check --------------------------------

def polar_contraction(P: HomogeneousPart, a: Sequence[complex], l: int) -> HomogeneousPart:
    """``x -> P_check(a^l, x^(k-l))`` via ``(k-l)!/k! * (D_a)^l P``."""
    k = P.degree
    if not 0 <= l <= k:
        raise ValueError("need 0 <= l <= degree")
    f = P.to_poly()
    for _ in range(l):
        f = directional_derivative(f, a)
    factor = math.factorial(k - l) / math.factorial(k)
    return f.extend(k - l).homogeneous(k - l) * factor


@dataclass
class HolomorphyTypeReport:
    backend: NormBackend
    records: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    slack: float = 1e-9

    @property
    def max_ratio(self) -> float:
        return max((r["ratio"] for r in self.records), default=0.0)

    def envelope(self) -> float:
        """Smallest ``c`` with every observed ratio <= c^k."""
        vals = [r["ratio"] ** (1.0 / r["k"]) for r in self.records if r["k"] > 0 and r["ratio"] > 0]
        return max(vals, default=1.0)


def check_holomorphy_type(
    backend: NormBackend = BOMBIERI,
    trials: int = 20,
    seed: int = 0,
    max_degree: int = 6,
    max_dim: int = 3,
) -> HolomorphyTypeReport:
    """Empirical check of ``||P_{a^l}|| <= c_{k,l} ||P|| |a|^l`` on random data.

    ``P_{a^l}`` is the contraction of the symmetric form of ``P`` with ``l``
    copies of ``a``; the tested constants are :func:`c_kl_bound`.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report = HolomorphyTypeReport(backend)
    for _ in range(trials):
        n = int(rng.integers(1, max_dim + 1))
        k = int(rng.integers(1, max_degree + 1))
        blk = basis(n, k).block(k)
        size = blk.stop - blk.start
        P = HomogeneousPart(n, k, rng.standard_normal(size) + 1j * rng.standard_normal(size))
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        norm_p = hom_norm(P, backend)
        norm_a = float(np.linalg.norm(a))
        for l in range(k + 1):
            ratio = hom_norm(polar_contraction(P, a, l), backend) / (norm_p * norm_a**l)
            rec = {"k": k, "l": l, "n": n, "ratio": ratio, "bound": c_kl_bound(k, l)}
            report.records.append(rec)
            if ratio > rec["bound"] * (1 + report.slack):
                report.violations.append(rec)
    return report
