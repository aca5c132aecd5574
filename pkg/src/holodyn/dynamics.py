"""Orbits, visit statistics, growth fits and span-density residuals."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .convolution import OperatorSymbol, SymbolKind, apply
from .errors import CriticalPointError, PreconditionError, TruncationError
from .norms import BOMBIERI, NormBackend, _degree_norms, limsup_type, sphere_max
from .spectral import Candidate, ExpSum, X0Element, _Line, _borel_many, _newton
from .taylor import TaylorPoly, _exp_coefficients, basis, evaluate, monomial


# metric ---------------------------------------------------------------------

@dataclass(frozen=True)
class FrechetMetric:
    """``d(f, g) = sum_m 2^-m rho(p_{s_m}(f - g))`` with ``rho(t) = t/(1+t)``."""

    backend: NormBackend = BOMBIERI
    grid: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)

    def __post_init__(self):
        grid = tuple(float(s) for s in self.grid)
        if not grid or any(s <= 0 for s in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise PreconditionError("metric grid must be a non-empty increasing sequence of positive reals")
        object.__setattr__(self, "grid", grid)

    @property
    def weights(self) -> np.ndarray:
        return 0.5 ** np.arange(1, len(self.grid) + 1)

    def seminorms(self, rows: np.ndarray, dim: int, degree: int) -> np.ndarray:
        """``p_s`` of each coefficient row for every grid parameter: shape ``(rows, M)``."""
        norms = _degree_norms(np.atleast_2d(rows), dim, degree, self.backend)
        k = np.arange(degree + 1)
        powers = np.array(self.grid)[None, :] ** k[:, None]
        return norms @ powers

    def from_seminorms(self, p: np.ndarray) -> np.ndarray:
        return (p / (1.0 + p)) @ self.weights

    def distance(self, f: TaylorPoly, g: TaylorPoly) -> float:
        if f.dim != g.dim:
            raise PreconditionError("dimension mismatch")
        d, diff = _difference(f, g)
        return float(self.from_seminorms(self.seminorms(diff, f.dim, d))[0])


# orbits ------------------------------------------------------------------------

@dataclass
class DensityEstimate:
    radius: float
    horizon: int
    visits: int
    frequency: float  # V_N / N
    lower_density: float  # min over m >= burn_in of V_m / m
    running: np.ndarray  # V_m / m, m = 1..N
    burn_in: int = 1

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "horizon": self.horizon,
            "visits": self.visits,
            "frequency": self.frequency,
            "lower_density": self.lower_density,
            "burn_in": self.burn_in,
            "note": "lower density is a running-minimum proxy over a finite horizon",
        }


@dataclass
class OrbitRecord:
    kind: str
    horizon: int  # steps requested
    steps: int  # steps actually taken
    distances: np.ndarray  # d(T^n f, target), n = 1..steps
    seminorms: np.ndarray  # p_s(T^n f) for each grid value, shape (steps, M)
    valid_degrees: np.ndarray
    exhausted: bool
    tail_contaminated: bool
    grid: tuple[float, ...]
    final: TaylorPoly | None = None

    def visited(self, radius: float) -> np.ndarray:
        return self.distances <= radius

    def to_csv(self, radius: float) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "distance", "visited", "running_density"])
        hits = self.visited(radius)
        running = np.cumsum(hits) / np.arange(1, hits.size + 1)
        for n, (d, v, r) in enumerate(zip(self.distances, hits, running), start=1):
            w.writerow([n, repr(float(d)), int(v), repr(float(r))])
        return buf.getvalue()


def density(record: OrbitRecord, radius: float, burn_in: int = 1) -> DensityEstimate:
    hits = record.visited(radius)
    if hits.size == 0:
        return DensityEstimate(radius, record.horizon, 0, 0.0, 0.0, np.zeros(0), burn_in)
    V = np.cumsum(hits)
    running = V / np.arange(1, hits.size + 1)
    lo = min(max(burn_in, 1), hits.size) - 1
    return DensityEstimate(
        radius, record.horizon, int(V[-1]), float(running[-1]), float(running[lo:].min()), running, burn_in
    )


def _reject_trivial(T: OperatorSymbol):
    if T.kind is SymbolKind.SCALED_IDENTITY or T.is_trivial:
        T.require_nontrivial()
        raise PreconditionError("scaled identities are not admissible here")


def run_orbit(
    T: OperatorSymbol,
    f,
    N: int,
    metric: FrechetMetric,
    target: TaylorPoly,
    delta: float,
    *,
    strict: bool = False,
    degree: int | None = None,
    burn_in: int = 1,
    chunk: int = 2048,
) -> tuple[OrbitRecord, DensityEstimate]:
    """Follow ``T^n f`` for ``n = 1..N`` and count visits to the ``delta``-ball
    around ``target`` in ``metric``.

    ``f`` may be a :class:`TaylorPoly` (iterated :func:`apply`; GENERIC
    symbols spend ``S`` valid degrees per step) or an exponential sum /
    X0 element / candidate, on which ``T^n`` is exact and computed in
    closed form at the target's degree.  When the degree budget runs out the
    record stops early with ``exhausted`` set; ``strict`` raises instead.
    """
    _reject_trivial(T)
    if N < 1:
        raise PreconditionError("horizon must be positive")
    if isinstance(f, Candidate):
        f = f.element
    if isinstance(f, X0Element):
        f = f.as_expsum()
    if isinstance(f, ExpSum):
        record = _orbit_expsum(T, f, N, metric, target, degree, chunk)
    else:
        record = _orbit_poly(T, f, N, metric, target, strict)
    return record, density(record, delta, burn_in)


def _at_degree(f: TaylorPoly, d: int) -> np.ndarray:
    if f.trunc_degree >= d:
        return f.coeffs[: basis(f.dim, d).size]
    return f.extend(d).coeffs


def _difference(f: TaylorPoly, g: TaylorPoly) -> tuple[int, np.ndarray]:
    """Coefficients of ``f - g`` on the range where both are known."""
    if f.exact and g.exact:
        d = max(f.trunc_degree, g.trunc_degree)
    elif f.exact:
        d = g.valid_degree
    elif g.exact:
        d = f.valid_degree
    else:
        d = min(f.valid_degree, g.valid_degree)
    return d, _at_degree(f, d) - _at_degree(g, d)


def _orbit_poly(T, f: TaylorPoly, N, metric, target, strict) -> OrbitRecord:
    S = T.symbol_degree
    if S is not None and not f.exact and N * S > f.valid_degree:
        msg = f"{N} steps of a degree-{S} symbol need valid_degree >= {N * S}, have {f.valid_degree}"
        if strict:
            raise PreconditionError(msg)
    dists, semis, valid = [], [], []
    exhausted = False
    cur = f
    for _ in range(N):
        try:
            cur = apply(T, cur)
        except TruncationError:
            exhausted = True
            break
        d, diff = _difference(cur, target)
        dists.append(float(metric.from_seminorms(metric.seminorms(diff, f.dim, d))[0]))
        semis.append(metric.seminorms(cur.coeffs, f.dim, cur.valid_degree)[0])
        valid.append(cur.valid_degree)
    return OrbitRecord(
        kind="poly",
        horizon=N,
        steps=len(dists),
        distances=np.array(dists),
        seminorms=np.array(semis).reshape(len(dists), len(metric.grid)),
        valid_degrees=np.array(valid, dtype=int),
        exhausted=exhausted,
        tail_contaminated=cur.tail_contaminated,
        grid=metric.grid,
        final=cur,
    )


def _orbit_expsum(T, f: ExpSum, N, metric, target, degree, chunk) -> OrbitRecord:
    D = target.valid_degree if degree is None else degree
    b = basis(f.dim, D)
    E = _exp_coefficients(f.gammas, b)
    phi = _borel_many(T, f.gammas)
    tgt = target.extend(D) if target.exact and target.trunc_degree < D else target
    if tgt.valid_degree < D:
        raise PreconditionError("target must be valid up to the orbit degree")
    tgt_c = tgt.coeffs[: b.size]
    dists = np.empty(N)
    semis = np.empty((N, len(metric.grid)))
    for start in range(1, N + 1, chunk):
        n = np.arange(start, min(start + chunk, N + 1))
        rows = (f.coeffs[None, :] * phi[None, :] ** n[:, None]) @ E
        semis[n - 1] = metric.seminorms(rows, f.dim, D)
        dists[n - 1] = metric.from_seminorms(metric.seminorms(rows - tgt_c[None, :], f.dim, D))
    final = TaylorPoly(f.dim, D, (f.coeffs * phi**N) @ E, D, exact=False)
    return OrbitRecord(
        kind="expsum",
        horizon=N,
        steps=N,
        distances=dists,
        seminorms=semis,
        valid_degrees=np.full(N, D),
        exhausted=False,
        tail_contaminated=False,
        grid=metric.grid,
        final=final,
    )


# growth -------------------------------------------------------------------------

@dataclass
class GrowthFit:
    slope: float  # exponential type estimate
    log_power: float  # coefficient of log r
    intercept: float
    inverse: float  # coefficient of 1/r
    residual: float  # rms of the fit
    radii: np.ndarray
    log_max: np.ndarray

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "log_power": self.log_power,
            "intercept": self.intercept,
            "inverse": self.inverse,
            "residual": self.residual,
            "radii": [float(r) for r in self.radii],
        }


def reliable_radius(f: TaylorPoly, backend: NormBackend = BOMBIERI) -> float:
    """Largest radius allowed by ``r * type_guess <= valid_degree / 3``."""
    if f.exact:
        return math.inf
    guess = limsup_type(f, backend).value if f.valid_degree >= 4 else 0.0
    return math.inf if guess == 0 else f.valid_degree / (3.0 * guess)


def growth_fit(
    f: TaylorPoly,
    radii: Sequence[float],
    samples_per_radius: int = 256,
    *,
    rounds: int = 3,
    seed: int = 0,
    check_range: bool = True,
) -> GrowthFit:
    """Least-squares ``log max_{|z|=r} |f| ~ slope r + kappa log r + c + mu / r``.

    These are the leading terms of ``log M(r)`` for ``z^k e^{tau z}``-like
    growth; the ``log r`` and ``1/r`` columns absorb polynomial behaviour, so
    ``slope`` estimates the exponential type.  Maxima are taken over sampled
    Euclidean spheres.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 4 or np.any(radii <= 0):
        raise PreconditionError("need at least four positive radii")
    if check_range:
        limit = reliable_radius(f)
        if radii.max() > limit * (1 + 1e-12):
            raise PreconditionError(
                f"radius {radii.max():.4g} beyond the reliable range {limit:.4g} of this truncation"
            )
    rng = np.random.default_rng(seed)
    func = lambda pts: np.abs(evaluate(f, pts))
    maxima = np.array([sphere_max(func, f.dim, r, samples_per_radius, rounds, rng) for r in radii])
    if not np.any(maxima > 0):
        raise PreconditionError("function vanishes on every sampled sphere")
    logs = np.log(np.maximum(maxima, np.finfo(float).tiny))
    A = np.stack([radii, np.log(radii), np.ones_like(radii), 1.0 / radii], axis=1)
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - logs) ** 2)))
    return GrowthFit(float(coef[0]), float(coef[1]), float(coef[2]), float(coef[3]), resid, radii, logs)


def default_radii(f: TaylorPoly, count: int = 16, span: float = 16.0, cap: float = 32.0) -> np.ndarray:
    """Geometric radii over ``[r_max/span, r_max]`` with ``r_max`` from :func:`reliable_radius`."""
    r_max = min(reliable_radius(f), cap)
    return np.geomspace(r_max / span, r_max, count)


# span density ------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitCircleArcs:
    """Unit circle with closed arcs removed; arcs given as ``(start, end)`` in turns."""

    excluded: tuple[tuple[float, float], ...] = ()
    tol: float = 1e-9

    def _allowed_angle(self, turns):
        turns = np.mod(turns, 1.0)
        ok = np.ones(np.shape(turns), dtype=bool)
        for a, b in self.excluded:
            a, b = a % 1.0, b % 1.0
            inside = (turns >= a) & (turns <= b) if a <= b else (turns >= a) | (turns <= b)
            ok &= ~inside
        return ok

    def contains(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        return (np.abs(np.abs(lam) - 1) <= self.tol) & self._allowed_angle(np.angle(lam) / (2 * np.pi))

    def is_accumulation_point(self, lam: complex) -> bool:
        """Points of the closure of an arc set are accumulation points."""
        return abs(abs(lam) - 1) <= self.tol

    def allowed_fraction(self) -> float:
        grid = (np.arange(100000) + 0.5) / 100000
        return float(self._allowed_angle(grid).mean())

    def sample(self, rng: np.random.Generator, size: int, near: complex | None = None, spread: float = 0.5) -> np.ndarray:
        """Uniform draws from the set, or from the part within ``spread`` turns of ``near``."""
        out = np.empty(0)
        while out.size < size:
            if near is None:
                u = rng.random(2 * size + 8)
            else:
                u = np.angle(near) / (2 * np.pi) + spread * (2 * rng.random(2 * size + 8) - 1)
            out = np.concatenate([out, u[self._allowed_angle(u)]])
        return np.exp(2j * np.pi * out[:size])


@dataclass
class SpanDensityResult:
    residual: float  # with all admissible duals
    curve: np.ndarray  # residual using the first m duals, m = 1..M
    gammas: np.ndarray
    attempts: int

    def at(self, m: int) -> float:
        return float(self.curve[m - 1])


def admissible_duals(
    T: OperatorSymbol,
    B: UnitCircleArcs,
    M: int,
    seed: int,
    gamma0=None,
    *,
    near: float | None = None,
    t_max: float = 4.0,
    max_attempts: int | None = None,
) -> tuple[np.ndarray, int]:
    """Draw up to ``M`` duals ``gamma`` with ``Phi(gamma)`` in ``B``.

    Each draw picks a target ``lambda`` in ``B`` (anywhere, or within
    ``near`` turns of ``Phi(gamma0)``) and a random complex direction, then
    solves ``Phi(gamma0 + t delta) = lambda`` by Newton from ``t = 0``;
    solutions with ``|t| > t_max`` are rejected.
    """
    _reject_trivial(T)
    rng = np.random.default_rng(seed)
    gamma0 = np.zeros(T.dim, dtype=complex) if gamma0 is None else np.asarray(gamma0, dtype=complex)
    centre = complex(_borel_many(T, gamma0[None, :])[0])
    if near is not None and not B.is_accumulation_point(centre):
        raise PreconditionError("Phi(gamma0) must be an accumulation point of the target set")
    max_attempts = 50 * M if max_attempts is None else max_attempts
    found, attempts = [], 0
    while len(found) < M and attempts < max_attempts:
        attempts += 1
        lam = B.sample(rng, 1, centre if near is not None else None, near or 0.5)[0]
        d = rng.standard_normal(T.dim) + 1j * rng.standard_normal(T.dim)
        d /= np.linalg.norm(d)
        line = _Line(T, gamma0, d)
        if line.constant:
            continue
        try:
            t, ok = _newton(line, 0j, lam, 1e-13, maxiter=60)
        except CriticalPointError:
            continue
        g = gamma0 + t * d
        if ok and abs(t) <= t_max and B.contains(_borel_many(T, g[None, :]))[0]:
            found.append(g)
    return np.array(found).reshape(-1, T.dim), attempts


def span_residuals(gammas: np.ndarray, beta, D: int) -> np.ndarray:
    """Relative least-squares residual of ``z^beta`` against the first m
    exponentials, for every prefix length m."""
    beta = tuple(int(b) for b in np.atleast_1d(beta))
    dim = len(beta)
    target = monomial(beta, D).coeffs
    A = _exp_coefficients(gammas, basis(dim, D)).T  # columns e^{gamma_i}|_D
    norm_b = np.linalg.norm(target)
    out = np.empty(A.shape[1])
    for m in range(1, A.shape[1] + 1):
        sub = A[:, :m]
        x, *_ = np.linalg.lstsq(sub, target, rcond=None)
        out[m - 1] = np.linalg.norm(sub @ x - target) / norm_b
    return out


def span_density_residual(
    T: OperatorSymbol,
    B: UnitCircleArcs,
    beta,
    M: int,
    D: int,
    seed: int = 0,
    gamma0=None,
    *,
    near: float | None = None,
    t_max: float = 4.0,
) -> SpanDensityResult:
    """Project ``z^beta`` onto ``span{e^gamma_i |_D : Phi(gamma_i) in B}``."""
    beta = tuple(int(b) for b in np.atleast_1d(beta))
    if len(beta) != T.dim:
        raise PreconditionError("monomial dimension differs from the operator dimension")
    if sum(beta) > D:
        raise PreconditionError("monomial degree exceeds the truncation")
    gammas, attempts = admissible_duals(T, B, M, seed, gamma0, near=near, t_max=t_max)
    if len(gammas) < min(2, M):
        raise PreconditionError(f"only {len(gammas)} admissible duals found in {attempts} attempts")
    curve = span_residuals(gammas, beta, D)
    return SpanDensityResult(float(curve[-1]), curve, gammas, attempts)
