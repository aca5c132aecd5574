"""Eigenvector curves, circle-integral vectors and random-series candidates.

An eigenvector curve solves ``Phi(gamma0 + t delta) = lambda`` for ``lambda``
on the unit circle, by predictor-corrector continuation over ``N`` uniform
nodes.  ``C(lambda) = e^{gamma(lambda)}`` then satisfies
``T C(lambda) = lambda C(lambda)`` and its Fourier coefficients

    x_j = int_T lambda^j C(lambda) dm(lambda)      (m = normalized Haar)

obey ``T x_j = x_{j+1}``.  Integrals are uniform-node trapezoid sums.

Curves whose continuation does not return to its start after a few loops
(e.g. the logarithm behind a translation) are made periodic with a C-infinity
bump taper ``psi`` supported inside one loop; ``psi(lambda) C(lambda)`` is
still an eigenvector field.

Finite combinations ``sum_m c_m e^{gamma_m}`` are kept as :class:`ExpSum`, on
which ``T`` acts exactly by ``c_m -> Phi(gamma_m) c_m``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .convolution import OperatorSymbol, SymbolKind, apply, borel_eval
from .errors import ConvergenceError, CriticalPointError, DimensionMismatch, PreconditionError
from .norms import BOMBIERI, Flavor, NormBackend, SeminormFamily, _degree_norms, _seminorm_weights
from .taylor import TaylorPoly, _exp_coefficients, basis, taylor_shift

TWO_PI = 2.0 * math.pi


# restriction of the symbol to a complex line ----------------------------------

class _Line:
    """``g(t) = Phi(gamma0 + t delta)`` with its derivative, vectorized in t."""

    def __init__(self, T: OperatorSymbol, gamma0: np.ndarray, delta: np.ndarray):
        self.T = T
        if T.kind is SymbolKind.TRANSLATION:
            self.a = complex(np.dot(gamma0, T.z0))
            self.b = complex(np.dot(delta, T.z0))
            self.coef = None
        elif T.kind is SymbolKind.SCALED_IDENTITY:
            self.coef = np.array([T.lam])
        else:
            # Phi(gamma0 + u) re-expanded, then u = t delta collapses each degree
            shifted = taylor_shift(T.poly, gamma0)
            b = shifted.basis
            mono = np.prod(delta[None, :] ** b.exps, axis=1)
            self.coef = np.bincount(b.degrees, weights=(shifted.coeffs * mono).real) + 1j * np.bincount(
                b.degrees, weights=(shifted.coeffs * mono).imag
            )
        if self.coef is not None:
            self.dcoef = np.polynomial.polynomial.polyder(self.coef) if self.coef.size > 1 else np.zeros(1)

    def value(self, t):
        if self.coef is None:
            with np.errstate(over="ignore"):  # divergent Newton iterates are rejected by the caller
                return np.exp(self.a + self.b * np.asarray(t))
        return np.polynomial.polynomial.polyval(t, self.coef)

    def deriv(self, t):
        if self.coef is None:
            with np.errstate(over="ignore", invalid="ignore"):
                return self.b * np.exp(self.a + self.b * np.asarray(t))
        return np.polynomial.polynomial.polyval(t, self.dcoef)

    @property
    def constant(self) -> bool:
        if self.coef is None:
            return self.b == 0
        return not np.any(self.coef[1:])


def _newton(line: _Line, t: complex, target: complex, tol: float, maxiter: int = 40):
    """Newton for ``g(t) = target``.  Returns ``(t, converged)``."""
    r = line.value(t) - target
    for _ in range(maxiter):
        d = line.deriv(t)
        if abs(d) < 1e-14:
            raise CriticalPointError(f"symbol derivative along the line vanishes near t = {t:.6g}")
        step = r / d
        t_new = t - step
        r_new = line.value(t_new) - target
        if not np.isfinite(r_new) or abs(r_new) > 2 * abs(r) + 1e-300 and abs(r) > tol:
            return t, False
        t, r = t_new, r_new
        if abs(r) <= tol:
            # one polishing step is cheap and removes the last rounding
            d = line.deriv(t)
            t_pol = t - r / d
            if abs(line.value(t_pol) - target) <= abs(r):
                t = t_pol
            return t, True
    return t, abs(r) <= tol


# taper ----------------------------------------------------------------------

@dataclass(frozen=True)
class Taper:
    """Bump ``exp(1 - 1/(1 - u^2))``, ``u = (theta - center)/half_width``; theta in loops."""

    center: float
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise PreconditionError("taper half-width must be positive")

    def __call__(self, theta):
        u = (np.asarray(theta, dtype=float) - self.center) / self.half_width
        out = np.zeros_like(u)
        inside = np.abs(u) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out


# eigenvector curves -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenCurve:
    operator: OperatorSymbol
    base: np.ndarray
    direction: np.ndarray
    N: int
    loops: int
    closed: bool
    theta_start: float
    thetas: np.ndarray  # node parameters in loops, length loops*N
    params: np.ndarray  # t_m
    residuals: np.ndarray
    monodromy: complex  # t(theta_start + 1) - t(theta_start) after one loop
    taper: Taper | None = None
    flagged: tuple[int, ...] = ()

    @property
    def lambdas(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.thetas)

    @property
    def points(self) -> np.ndarray:
        """Duals ``gamma_m = gamma0 + t_m delta`` (shape ``(nodes, n)``)."""
        return self.base[None, :] + self.params[:, None] * self.direction[None, :]

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of the normalized Haar measure, times the taper."""
        w = np.full(self.params.size, 1.0 / self.params.size)
        if self.taper is not None:
            w = w * self.taper(self.thetas)
        return w

    @property
    def support(self) -> np.ndarray:
        return self.weights != 0

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def max_gamma(self) -> float:
        """Largest ``|gamma_m|`` over nodes carrying weight."""
        pts = self.points[self.support]
        return float(np.linalg.norm(pts, axis=1).max()) if pts.size else 0.0

    @property
    def winding(self) -> float:
        """Loops needed to close; ``inf`` for open curves."""
        return float(self.loops) if self.closed else math.inf

    @property
    def symbol_values(self) -> np.ndarray:
        """``Phi(gamma_m)`` as actually attained (equal to ``lambda_m`` up to the residual)."""
        return _borel_many(self.operator, self.points)

    def second_differences(self) -> np.ndarray:
        t = self.params
        if self.closed:
            return np.abs(np.roll(t, -1) - 2 * t + np.roll(t, 1))
        return np.abs(t[2:] - 2 * t[1:-1] + t[:-2])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "lambda_re", "lambda_im", "t_re", "t_im", "residual"])
        for m, (lam, t, r) in enumerate(zip(self.lambdas, self.params, self.residuals)):
            w.writerow([m, repr(lam.real), repr(lam.imag), repr(t.real), repr(t.imag), repr(float(r))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "N": self.N,
            "loops": self.loops,
            "closed": self.closed,
            "monodromy": [self.monodromy.real, self.monodromy.imag],
            "max_residual": self.max_residual,
            "max_second_difference": float(self.second_differences().max()),
            "max_gamma": self.max_gamma,
            "taper": None if self.taper is None else [self.taper.center, self.taper.half_width],
            "flagged": list(self.flagged),
        }


def _borel_many(T: OperatorSymbol, gammas: np.ndarray) -> np.ndarray:
    from .convolution import _borel_many as bm

    return bm(T, gammas)


def _seed(line: _Line, target: complex, t0, tol: float) -> complex:
    starts = [] if t0 is None else [complex(t0)]
    starts += [0, 1, -1, 1j, -1j, 2, -2, 2j, -2j, 0.5 + 0.5j, -0.5 - 0.5j]
    anchor = 0j if t0 is None else complex(t0)
    roots = []
    for s in starts:
        try:
            t, ok = _newton(line, complex(s), target, tol)
        except CriticalPointError:
            continue
        if ok:
            roots.append(t)
            if t0 is not None:
                break
    if not roots:
        raise ConvergenceError("no starting parameter with |Phi| = 1 found on the line", node=0)
    return min(roots, key=lambda t: (round(abs(t - anchor), 10), round(-t.real, 10), t.imag))


def build_curve(
    T: OperatorSymbol,
    gamma0: Sequence[complex],
    delta: Sequence[complex],
    N: int = 256,
    *,
    t0: complex | None = None,
    theta_start: float = 0.0,
    taper: Taper | None = None,
    max_loops: int = 4,
    tol: float = 1e-13,
    max_halvings: int = 30,
) -> EigenCurve:
    """Continue ``t(theta)`` with ``Phi(gamma0 + t delta) = e^{2 pi i theta}``.

    Starting at ``theta_start``, nodes are visited in steps of ``1/N``.  After
    each full loop the parameter is compared with its start; the curve is
    closed at the first loop count where it returns.  Otherwise a single loop
    is kept, the monodromy recorded, and a taper applied (default: centred
    on the loop, half-width 1/4).
    """
    T.require_nontrivial()
    gamma0 = np.atleast_1d(np.asarray(gamma0, dtype=complex))
    delta = np.atleast_1d(np.asarray(delta, dtype=complex))
    if gamma0.size != T.dim or delta.size != T.dim:
        raise DimensionMismatch("base point and direction must match the operator dimension")
    if N < 4:
        raise PreconditionError("need at least 4 nodes")
    line = _Line(T, gamma0, delta)
    if line.constant:
        raise PreconditionError("symbol is constant along the chosen line")

    t = _seed(line, np.exp(2j * np.pi * theta_start), t0, tol)
    ts = [t]
    loops, closed = 1, False
    h_node = 1.0 / N
    theta = theta_start
    monodromy = 0j
    for loop in range(1, max_loops + 1):
        for m in range(N):
            node = (loop - 1) * N + m
            t = _advance(line, t, theta, h_node, tol, max_halvings, node)
            theta = theta_start + (node + 1) * h_node
            ts.append(t)
        if loop == 1:
            monodromy = ts[N] - ts[0]
        if abs(ts[-1] - ts[0]) <= 1e-8 * (1 + abs(ts[0])):
            loops, closed = loop, True
            break
    if closed:
        params = np.array(ts[: loops * N])
    else:
        loops = 1
        params = np.array(ts[:N])
        if taper is None:
            taper = Taper(theta_start + 0.5, 0.25)
    if taper is not None and not closed:
        lo, hi = taper.center - taper.half_width, taper.center + taper.half_width
        if lo < theta_start - 1e-12 or hi > theta_start + 1 + 1e-12:
            raise PreconditionError("taper support must lie inside the continued loop")
    thetas = theta_start + np.arange(params.size) / N
    lams = np.exp(2j * np.pi * thetas)
    residuals = np.abs(line.value(params) - lams)
    flagged = tuple(int(i) for i in np.flatnonzero(np.abs(line.deriv(params)) < 1e-10))
    return EigenCurve(
        operator=T,
        base=gamma0,
        direction=delta,
        N=N,
        loops=loops,
        closed=closed,
        theta_start=float(theta_start),
        thetas=thetas,
        params=params,
        residuals=residuals,
        monodromy=complex(monodromy),
        taper=taper,
        flagged=flagged,
    )


def _advance(line: _Line, t: complex, theta: float, h: float, tol: float, max_halvings: int, node: int) -> complex:
    """Carry ``t`` from ``theta`` to ``theta + h`` with adaptive substeps."""
    done = 0.0
    step = h
    halvings = 0
    while done < h * (1 - 1e-12):
        step = min(step, h - done)
        th = theta + done
        lam = np.exp(2j * np.pi * th)
        d = line.deriv(t)
        if abs(d) < 1e-14:
            raise CriticalPointError(f"symbol derivative vanishes at node {node}", node=node)
        # tangent predictor: g'(t) dt = 2 pi i lambda dtheta
        pred = t + TWO_PI * 1j * lam / d * step
        target = np.exp(2j * np.pi * (th + step))
        try:
            t_new, ok = _newton(line, pred, target, tol)
        except CriticalPointError as exc:
            raise CriticalPointError(str(exc), node=node) from None
        # guard against jumping to another branch: the move must resemble the prediction
        if ok and abs(t_new - pred) <= 0.5 * abs(pred - t) + 1e-12:
            t = t_new
            done += step
            step *= 2
        else:
            step /= 2
            halvings += 1
            if halvings > max_halvings:
                raise ConvergenceError(f"continuation failed at node {node}", node=node)
    return t


def rebuild(curve: EigenCurve, N: int) -> EigenCurve:
    """Same curve on a different node count (same seed, loops and taper)."""
    return build_curve(
        curve.operator,
        curve.base,
        curve.direction,
        N,
        t0=complex(curve.params[0]),
        theta_start=curve.theta_start,
        taper=curve.taper,
        max_loops=max(curve.loops, 1) if curve.closed else 1,
    )


# finite exponential sums -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExpSum:
    """``z -> sum_m c_m exp(<gamma_m, z>)``: an entire function, exactly."""

    gammas: np.ndarray  # (P, n)
    coeffs: np.ndarray  # (P,)

    @property
    def dim(self) -> int:
        return self.gammas.shape[1]

    def to_poly(self, D: int) -> TaylorPoly:
        b = basis(self.dim, D)
        c = self.coeffs @ _exp_coefficients(self.gammas, b)
        return TaylorPoly(self.dim, D, c, D, exact=False)

    def apply(self, T: OperatorSymbol, power: int = 1) -> "ExpSum":
        return ExpSum(self.gammas, self.coeffs * _borel_many(T, self.gammas) ** power)

    def __call__(self, z) -> complex:
        return complex(self.coeffs @ np.exp(self.gammas @ np.asarray(z, dtype=complex)))


# circle vectors -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CircleVector:
    k: int
    j: int
    value: TaylorPoly
    N: int
    quad_error: float


def alias_guard(curve: EigenCurve, j: int, D: int):
    need = 2 * (abs(j) + D * curve.max_gamma)
    if curve.N < need:
        raise PreconditionError(
            f"N = {curve.N} too small for frequency {j} at degree {D}: need N >= {math.ceil(need)}"
        )


def _quadrature(curve: EigenCurve, js: np.ndarray, D: int, every: int = 1) -> np.ndarray:
    """Rows ``x_j`` (coefficient vectors) from every ``every``-th node."""
    sel = slice(None, None, every)
    lam = curve.lambdas[sel]
    w = curve.weights[sel] * every
    E = _exp_coefficients(curve.points[sel], basis(curve.base.size, D))
    # lambda^j computed by exact angle reduction keeps large |j| accurate
    m = np.arange(curve.params.size)[sel]
    phase = np.exp(2j * np.pi * np.mod(np.outer(js, m), curve.N) / curve.N)
    phase *= np.exp(2j * np.pi * curve.theta_start * np.asarray(js, dtype=float))[:, None]
    return (phase * w[None, :]) @ E


def circle_vectors(curve: EigenCurve, js: Iterable[int], D: int, k: int = 0, guard: bool = True) -> list[CircleVector]:
    js = np.asarray(list(js), dtype=int)
    if guard:
        for j in js:
            alias_guard(curve, int(j), D)
    full = _quadrature(curve, js, D)
    if curve.params.size % 2 == 0:
        half = _quadrature(curve, js, D, every=2)
        errs = np.abs(full - half).max(axis=1)
    else:
        errs = np.full(js.size, np.nan)
    return [
        CircleVector(k, int(j), TaylorPoly(curve.base.size, D, row, D, exact=False), curve.N, float(e))
        for j, row, e in zip(js, full, errs)
    ]


def circle_vector(curve: EigenCurve, j: int, D: int, k: int = 0, guard: bool = True) -> CircleVector:
    """Trapezoid approximation of ``x_j = int lambda^j C(lambda) dm``, truncated at ``D``."""
    return circle_vectors(curve, [j], D, k, guard)[0]


# X_0 ------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class X0Element:
    """``y = sum_l a_l x_{k_l, j_l}`` over a fixed family of curves."""

    curves: tuple[EigenCurve, ...]
    terms: tuple[tuple[int, int, complex], ...]
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "terms", tuple((int(k), int(j), complex(a)) for k, j, a in self.terms))
        for k, _, _ in self.terms:
            if not 0 <= k < len(self.curves):
                raise PreconditionError(f"curve index {k} out of range")

    @classmethod
    def basis_vector(cls, curves, k: int, j: int, degree: int) -> "X0Element":
        return cls(tuple(curves), ((k, j, 1.0),), degree)

    def shift(self, n: int) -> "X0Element":
        """``u_n``: every frequency moves down by ``n``."""
        return replace(self, terms=tuple((k, j - n, a) for k, j, a in self.terms))

    def advance(self, n: int) -> "X0Element":
        """``T^n`` acting through ``T x_{k,j} = x_{k,j+1}``."""
        return self.shift(-n)

    def __add__(self, other: "X0Element") -> "X0Element":
        if other.curves is not self.curves and len(other.curves) != len(self.curves):
            raise PreconditionError("elements live on different curve families")
        return X0Element(self.curves, self.terms + other.terms, min(self.degree, other.degree))

    def scale(self, c: complex) -> "X0Element":
        return replace(self, terms=tuple((k, j, a * c) for k, j, a in self.terms))

    def with_curves(self, curves) -> "X0Element":
        return replace(self, curves=tuple(curves))

    def materialize(self, D: int | None = None, guard: bool = True) -> TaylorPoly:
        D = self.degree if D is None else D
        dim = self.curves[0].base.size if self.curves else 1
        acc = np.zeros(basis(dim, D).size, dtype=complex)
        for k, curve in enumerate(self.curves):
            mine = [(j, a) for kk, j, a in self.terms if kk == k and a != 0]
            if not mine:
                continue
            js = np.array([j for j, _ in mine])
            if guard:
                for j in js:
                    alias_guard(curve, int(j), D)
            rows = _quadrature(curve, js, D)
            acc += np.array([a for _, a in mine]) @ rows
        return TaylorPoly(dim, D, acc, D, exact=False)

    def quad_error(self, D: int | None = None) -> float:
        """Richardson (halving) estimate of the quadrature error of :meth:`materialize`."""
        D = self.degree if D is None else D
        err = 0.0
        for k, curve in enumerate(self.curves):
            mine = [(j, a) for kk, j, a in self.terms if kk == k and a != 0]
            if not mine or curve.params.size % 2:
                continue
            js = np.array([j for j, _ in mine])
            a = np.array([a for _, a in mine])
            diff = a @ (_quadrature(curve, js, D) - _quadrature(curve, js, D, every=2))
            err = max(err, float(np.abs(diff).max()))
        return err

    def as_expsum(self) -> ExpSum:
        """The trapezoid sum written out as a finite exponential sum."""
        gammas, coeffs = [], []
        for k, curve in enumerate(self.curves):
            mine = [(j, a) for kk, j, a in self.terms if kk == k and a != 0]
            if not mine:
                continue
            js = np.array([j for j, _ in mine])
            a = np.array([a for _, a in mine])
            m = np.arange(curve.params.size)
            phase = np.exp(2j * np.pi * np.mod(np.outer(js, m), curve.N) / curve.N)
            phase *= np.exp(2j * np.pi * curve.theta_start * js.astype(float))[:, None]
            c = (a @ phase) * curve.weights
            keep = curve.support
            gammas.append(curve.points[keep])
            coeffs.append(c[keep])
        if not gammas:
            dim = self.curves[0].base.size if self.curves else 1
            return ExpSum(np.zeros((0, dim), dtype=complex), np.zeros(0, dtype=complex))
        return ExpSum(np.concatenate(gammas), np.concatenate(coeffs))

    def is_zero(self) -> bool:
        return all(a == 0 for _, _, a in self.terms)


def shift_u(y: X0Element, n: int) -> X0Element:
    if n < 0:
        raise PreconditionError("u_n is defined for n >= 0")
    return y.shift(n)


# frequent hypercyclicity criterion ----------------------------------------------------

@dataclass
class FHCReport:
    identity_residual: float  # T^j u_n y vs u_{n-j} y, same grid
    continuum_residual: float  # same, against a refined reference grid
    quadrature_error: float  # Richardson estimate on the working grid
    orbit_terms: list[float]  # p_s(T^n y), n = 0..n_terms
    u_terms: list[float]  # p_s(u_n y)
    orbit_decay: float  # fitted geometric ratio of the term sequence
    u_decay: float
    orbit_tail: float
    u_tail: float
    quadrature_dominates: bool
    pairs: int
    N: int
    N_reference: int
    note: str = (
        "absolute summability of term seminorms over a finite range is evidence of "
        "unconditional convergence, not a proof"
    )

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


def _geometric_ratio(terms: Sequence[float]) -> float:
    t = np.asarray(terms, dtype=float)
    pos = t > 0
    if pos.sum() < 2:
        return 0.0
    n = np.arange(t.size)[pos]
    slope = np.polyfit(n, np.log(t[pos]), 1)[0]
    return float(np.exp(slope))


def _apply_power(T: OperatorSymbol, f: TaylorPoly, j: int) -> TaylorPoly:
    for _ in range(j):
        f = apply(T, f)
    return f


def _working_degree(T: OperatorSymbol, y: X0Element, D: int, n_terms: int) -> int:
    """Degree carried through repeated translations so the dropped tail is negligible."""
    if T.kind is not SymbolKind.TRANSLATION:
        return D
    g = max((c.max_gamma for c in y.curves), default=0.0)
    R = g * (1.0 + n_terms * float(np.linalg.norm(T.z0)))
    # first degree past which the tail of exp(R) falls below 1e-18 relative to its size
    k = D
    while k * math.log(max(R, 1e-300)) - math.lgamma(k + 1) > math.log(1e-18) + 0 and k < 4000:
        k += 1
    return max(D, k + 1)


def check_fhc_criterion(
    T: OperatorSymbol,
    y: X0Element,
    n_terms: int,
    s: float = 1.0,
    backend: NormBackend = BOMBIERI,
    reference_N: int | None = None,
) -> FHCReport:
    """Check ``T^j u_n y = u_{n-j} y`` (0 <= j <= n <= n_terms) and tabulate
    the term seminorms of ``sum T^n y`` and ``sum u_n y``.

    Identities are measured twice: against the same trapezoid grid (checks
    the algebra and the application of ``T``) and against a grid refined
    ``reference_N / N`` times (default 4x; checks the continuum identity).
    """
    T.require_nontrivial()
    if n_terms < 0:
        raise PreconditionError("n_terms must be non-negative")
    D = y.degree
    S = T.symbol_degree
    if S is not None and n_terms * S > D:
        raise PreconditionError(f"degree {D} cannot carry {n_terms} applications of a degree-{S} symbol")
    N = min(c.N for c in y.curves)
    reference_N = 4 * N if reference_N is None else reference_N
    ref_y = y.with_curves(rebuild(c, reference_N * c.N // N) for c in y.curves)
    Dw = _working_degree(T, y, D, n_terms)

    def top(j):
        return D - (j * S if S is not None else 0)

    same = cont = 0.0
    pairs = 0
    for n in range(n_terms + 1):
        un = y.shift(n).materialize(Dw, guard=False)
        for j in range(n + 1):
            lhs = _apply_power(T, un, j)
            d = top(j)
            a = lhs.coeffs[: basis(y.curves[0].base.size, d).size] if y.curves else lhs.coeffs
            b_same = y.shift(n - j).materialize(d, guard=False).coeffs
            b_ref = ref_y.shift(n - j).materialize(d, guard=False).coeffs
            same = max(same, float(np.abs(a - b_same).max(initial=0.0)))
            cont = max(cont, float(np.abs(a - b_ref).max(initial=0.0)))
            pairs += 1
    fam = SeminormFamily(backend, Flavor.P_S, (s,))
    orbit_terms, u_terms = [], []
    for n in range(n_terms + 1):
        orbit_terms.append(_p_s(y.advance(n).materialize(D, guard=False), fam, s))
        u_terms.append(_p_s(y.shift(n).materialize(D, guard=False), fam, s))
    qerr = y.quad_error(D)
    tail = max(1, (n_terms + 1) // 4)
    return FHCReport(
        identity_residual=same,
        continuum_residual=cont,
        quadrature_error=qerr,
        orbit_terms=orbit_terms,
        u_terms=u_terms,
        orbit_decay=_geometric_ratio(orbit_terms),
        u_decay=_geometric_ratio(u_terms),
        orbit_tail=float(sum(orbit_terms[-tail:])),
        u_tail=float(sum(u_terms[-tail:])),
        quadrature_dominates=bool(qerr > max(same, 1e-300) and qerr > 1e-12),
        pairs=pairs,
        N=N,
        N_reference=reference_N,
    )


def _p_s(f: TaylorPoly, fam: SeminormFamily, s: float) -> float:
    norms = _degree_norms(f.coeffs[None, :], f.dim, f.valid_degree, fam.backend)[0]
    return float((_seminorm_weights(Flavor.P_S, s, f.valid_degree) * norms).sum())


# random series -------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomSeriesSpec:
    """``xi = sum_{k, -K <= j <= J} g_{k,j} x_{k,j}`` with standard complex gaussians.

    ``scale`` multiplies every draw (0 switches the law off); ``overrides``
    then pins chosen coefficients, keyed by ``(k, j)``.
    """

    curves: tuple[EigenCurve, ...]
    J: int
    seed: int = 0
    K: int | None = None
    scale: float = 1.0
    overrides: dict = field(default_factory=dict)
    s: float = 1.0  # parameter of the p_s ledger

    @property
    def lower(self) -> int:
        return self.J if self.K is None else self.K

    def frequencies(self) -> np.ndarray:
        return np.arange(-self.lower, self.J + 1)

    def draw(self) -> np.ndarray:
        """Gaussian coefficients, shape ``(curves, frequencies)``."""
        rng = np.random.default_rng(self.seed)
        js = self.frequencies()
        z = rng.standard_normal((len(self.curves), js.size, 2))
        g = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0) * self.scale
        for (k, j), v in self.overrides.items():
            if not (0 <= k < len(self.curves) and -self.lower <= j <= self.J):
                raise PreconditionError(f"override {(k, j)} outside the series window")
            g[k, j + self.lower] = complex(v)
        return g


@dataclass(frozen=True, eq=False)
class Candidate:
    poly: TaylorPoly
    element: X0Element
    ledger: list  # rows {k, j, g_re, g_im, p_s}
    spec: RandomSeriesSpec

    def expsum(self) -> ExpSum:
        return self.element.as_expsum()


def sample_candidate(spec: RandomSeriesSpec, D: int, backend: NormBackend = BOMBIERI) -> Candidate:
    g = spec.draw()
    js = spec.frequencies()
    terms = tuple((k, int(j), g[k, i]) for k in range(len(spec.curves)) for i, j in enumerate(js))
    element = X0Element(tuple(spec.curves), terms, D)
    fam = SeminormFamily(backend, Flavor.P_S, (spec.s,))
    ledger = []
    for k, curve in enumerate(spec.curves):
        for cv in circle_vectors(curve, js, D, k=k):
            gk = g[k, cv.j + spec.lower]
            ledger.append(
                {"k": k, "j": cv.j, "g_re": float(gk.real), "g_im": float(gk.imag),
                 "p_s": abs(gk) * _p_s(cv.value, fam, spec.s)}
            )
    return Candidate(element.materialize(D), element, ledger, spec)
