"""Batch front-end: ``holodyn <experiment> --config <path> [--seed S] [--out DIR]``.

A config is a JSON object::

    {"operator": "op.json", "seed": 0, "params": {...}}

with the operator path resolved relative to the config file.  Each run writes
``<experiment>.json`` (deterministic; sorted keys, embeds the config hash and
a tolerance ledger), ``<experiment>.meta.json`` (timestamp and version) and,
for some experiments, CSV companions.

Exit codes: 0 pass, 2 invariant failure, 3 input error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .convolution import (
    OperatorSymbol,
    SymbolKind,
    alpha_estimate,
    check_commutation,
    eigen_relative_error,
    verify_exp_restriction,
)
from .dynamics import (
    FrechetMetric,
    UnitCircleArcs,
    default_radii,
    growth_fit,
    run_orbit,
    span_density_residual,
)
from .errors import HolodynError
from .norms import NormBackend
from .spectral import (
    RandomSeriesSpec,
    Taper,
    X0Element,
    build_curve,
    check_fhc_criterion,
    circle_vectors,
    sample_candidate,
)
from .taylor import TaylorPoly, all_multi_indices, exp_of_linear

EXPERIMENTS = (
    "eigen-check",
    "commutation",
    "alpha",
    "exp-restriction",
    "fhc-build",
    "fhc-criterion",
    "orbit-density",
    "growth",
    "span-density",
)

PASS, INVARIANT_FAILURE, INPUT_ERROR = 0, 2, 3

MODULE_OF = {
    "eigen-check": "convolution",
    "commutation": "convolution",
    "alpha": "convolution",
    "exp-restriction": "convolution",
    "fhc-build": "spectral",
    "fhc-criterion": "spectral",
    "orbit-density": "dynamics",
    "growth": "dynamics",
    "span-density": "dynamics",
}


class InputError(Exception):
    pass


# helpers -------------------------------------------------------------------

def _complex(x, name="value") -> complex:
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(x)
    raise InputError(f"config field '{name}' is not a complex number")


def _vector(x, dim, name) -> np.ndarray:
    if not isinstance(x, list) or len(x) != dim:
        raise InputError(f"config field '{name}' must be a list of {dim} complex numbers")
    return np.array([_complex(v, f"{name}[{i}]") for i, v in enumerate(x)])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(float(x.real)), "im": _jsonable(float(x.imag))}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def load_config(path: Path) -> tuple[dict, OperatorSymbol]:
    try:
        config = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise InputError("config must be a JSON object")
    if "operator" not in config:
        raise InputError("config field 'operator' is missing")
    op_path = (path.parent / config["operator"]).resolve()
    if not op_path.is_file():
        raise InputError(f"operator spec not found: {config['operator']}")
    try:
        op_data = json.loads(op_path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"operator spec is not valid JSON: {exc}") from None
    T = OperatorSymbol.from_dict(op_data)
    params = config.get("params", {})
    if not isinstance(params, dict):
        raise InputError("config field 'params' must be an object")
    return config, T


def _backend(params) -> NormBackend:
    b = params.get("backend", "bombieri")
    if isinstance(b, dict):
        return NormBackend(b.get("kind", "bombieri"), int(b.get("points", 2048)), int(b.get("rounds", 4)), int(b.get("seed", 0)))
    return NormBackend(b)


def _curve(T, p):
    dim = T.dim
    gamma0 = _vector(p.get("gamma0", [0] * dim), dim, "gamma0")
    delta = _vector(p.get("delta", [1] + [0] * (dim - 1)), dim, "delta")
    taper = p.get("taper")
    if taper is not None:
        taper = Taper(float(taper["center"]), float(taper["half_width"]))
    t0 = p.get("t0")
    return build_curve(
        T, gamma0, delta, int(p.get("N", 256)),
        t0=None if t0 is None else _complex(t0, "t0"),
        theta_start=float(p.get("theta_start", 0.0)),
        taper=taper,
        max_loops=int(p.get("max_loops", 4)),
    )


def _function(p, dim, base: Path, key="f"):
    """A test function: ``{"exp": gamma, "D": D}``, ``{"file": path}`` or ``{"terms": [...], "D": D}``."""
    spec = p.get(key)
    if spec is None:
        raise InputError(f"config field 'params.{key}' is missing")
    if "exp" in spec:
        return exp_of_linear(_vector(spec["exp"], dim, f"{key}.exp"), int(spec.get("D", 30)))
    if "file" in spec:
        f_path = (base / spec["file"]).resolve()
        if not f_path.is_file():
            raise InputError(f"function file not found: {spec['file']}")
        return TaylorPoly.from_dict(json.loads(f_path.read_text()))
    if "terms" in spec:
        terms = {tuple(t["alpha"]): complex(t.get("re", 0.0), t.get("im", 0.0)) for t in spec["terms"]}
        D = int(spec.get("D", max(sum(a) for a in terms)))
        return TaylorPoly.from_terms(dim, D, terms)
    raise InputError(f"config field 'params.{key}' needs one of 'exp', 'file', 'terms'")


def _random_poly(rng, dim, degree):
    coeffs = rng.standard_normal((len(all_multi_indices(dim, degree)), 2))
    return TaylorPoly(dim, degree, coeffs[:, 0] + 1j * coeffs[:, 1])


def _random_duals(rng, dim, count, radius):
    g = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random((count, 1)))


# experiments --------------------------------------------------------------------

def exp_eigen_check(T, p, seed, base, out):
    D = int(p.get("D", 14))
    tol = float(p.get("tol", 1e-9))
    if "gammas" in p:
        gammas = [_vector(g, T.dim, f"gammas[{i}]") for i, g in enumerate(p["gammas"])]
    else:
        rng = np.random.default_rng(seed)
        gammas = list(_random_duals(rng, T.dim, int(p.get("count", 20)), float(p.get("radius", 2.0))))
    errs = [eigen_relative_error(T, g, D) for g in gammas]
    worst = max(errs)
    return {"max_relative_error": worst, "cases": len(errs), "D": D}, {"max_relative_error": tol}, worst <= tol


def exp_commutation(T, p, seed, base, out):
    rng = np.random.default_rng(seed)
    degree = int(p.get("degree", 4))
    tol = float(p.get("tol", 1e-10))
    worst = 0.0
    count = int(p.get("count", 20))
    for _ in range(count):
        f = _random_poly(rng, T.dim, degree)
        z0 = rng.standard_normal(T.dim) + 1j * rng.standard_normal(T.dim)
        worst = max(worst, check_commutation(T, z0, f))
    return {"max_error": worst, "cases": count, "degree": degree}, {"max_error": tol}, worst <= tol


def exp_alpha(T, p, seed, base, out):
    est = alpha_estimate(
        T, rays=int(p.get("rays", 256)), t_max=float(p.get("t_max", 8.0)), grid=int(p.get("grid", 400)), seed=seed
    )
    res = {
        "alpha": est.value,
        "certificate": est.certificate,
        "method": est.method,
        "found": est.found,
        "note": "closed form" if est.method == "closed-form" else "ray search: an upper bound on the infimum",
    }
    if T.kind is SymbolKind.DIRECTIONAL_DERIVATIVE:
        # conventional closed form |a|; the defining infimum is attained by the certificate
        res["infimum"] = float(np.linalg.norm(est.certificate))
    return res, {"alpha": 0.0 if est.method == "closed-form" else float(p.get("t_max", 8.0)) / int(p.get("grid", 400))}, True


def exp_exp_restriction(T, p, seed, base, out):
    f = _function(p, T.dim, base)
    rep = verify_exp_restriction(T, f, float(p["r"]), float(p["eps"]), _backend(p))
    res = {
        "lhs": rep.lhs, "rhs": rep.rhs, "c": rep.c, "M": rep.M, "c_eps": rep.c_eps,
        "q_inflated": rep.q_inflated, "r": rep.r, "eps": rep.eps, "holds": rep.holds,
    }
    return res, {"relative_slack": 1e-12}, rep.holds


def exp_fhc_build(T, p, seed, base, out):
    curve = _curve(T, p)
    D = int(p.get("D", 12))
    js = [int(j) for j in p.get("js", [0])]
    vecs = circle_vectors(curve, js, D)
    tol = float(p.get("tol", 1e-10))
    (out / "fhc-build.curve.csv").write_text(curve.to_csv())
    res = {
        "curve": curve.summary(),
        "vectors": [{"j": v.j, "quad_error": v.quad_error, "value": v.value.to_dict()} for v in vecs],
    }
    return res, {"curve_residual": tol, "quadrature": max(v.quad_error for v in vecs)}, curve.max_residual <= tol


def _x0(curve, p, D):
    terms = p.get("terms", [[0, 0, 1.0]])
    try:
        parsed = tuple((int(k), int(j), _complex(a, "terms")) for k, j, a in terms)
    except (TypeError, ValueError):
        raise InputError("config field 'params.terms' must be a list of [k, j, a]") from None
    return X0Element((curve,), parsed, D)


def exp_fhc_criterion(T, p, seed, base, out):
    curve = _curve(T, p)
    D = int(p.get("D", 16))
    y = _x0(curve, p, D)
    rep = check_fhc_criterion(
        T, y, int(p.get("n_terms", 8)), s=float(p.get("s", 1.0)), reference_N=p.get("reference_N")
    )
    tol = float(p.get("tol", 1e-8))
    res = rep.to_dict()
    res["curve"] = curve.summary()
    ok = rep.identity_residual <= tol and rep.continuum_residual <= tol
    return res, {"identity_residual": tol, "continuum_residual": tol, "quadrature": rep.quadrature_error}, ok


def exp_orbit_density(T, p, seed, base, out):
    curve = _curve(T, p)
    D = int(p.get("D", 12))
    J = int(p.get("J", 8))
    N = int(p.get("horizon", 10_000))
    radius = float(p.get("radius", 0.1))
    seeds = int(p.get("seeds", 10))
    freq_min = float(p.get("min_frequency", 0.01))
    share_min = float(p.get("min_share", 0.8))
    metric = FrechetMetric(_backend(p), tuple(p.get("grid", (0.5, 1.0, 2.0, 4.0))))
    target = _function(p, T.dim, base, "target") if "target" in p else TaylorPoly.zeros(T.dim, D)
    rows = []
    for k in range(seeds):
        cand = sample_candidate(RandomSeriesSpec((curve,), J, seed=seed + k), D)
        rec, den = run_orbit(T, cand, N, metric, target, radius, degree=D)
        if k == 0:
            (out / "orbit-density.orbit.csv").write_text(rec.to_csv(radius))
        rows.append({"seed": seed + k, **den.to_dict()})
    share = sum(r["frequency"] >= freq_min for r in rows) / len(rows)
    res = {
        "runs": rows,
        "share_meeting_frequency": share,
        "note": "frequency and share thresholds are conventions of this laboratory",
        "curve": curve.summary(),
    }
    return res, {"min_frequency": freq_min, "min_share": share_min, "quadrature": curve.max_residual}, share >= share_min


def exp_growth(T, p, seed, base, out):
    if "f" in p:
        f = _function(p, T.dim, base)
    else:
        curve = _curve(T, p)
        f = sample_candidate(RandomSeriesSpec((curve,), int(p.get("J", 12)), seed=seed), int(p.get("D", 24))).poly
    radii = np.asarray(p["radii"], dtype=float) if "radii" in p else default_radii(f)
    fit = growth_fit(f, radii, int(p.get("samples", 256)), seed=seed)
    res = fit.to_dict()
    ok = True
    if "expect" in p:
        ok = abs(fit.slope - float(p["expect"])) <= float(p.get("tol", 0.05))
    if "max_type" in p:
        ok = ok and fit.slope <= float(p["max_type"])
    return res, {"slope": float(p.get("tol", 0.05)), "fit_residual": fit.residual}, ok


def exp_span_density(T, p, seed, base, out):
    arcs = tuple(tuple(float(x) for x in a) for a in p.get("excluded", [[0.4, 0.6]]))
    B = UnitCircleArcs(arcs)
    beta = tuple(int(b) for b in p.get("beta", [2] + [0] * (T.dim - 1)))
    M = int(p.get("M", 60))
    D = int(p.get("D", 12))
    tol = float(p.get("tol", 1e-3))
    gamma0 = _vector(p["gamma0"], T.dim, "gamma0") if "gamma0" in p else None
    r = span_density_residual(T, B, beta, M, D, seed, gamma0, near=p.get("near"), t_max=float(p.get("t_max", 4.0)))
    lines = ["m,residual"] + [f"{m},{repr(float(v))}" for m, v in enumerate(r.curve, start=1)]
    (out / "span-density.curve.csv").write_text("\n".join(lines) + "\n")
    res = {"residual": r.residual, "admissible": len(r.gammas), "attempts": r.attempts}
    return res, {"residual": tol}, r.residual <= tol


RUNNERS = {
    "eigen-check": exp_eigen_check,
    "commutation": exp_commutation,
    "alpha": exp_alpha,
    "exp-restriction": exp_exp_restriction,
    "fhc-build": exp_fhc_build,
    "fhc-criterion": exp_fhc_criterion,
    "orbit-density": exp_orbit_density,
    "growth": exp_growth,
    "span-density": exp_span_density,
}


def run(experiment: str, config_path: Path, seed: int | None = None, out: Path | None = None) -> int:
    config_path = Path(config_path)
    config, T = load_config(config_path)
    params = config.get("params", {})
    seed = int(config.get("seed", 0)) if seed is None else int(seed)
    out = Path(out) if out is not None else config_path.parent / config.get("out", ".")
    out.mkdir(parents=True, exist_ok=True)
    if experiment != "alpha" and experiment != "eigen-check" and experiment != "commutation":
        if T.kind is SymbolKind.SCALED_IDENTITY or T.is_trivial:
            raise InputError("operator is a multiple of the identity; dynamics experiments need a non-trivial operator")
    canonical = {"experiment": experiment, "operator": T.to_dict(), "params": params, "seed": seed}
    digest = hashlib.sha256(json.dumps(_jsonable(canonical), sort_keys=True).encode()).hexdigest()
    results, tolerances, ok = RUNNERS[experiment](T, params, seed, config_path.parent, out)
    report = {
        "experiment": experiment,
        "config_hash": digest,
        "operator": T.to_dict(),
        "params": params,
        "seed": seed,
        "results": results,
        "tolerances": tolerances,
        "status": "pass" if ok else "fail",
    }
    (out / f"{experiment}.json").write_text(_dump(report))
    meta = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), "version": __version__, "config_hash": digest}
    (out / f"{experiment}.meta.json").write_text(_dump(meta))
    return PASS if ok else INVARIANT_FAILURE


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="holodyn", description="Convolution-operator dynamics laboratory.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args(argv)
    try:
        code = run(args.experiment, args.config, args.seed, args.out)
    except InputError as exc:
        print(f"holodyn: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except HolodynError as exc:
        print(f"holodyn: {MODULE_OF[args.experiment]}: precondition violated: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (KeyError, TypeError, ValueError) as exc:
        print(f"holodyn: malformed config: {exc!r}", file=sys.stderr)
        return INPUT_ERROR
    print(f"holodyn: {args.experiment}: {'pass' if code == PASS else 'invariant failure'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
