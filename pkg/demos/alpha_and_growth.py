"""Minimal exponential type: alpha values and fitted growth of candidates."""
from __future__ import annotations

import numpy as np

from holodyn import (
    OperatorSymbol,
    RandomSeriesSpec,
    UnitCircleArcs,
    alpha_estimate,
    build_curve,
    growth_fit,
    sample_candidate,
    span_density_residual,
)
from holodyn.dynamics import default_radii


def main():
    for label, T in [
        ("D_(0.6, 0.8i)", OperatorSymbol.directional_derivative([0.6, 0.8j])),
        ("tau_(1, 0)", OperatorSymbol.translation([1, 0])),
        ("gamma^2 / 4", OperatorSymbol.generic(1, {(2,): 0.25})),
    ]:
        est = alpha_estimate(T)
        print(f"alpha[{label}] = {est.value:.6f} ({est.method})")

    T = OperatorSymbol.directional_derivative([1])
    curve = build_curve(T, [0], [1], N=128)
    types = []
    for seed in range(20):
        f = sample_candidate(RandomSeriesSpec((curve,), J=12, seed=seed), 24).poly
        types.append(growth_fit(f, default_radii(f), seed=seed).slope)
    print(f"fitted types of 20 candidates for D: median {np.median(types):.3f}, max {max(types):.3f}")

    res = span_density_residual(OperatorSymbol.translation([1]), UnitCircleArcs(((0.4, 0.6),)), (2,), 60, 12)
    print("z^2 against exponentials with eigenvalue off the arc (0.4, 0.6):")
    for m in (5, 10, 13, 20, 60):
        print(f"  {m:2d} exponentials: relative residual {res.at(m):.1e}")


if __name__ == "__main__":
    main()
