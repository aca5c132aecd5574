"""Random series over the translation's eigenvector curve, and their orbits.

The translation by 1 has symbol ``exp(gamma)``; its eigenvector curve is the
open segment ``gamma = 2 pi i theta``, so a smooth taper closes it off.  A
gaussian combination of circle integrals is sampled and its orbit followed
exactly, as a finite exponential sum.  On the trapezoid grid every
eigenvalue is an N-th root of unity, so the discretized orbit has period N;
the lower density is read after a burn-in of one period.
"""
from __future__ import annotations

from holodyn import FrechetMetric, OperatorSymbol, RandomSeriesSpec, Taper, TaylorPoly, build_curve, run_orbit, sample_candidate


def main():
    T = OperatorSymbol.translation([1])
    curve = build_curve(T, [0], [1], N=256, theta_start=-0.5, taper=Taper(0.0, 0.25))
    print(f"monodromy after one loop: {curve.monodromy:.6f} (2 pi i = {2j * 3.141592653589793:.6f})")
    metric = FrechetMetric()
    target = TaylorPoly.zeros(1, 12)
    for seed in range(5):
        cand = sample_candidate(RandomSeriesSpec((curve,), J=8, seed=seed), 12)
        record, dens = run_orbit(T, cand, 10_000, metric, target, 0.1, degree=12, burn_in=256)
        print(
            f"seed {seed}: visits {dens.visits:5d} / {record.steps}, frequency {dens.frequency:.3f}, "
            f"min running density after burn-in {dens.lower_density:.3f}"
        )


if __name__ == "__main__":
    main()
