"""Circle integrals of the derivative's eigenvectors rebuild the monomials.

For ``D`` on one variable the eigenvector curve is ``lambda -> e^{lambda z}``
on the unit circle, and the j-th circle integral is ``z^{-j}/(-j)!``.
"""
from __future__ import annotations

import math

import numpy as np

from holodyn import OperatorSymbol, X0Element, build_curve, check_fhc_criterion, circle_vector


def main():
    T = OperatorSymbol.directional_derivative([1])
    curve = build_curve(T, [0], [1], N=64)
    print(f"curve closed after {curve.loops} loop(s), max residual {curve.max_residual:.1e}")
    for m in (0, 3, 7, 12):
        x = circle_vector(curve, -m, 16)
        err = abs(x.value.coefficient((m,)) - 1 / math.factorial(m))
        off = np.abs(np.delete(x.value.coeffs, m)).max()
        print(f"x_(0,{-m:3d}): coefficient of z^{m} off by {err:.1e}, other coefficients <= {off:.1e}")
    y = X0Element.basis_vector((curve,), 0, 0, 16)
    rep = check_fhc_criterion(T, y, n_terms=10)
    print(f"T^j u_n y = u_(n-j) y on {rep.pairs} pairs: residual {rep.identity_residual:.1e}")
    print("p_1(u_n y):", " ".join(f"{t:.1e}" for t in rep.u_terms))


if __name__ == "__main__":
    main()
