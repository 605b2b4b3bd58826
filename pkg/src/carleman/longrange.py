"""Long-range phase construction: the sigma iteration and the phase theta.

For slowly decaying coefficients the identification operator carries a phase
correction theta(x, k) = int_0^x sigma(y, k) dy, where sigma is built by

    sigma_0 = 0,
    n k^{n-1} sigma_1     = - sum_m b_m(x) k^m,
    n k^{n-1} sigma_{j+1} = - sum_{p=2}^{n} C(n,p) sigma_j^p k^{n-p}
                            - sum_m b_m(x) (k + sigma_j)^m,

and the residual symbol is v(x,k) = n k^{n-1} (sigma_j - sigma_{j+1}).
Consecutive differences decay one power of |x|^rho faster per step, so
j > 1/rho makes the residual short-range.

The coefficients b_m may carry small imaginary parts (they are the ungauged
operator coefficients), so sigma is complex-valued; its imaginary part is
subleading in |x|.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .errors import DomainError
from .liouville import OperatorCoefficients


def _b_values(coeffs, x, gauged):
    x = np.asarray(x, dtype=float)
    if gauged:
        return coeffs.gauged_values(x)
    return coeffs.b_values(x)


def sigma_iterate(coeffs: OperatorCoefficients, j: int, x, k: float,
                  gauged: bool = False):
    """sigma_j(x, k) by the exact recursion (vectorized over x).

    gauged=True runs the iteration on the gauged coefficients b~_m (short
    range for the cosh family); default uses the raw b_m of B.
    """
    if k == 0:
        raise DomainError("k = 0: the dispersion factor n k^(n-1) vanishes")
    if j < 0 or j > 8:
        raise DomainError("iteration index j must be in 0..8")
    n = coeffs.n
    x = np.asarray(x, dtype=float)
    b = _b_values(coeffs, x, gauged)[:n]  # b_0 .. b_{n-1}
    den = n * k ** (n - 1)
    sig = np.zeros(x.shape, dtype=complex)
    for _ in range(j):
        acc = np.zeros_like(sig)
        for p in range(2, n + 1):
            acc += comb(n, p) * sig ** p * k ** (n - p)
        for m in range(n):
            acc += b[m] * (k + sig) ** m
        sig = -acc / den
    return sig


def residual_symbol(coeffs: OperatorCoefficients, j: int, x, k: float,
                    gauged: bool = False):
    """v(x,k) = n k^{n-1} (sigma_j - sigma_{j+1}); the defect of the eikonal solve."""
    n = coeffs.n
    return n * k ** (n - 1) * (sigma_iterate(coeffs, j, x, k, gauged=gauged)
                               - sigma_iterate(coeffs, j + 1, x, k, gauged=gauged))


def theta_phase(coeffs: OperatorCoefficients, j: int, x, k: float,
                gauged: bool = False):
    """theta(x,k) = int_0^x sigma_j(y,k) dy by panelwise Gauss quadrature.

    sigma is smooth and non-oscillatory; geometric panels away from the origin
    track its |y|^-rho decay.
    """
    from .oscquad import gauss_rule

    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    out = np.zeros(xs.shape, dtype=complex)
    gx, gw = gauss_rule(16)
    for i, xi in enumerate(xs):
        if xi == 0.0:
            continue
        edges = [0.0]
        h = 0.5
        while edges[-1] < abs(xi):
            edges.append(min(edges[-1] + h, abs(xi)))
            h *= 1.6
        edges = np.asarray(edges) * np.sign(xi)
        lo, hi = (edges[:-1], edges[1:]) if xi > 0 else (edges[1:], edges[:-1])
        c, s = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes = (c[:, None] + s[:, None] * gx[None, :]).ravel()
        vals = sigma_iterate(coeffs, j, nodes, k, gauged=gauged).reshape(c.size, -1)
        out[i] = np.sum((vals @ gw) * s)
    return complex(out[0]) if scalar else out
