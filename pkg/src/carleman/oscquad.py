"""Oscillatory quadrature building blocks.

Three tools shared by the scattering solver, the stationary-phase engine and
the Hankel eigenfunction integrals:

* exact moments of exp(mu u) against monomials / Lagrange bases on intervals,
  anchored so no exponential ever exceeds unit modulus (Filon-type product
  integration with geometric panels stays legitimate for any frequency);
* phase-equidistributed Gauss panels for integrands written as
  amplitude * exp(i phase) with an explicitly known phase;
* a two-term integration-by-parts closure for truncated tails
  int_X^inf exp(i phi) A dx, with jets supplying the derivatives.
"""

from __future__ import annotations

import numpy as np

from ._jets import Jet

_GL_CACHE: dict = {}


def gauss_rule(p):
    if p not in _GL_CACHE:
        _GL_CACHE[p] = np.polynomial.legendre.leggauss(p)
    return _GL_CACHE[p]


def lagrange_coeff_matrix(nodes):
    """C with l_r(u) = sum_l C[l, r] u^l for the Lagrange basis on `nodes`."""
    V = np.vander(nodes, increasing=True)
    return np.linalg.inv(V)


def exp_monomial_moments(mu, anchor, lo, hi, count):
    """m_l = int_lo^hi u^l exp(mu (u - anchor)) du for l = 0..count-1.

    The caller must pick `anchor` so Re(mu (u - anchor)) <= 0 on [lo, hi];
    every intermediate then has modulus <= |hi - lo| and the upward recursion
    is safe for |mu (hi-lo)| >= ~12, with Gauss quadrature below that.
    """
    mu = complex(mu)
    width = hi - lo
    if abs(mu) * max(abs(hi), abs(lo), 1.0) < 14.0:
        x, w = gauss_rule(32)
        c, s = 0.5 * (lo + hi), 0.5 * width
        u = c + s * x
        e = np.exp(mu * (u - anchor)) * (s * w)
        pows = u[None, :] ** np.arange(count)[:, None]
        return pows @ e
    out = np.empty(count, dtype=complex)
    elo = np.exp(mu * (lo - anchor))
    ehi = np.exp(mu * (hi - anchor))
    out[0] = (ehi - elo) / mu
    for l in range(1, count):
        out[l] = (hi ** l * ehi - lo ** l * elo) / mu - (l / mu) * out[l - 1]
    return out


def exp_lagrange_moments(mu, anchor, lo, hi, coeff_matrix):
    """int_lo^hi exp(mu (u - anchor)) l_r(u) du for the Lagrange basis."""
    m = exp_monomial_moments(mu, anchor, lo, hi, coeff_matrix.shape[0])
    return coeff_matrix.T @ m


def equidistribute_edges(x_samples, phase_samples, max_dphase):
    """Panel edges along x_samples so each panel spans <= max_dphase of phase.

    phase_samples need not be monotone; the arc length of the phase is used.
    """
    x_samples = np.asarray(x_samples, dtype=float)
    arc = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(phase_samples)))))
    total = arc[-1]
    n_panels = max(int(np.ceil(total / max_dphase)), 1)
    targets = np.linspace(0.0, total, n_panels + 1)
    edges = np.interp(targets, arc, x_samples)
    edges[0], edges[-1] = x_samples[0], x_samples[-1]
    return np.unique(edges)


def integrate_panels(f, edges, p=12):
    """sum of Gauss-p integrals of f over consecutive [edges[i], edges[i+1]]."""
    x, w = gauss_rule(p)
    lo, hi = edges[:-1], edges[1:]
    c, s = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = c[:, None] + s[:, None] * x[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return np.sum((vals @ w) * s)


def integrate_oscillatory(amplitude, phase, a, b, phase_samples=None,
                          max_dphase=np.pi, p=12, min_samples=257):
    """int_a^b amplitude(x) exp(i phase(x)) dx with phase-aware panels.

    `phase` is evaluated exactly inside the quadrature, so no phase error
    accumulates; panels only need the amplitude to be smooth, which the
    equidistribution guarantees for any frequency profile.
    """
    if b <= a:
        return 0.0 + 0.0j
    if phase_samples is None:
        xs = np.linspace(a, b, min_samples)
        phase_samples = (xs, phase(xs))
    edges = equidistribute_edges(phase_samples[0], phase_samples[1], max_dphase)

    def f(x):
        return amplitude(x) * np.exp(1j * phase(x))

    return integrate_panels(f, edges, p=p)


def ibp_boundary(amp_jet: Jet, phase_jet: Jet, order: int = 2):
    """Antiderivative boundary series S(y) of int exp(i phi) A dx by parts.

    int_c^d exp(i phi) A dx = S(d) - S(c) + remainder, where S collects
    `order` integration-by-parts terms evaluated from the jets at one point.
    Returns (S, magnitude of the first neglected amplitude ratio).
    """
    phip = phase_jet.shift()
    e = np.exp(1j * phase_jet.value)
    term = amp_jet
    total = 0.0 + 0.0j
    last = 0.0
    for _ in range(order):
        ratio = term / (phip * 1j)
        total = total + ratio.value * e
        # next round integrates -(A/(i phi'))' by parts again
        term = -ratio.shift()
        if term.order >= 0:
            last = float(np.max(np.abs(term.value / phip.truncated(term.order).value)))
    return total, last


def ibp_tail(amp_jet: Jet, phase_jet: Jet, order: int = 2):
    """int_X^inf exp(i phi) A dx = -S(X) when A and its derivatives vanish at inf."""
    S, last = ibp_boundary(amp_jet, phase_jet, order)
    return -S, last
