"""Stationary-phase lemma as executable code.

For J(N) = int_0^inf exp(i N w(y)) g(y) dy with w'(0) = 0, w'' nonzero on the
support [0, a] of g, the leading term is

    J(N) = (1/2) exp(i tau pi/4 + i N w(0)) sqrt(2 pi) |w''(0) N|^(-1/2) g(0) + R(N),
    tau  = sgn(w''(0) N),

and the remainder obeys

    |R(N)| <= C (kappa^(-7/2) w2^(3/2) w3 g0 + kappa^(-2) w2 g1)
              |N|^(-1) (1 + |ln|w0 N||)

with kappa = min|w''|, w_j = max|w^(j)|, g_j = max|g^(j)| on [0, a] and an
absolute constant C.  `verify_remainder` measures the implied constant; the
integral itself is evaluated by phase-equidistributed panels plus an
integration-by-parts closure, which keeps the cost bounded up to |N| ~ 1e6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev
from scipy.optimize import minimize_scalar

from ._jets import Jet
from .errors import DomainError
from .oscquad import equidistribute_edges, ibp_boundary, integrate_panels

_PHASE_CAP = 3.0          # max radians per Gauss panel
_PANEL_BUDGET = 6000      # switch to the IBP closure past this many panels
_CHEB_DEG = 220


def _cheb(f, a, b, deg=_CHEB_DEG, chop=1e-13):
    """Chebyshev interpolant with the noise tail chopped.

    Trailing coefficients at the rounding floor would otherwise be amplified
    by ~deg^2 per differentiation, wrecking omega''' for polynomial phases.
    """
    ch = Chebyshev.interpolate(lambda t: f(t), deg, domain=[a, b])
    c = ch.coef.copy()
    floor = chop * np.max(np.abs(c))
    c[np.abs(c) < floor] = 0.0
    nz = np.nonzero(c)[0]
    c = c[: nz[-1] + 1] if nz.size else c[:1]
    return Chebyshev(c, domain=[a, b])


def _jet_from_cheb(ch, x, order):
    cs = [ch]
    for _ in range(order):
        cs.append(cs[-1].deriv())
    fact = 1.0
    coeffs = []
    for j, c in enumerate(cs):
        if j > 0:
            fact *= j
        coeffs.append(c(x) / fact)
    return Jet(np.array(coeffs))


def _check_no_inflection(omega, a):
    y = np.linspace(0.0, a, 2001)
    ch = _cheb(omega, 0.0, a)
    w2 = ch.deriv(2)(y)
    if np.min(np.abs(w2)) < 1e-12 or np.min(w2) * np.max(w2) < 0:
        raise DomainError("omega'' must not vanish on [0, a]")
    return ch


def evaluate_J(omega, g, N, a, ibp_order: int = 3):
    """High-accuracy J(N) = int_0^a exp(i N omega(y)) g(y) dy.

    Panels are sized by the exact phase N*omega; if the total phase exceeds
    the panel budget, the outer piece (where the phase derivative is large)
    is closed with an integration-by-parts series instead.
    """
    N = float(N)
    ch_w = _check_no_inflection(omega, a)
    ch_g = _cheb(g, 0.0, a)
    ys = np.linspace(0.0, a, 4097)
    phase = N * omega(ys)
    arc = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(phase)))))
    total_panels = arc[-1] / _PHASE_CAP
    if total_panels <= _PANEL_BUDGET:
        y_cut = a
        sel = np.ones_like(ys, dtype=bool)
    else:
        cut_arc = _PANEL_BUDGET * _PHASE_CAP
        i_cut = int(np.searchsorted(arc, cut_arc))
        y_cut = float(ys[min(i_cut, ys.size - 1)])
        sel = ys <= y_cut
    edges = equidistribute_edges(ys[sel], phase[sel], _PHASE_CAP)

    def f(x):
        return np.asarray(g(x)) * np.exp(1j * N * omega(x))

    val = integrate_panels(f, edges, p=12) if edges.size > 1 else 0.0 + 0.0j
    if y_cut < a:
        # two-point IBP closure of int_{y_cut}^{a}
        S_hi, err_hi = ibp_boundary(_jet_from_cheb(ch_g, a, ibp_order),
                                    _jet_from_cheb(ch_w, a, ibp_order + 1) * N,
                                    order=ibp_order)
        S_lo, err_lo = ibp_boundary(_jet_from_cheb(ch_g, y_cut, ibp_order),
                                    _jet_from_cheb(ch_w, y_cut, ibp_order + 1) * N,
                                    order=ibp_order)
        val = val + (S_hi - S_lo)
    return complex(val)


def leading_term(omega, g, N, a=None, omega0=None, omega2_0=None, g_0=None,
                 full_line: bool = False):
    """The displayed stationary-phase main term.

    omega(0), omega''(0) and g(0) are taken from the callables unless supplied;
    `full_line` doubles the value (integral over R instead of a half-line).
    """
    N = float(N)
    w0 = omega(0.0) if omega0 is None else omega0
    if omega2_0 is None:
        h = 1e-4 * (a if a else 1.0)
        omega2_0 = (2 * omega(0.0) - 5 * omega(h) + 4 * omega(2 * h) - omega(3 * h)) / h ** 2
    g0 = g(0.0) if g_0 is None else g_0
    tau = np.sign(omega2_0 * N)
    val = 0.5 * np.exp(1j * tau * np.pi / 4 + 1j * N * w0) * np.sqrt(2 * np.pi) \
        * abs(omega2_0 * N) ** -0.5 * g0
    return complex(2.0 * val if full_line else val)


def _refine_extremum(fun, y0, a, maximize):
    lo, hi = max(0.0, y0 - a / 200.0), min(a, y0 + a / 200.0)
    sgn = -1.0 if maximize else 1.0
    res = minimize_scalar(lambda t: sgn * fun(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(a, 1.0)})
    return sgn * res.fun


@dataclass(frozen=True)
class BoundConstants:
    kappa: float
    omega0: float
    omega2: float
    omega3: float
    g0: float
    g1: float

    def bound_shape(self, N):
        """B(N): the displayed remainder envelope without the absolute constant."""
        N = np.abs(np.asarray(N, dtype=float))
        core = (self.kappa ** -3.5 * self.omega2 ** 1.5 * self.omega3 * self.g0
                + self.kappa ** -2 * self.omega2 * self.g1)
        return core / N * (1.0 + np.abs(np.log(self.omega0 * N)))


def bound_constants(omega, g, a) -> BoundConstants:
    """kappa, omega_j, g_j by grid extremization with local refinement."""
    ch_w = _check_no_inflection(omega, a)
    ch_g = _cheb(g, 0.0, a)
    y = np.linspace(0.0, a, 4001)
    d2, d3 = ch_w.deriv(2), ch_w.deriv(3)
    g1f = ch_g.deriv(1)

    def extremum(fun, maximize):
        vals = fun(y)
        idx = int(np.argmax(vals) if maximize else np.argmin(vals))
        return _refine_extremum(fun, y[idx], a, maximize)

    return BoundConstants(
        kappa=extremum(lambda t: np.abs(d2(t)), False),
        omega0=extremum(lambda t: np.abs(omega(t)), True),
        omega2=extremum(lambda t: np.abs(d2(t)), True),
        omega3=max(extremum(lambda t: np.abs(d3(t)), True), 0.0),
        g0=extremum(lambda t: np.abs(np.asarray(g(t), dtype=float)), True),
        g1=extremum(lambda t: np.abs(g1f(t)), True),
    )


def verify_remainder(omega, g, N_list, a):
    """Measured |R(N)| against the bound shape B(N) plus the decay-exponent fit."""
    consts = bound_constants(omega, g, a)
    rows = []
    for N in N_list:
        J = evaluate_J(omega, g, N, a)
        lead = leading_term(omega, g, N, a=a)
        R = abs(J - lead)
        B = float(consts.bound_shape(N))
        rows.append({"N": float(N), "J": J, "leading": lead,
                     "remainder": R, "bound_shape": B,
                     "ratio": R / B if B > 0 else np.inf})
    finite = [r["remainder"] for r in rows]
    logN = np.log([abs(r["N"]) for r in rows])
    A = np.vstack([logN, np.ones_like(logN)]).T
    slope = float(np.linalg.lstsq(A, np.log(finite), rcond=None)[0][0])
    return {
        "constants": consts,
        "rows": rows,
        "implied_constant": max(r["ratio"] for r in rows),
        "decay_exponent": -slope,
    }
