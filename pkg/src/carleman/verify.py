"""Invariant suites behind `carleman verify` (no pytest dependency)."""

from __future__ import annotations

import numpy as np


def _check(name, ok, detail=""):
    status = "pass" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    return 0 if ok else 1


def _suite_core():
    from .coeffmap import RealPolynomial, p_to_q, q_to_p
    from .liouville import OperatorCoefficients, tau_table
    from .profile import ChangeOfVariables, WeightProfile, a1_constant
    from .specfun import complex_gamma, eta_phase, recip_gamma_taylor

    fails = 0
    rng = np.random.default_rng(7)
    # gamma reflection identity on random non-real points
    z = rng.uniform(-8, 8, 100) + 1j * rng.uniform(0.1, 60, 100)
    resid = np.abs(complex_gamma(z) * complex_gamma(1 - z)
                   * np.sin(np.pi * z) / np.pi - 1.0)
    fails += _check("gamma reflection identity", np.max(resid) < 1e-10,
                    f"max {np.max(resid):.2e}")
    # eta continuity
    xi = np.arange(0.0, 100.0, 0.01)
    d = np.abs(np.diff(eta_phase(xi)))
    fails += _check("eta branch continuity", np.max(d) < np.pi / 2,
                    f"max step {np.max(d):.3f}")
    c = recip_gamma_taylor(12).coeffs
    fails += _check("recip gamma c0/c1", c[0] == 1.0
                    and abs(c[1] + 0.5772156649015329) < 1e-12)
    # round trip
    ok = True
    for _ in range(50):
        deg = int(rng.integers(0, 7))
        coeffs = rng.normal(size=deg + 1)
        coeffs[-1] = 1.0
        P = RealPolynomial(coeffs)
        ok &= bool(np.max(np.abs(q_to_p(p_to_q(P)).coeffs - P.coeffs)) < 1e-12)
    fails += _check("coefficient map round trip", ok)
    # tau degrees and the Liouville identities
    T = tau_table(6)
    fails += _check("tau_32 = 3 phi phi'", T.entry(3, 2) == {(0, 1): 3})
    prof = WeightProfile("cosh")
    for n in (1, 2, 3):
        Q = p_to_q(RealPolynomial([0.0] * n + [1.0]))
        cov = ChangeOfVariables(prof, n)
        op = OperatorCoefficients(Q, cov)
        xs = np.array([-7.0, -1.0, 0.5, 3.0, 20.0])
        b = op.b_values(xs)
        ref = Q.coeffs[n - 1] * prof.v(cov.xi_of_x(xs)) ** (2.0 / n)
        ok = (np.max(np.abs(b[n] - 1)) < 1e-10
              and np.max(np.abs(b[n - 1] - ref)) < 1e-10
              and np.max(np.abs(op.gauged_values(xs)[n - 1])) < 1e-10)
        fails += _check(f"Liouville identities n={n}", ok)
    # a1 rules
    fails += _check("a1 quadrature pair", abs(a1_constant(2, "gauss")
                                              - a1_constant(2, "simpson")) < 1e-8)
    # change of variables oddness / monotonicity / round trip
    cov = ChangeOfVariables(prof, 2)
    xs = np.linspace(-20, 20, 81)
    ok = (np.max(np.abs(cov.x_of_xi(xs) + cov.x_of_xi(-xs))) < 1e-10
          and np.all(cov.x_prime(xs) > 0)
          and np.max(np.abs(cov.xi_of_x(cov.x_of_xi(xs)) - xs)) < 1e-10)
    fails += _check("change of variables", ok)
    return fails


def _suite_scatter():
    from .coeffmap import RealPolynomial, p_to_q
    from .liouville import OperatorCoefficients
    from .profile import ChangeOfVariables, WeightProfile
    from .scattering import PotentialSpec, scattering_matrix

    fails = 0
    prof = WeightProfile("cosh")
    Q = p_to_q(RealPolynomial([0.0, 0.0, 1.0]))
    pot = PotentialSpec.from_operator(
        OperatorCoefficients(Q, ChangeOfVariables(prof, 2)))
    for lam in (0.5, 2.0):
        e = scattering_matrix(pot, lam, X=2000.0)
        ok = (e.unitarity_defect < 5e-4
              and abs(e.S[0, 1] - e.S[1, 0]) < 5e-4)
        fails += _check(f"n=2 unitarity/reciprocity lam={lam}", ok,
                        f"defect {e.unitarity_defect:.2e}")
    Q3 = p_to_q(RealPolynomial([0.0, 0.0, 0.0, 1.0]))
    pot3 = PotentialSpec.from_operator(
        OperatorCoefficients(Q3, ChangeOfVariables(prof, 3)))
    e = scattering_matrix(pot3, 1.0, X=2000.0)
    fails += _check("n=3 |s| = 1", abs(abs(e.S[0, 0]) - 1) < 5e-4,
                    f"defect {abs(abs(e.S[0,0]))-1:.2e}")
    return fails


def run_suite(name, verbose=True):
    fails = _suite_core()
    if name in ("scatter", "all"):
        fails += _suite_scatter()
    print(("all invariants pass" if fails == 0
           else f"{fails} invariant(s) FAILED"))
    return fails
