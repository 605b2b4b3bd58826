import numpy as np
import pytest

from carleman.errors import ConfigurationError
from carleman.evolution import (evolution_phase, evolution_profile, profile_mass,
                                stationary_point_y, stationary_residual, y_map)
from carleman.hankelphase import varrho


def test_stationary_point_leading_order(cov2):
    # ln t = pi T makes the leading factor equal one
    T = 1e3
    y = stationary_point_y(np.pi * T, T, cov2)
    assert abs(y - 1.0) < 5.0 / T
    assert stationary_residual(np.pi * T, T, cov2, y) < 1e-10


def test_stationary_point_sign(cov2):
    T = 2e3
    for N in (0.5 * T, -0.8 * T):
        y = stationary_point_y(N, T, cov2)
        assert np.sign(y) == np.sign(N)
        assert stationary_residual(N, T, cov2, y) < 1e-10


def test_correction_decays_like_one_over_T(cov2):
    ratio = 0.7  # fixed ln t / (pi T)
    Ts = np.geomspace(1e2, 1e4, 7)
    devs = []
    for T in Ts:
        N = ratio * np.pi * T
        y = stationary_point_y(N, T, cov2)
        devs.append(abs(y * abs(np.pi * T / N) ** 0.5 - 1.0))
    A = np.vstack([np.log(Ts), np.ones_like(Ts)]).T
    slope = np.linalg.lstsq(A, np.log(devs), rcond=None)[0][0]
    assert 0.8 <= -slope <= 1.2


def test_odd_branches(cov3):
    T = 1e3
    # branch 1 lives on t < 1 only
    assert stationary_point_y(2.0 * T, T, cov3, branch=1) is None
    y1 = stationary_point_y(-2.0 * T, T, cov3, branch=1)
    assert y1 is not None and y1 > 0
    assert stationary_residual(-2.0 * T, T, cov3, y1, branch=1) < 1e-10
    # branch 2 mirrors: only t > 1
    assert stationary_point_y(-2.0 * T, T, cov3, branch=2) is None
    assert stationary_point_y(2.0 * T, T, cov3, branch=2) is not None


def test_phase_structure(q_x2, cov2):
    T, N = 1e3, 0.6e3 * np.pi
    n = 2
    y = stationary_point_y(N, T, cov2)
    Phi = evolution_phase(N, T, q_x2, cov2)
    x = n * T * y
    explicit = -cov2.xi_of_x(x) * N + (n - 1) * abs(y) ** (n / (n - 1.0)) * T
    assert abs(Phi - explicit - varrho(np.array([x]), q_x2, cov2)[0]) < 1e-9


def test_phase_parity(q_x2, cov2):
    # ln t -> -ln t flips the first and third terms through odd xi and rho
    T = 1e3
    N = 0.5e3
    yp = stationary_point_y(N, T, cov2)
    ym = stationary_point_y(-N, T, cov2)
    assert abs(yp + ym) < 1e-12
    n = 2
    xp, xm = n * T * yp, n * T * ym
    t1p = -cov2.xi_of_x(xp) * N
    t1m = -cov2.xi_of_x(xm) * (-N)
    assert abs(t1p - t1m) < 1e-8
    r_p = varrho(np.array([xp]), q_x2, cov2)[0]
    r_m = varrho(np.array([xm]), q_x2, cov2)[0]
    assert abs(r_p + r_m) < 1e-10


def test_phase_magnitude_growth(q_x2, cov2):
    # |Phi| ~ |ln t| ln ln t for fixed ln t / T
    vals = []
    for T in (1e3, 1e4):
        N = 0.7 * np.pi * T
        vals.append(abs(evolution_phase(N, T, q_x2, cov2)))
    growth = vals[1] / vals[0]
    assert 10.0 < growth < 10.0 * np.log(1e4 * 3) / np.log(1e3 / 3)


def test_second_derivative_formula(cov2):
    # omega''_yy at the stationary point ~ n^2/(n-1) |ln t/(pi T)|^{-(n-2)/n}
    n, T = 2, 5e3
    N = 0.8 * np.pi * T
    y0 = stationary_point_y(N, T, cov2)

    def omega(y):
        return -cov2.xi_of_x(n * T * y) * N / T + (n - 1) * abs(y) ** (n / (n - 1.0))

    h = 1e-5
    d2 = (omega(y0 + h) - 2 * omega(y0) + omega(y0 - h)) / h ** 2
    ref = n ** 2 / (n - 1.0) * abs(N / (np.pi * T)) ** (-(n - 2.0) / n)
    assert abs(d2 - ref) / ref < 30.0 / T + 1e-3


def test_y_map_unitarity():
    # |Y f|^2 has an integrable |x|^{-(n-2)/(n-1)} singularity at 0 for n > 2,
    # so the x-integral uses geometric Gauss panels toward the origin
    from carleman.oscquad import integrate_panels

    f_hat = lambda u: np.exp(-(np.asarray(u) - 0.8) ** 2 / 0.3)
    for n in (2, 3, 4):
        hi = 9.0 ** (n - 1)
        edges = np.geomspace(1e-30, hi, 800)
        half = sum(
            np.real(integrate_panels(
                lambda x: np.abs(y_map(f_hat, sgn * x, n)) ** 2, edges, p=12))
            for sgn in (+1.0, -1.0))
        u = np.linspace(-9.0, 9.0, 40001)
        ref = np.trapezoid(np.abs(f_hat(u)) ** 2, u)
        assert abs(half - ref) / ref < 1e-8, f"n={n}"
    with pytest.raises(ConfigurationError):
        y_map(f_hat, np.array([1.0]), 1)


def test_profile_mass_conservation(q_x2, cov2):
    f_hat = lambda u: np.exp(-(np.asarray(u) - 1.0) ** 2 / 0.08)
    T = 1e3
    N = np.linspace(0.05 * np.pi * T, 3.5 * np.pi * T, 4000)
    res = evolution_profile(f_hat, N, T, q_x2, cov2)
    mass = profile_mass(res)
    u = np.linspace(-4.0, 6.0, 40001)
    ref = np.trapezoid(np.abs(f_hat(u)) ** 2, u)
    assert abs(mass - ref) / ref < 0.01


def test_profile_support_localization(q_x2, cov2):
    f_hat = lambda u: np.exp(-(np.asarray(u) - 1.0) ** 2 / 0.08)
    T = 1e3
    N = np.linspace(0.05 * np.pi * T, 3.5 * np.pi * T, 4000)
    res = evolution_profile(f_hat, N, T, q_x2, cov2)
    p2 = np.abs(res["prediction"]) ** 2
    mask = res["N"] >= 0.3 * T  # t >= e^{c1 T}
    frac = np.trapezoid(p2[mask], res["N"][mask]) / np.trapezoid(p2, res["N"])
    assert frac > 0.99


def test_odd_branch_vanishing(q_x3, cov3):
    f_hat = lambda u: np.exp(-(np.asarray(u) + 1.0) ** 2 / 0.1)  # left-moving
    T = 1e3
    N = np.array([0.5 * T, 1.0 * T, 2.0 * T])
    res = evolution_profile(f_hat, N, T, q_x3, cov3)
    # the branch-1 amplitude (f at negative argument) may not leak to t > 1
    assert np.all(res["branch"][res["N"] > 0] == 2)
    f_right = lambda u: np.exp(-(np.asarray(u) - 1.0) ** 2 / 0.1)
    res2 = evolution_profile(f_right, -N, T, q_x3, cov3)
    assert np.all(res2["branch"][res2["N"] < 0] == 1)
