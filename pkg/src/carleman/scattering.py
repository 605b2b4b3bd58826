"""Free kernels, Lippmann-Schwinger solves, and scattering matrices.

The eigenfunctions of B~ = D^n + sum b~_m D^m (psi_minus convention) solve

    psi = e^{ikx} - R0(k^n + i0) V psi,      V = sum_{m<=n-2} b~_m D^m.

We solve the second-kind equation for w = V psi,

    (I + V R0) w = V psi0,

whose dense part stays the size of a core mesh [-X0, X0]: the free resolvent
kernel is a two-sided sum of exponentials exp(i zeta_j (x-y)), so V R0
assembles from per-panel moments of exponentials against the local Lagrange
basis (product integration), every exponential anchored so its modulus never
exceeds one.  Gauss panels are capped at ~4 radians of the fastest frequency,
which keeps the mesh at a couple of thousand nodes.

Beyond X0 (where sum|b~_m| ~ 1e-5) the solution is carried as frequency
components E(y) exp(i mu y) with real mu (incident wave and the real roots;
complex-root pieces there are O(|b~(X0)|^2) and are dropped).  Two Born
passes refresh the components and feed back into the core solve as pure
right-hand-side updates, so the LU factorization is reused; in particular the
X and 2X truncations needed for the extrapolated scattering matrix cost no
extra factorization.  The physical truncation error keeps its 1/X law.

Scattering entries use the stationary representations: with
I_-(k) = int e^{-iky} w dy and I_+(k) = int e^{+iky} w dy over the line,

    odd n:         s   = 1 - (i/n) k^{1-n} I_-
    even n, k>0:   s11 = 1 - (i/n) k^{1-n} I_-,   s21 = -(i/n) k^{1-n} I_+
    even n, k<0:   s22 = 1 + (i/n) k^{1-n} I_-,   s12 = +(i/n) k^{1-n} I_+
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, lapack

from .errors import (ConfigurationError, DomainError, NearExceptionalPointError,
                     StiffIntegrationError)
from .oscquad import exp_monomial_moments, gauss_rule, lagrange_coeff_matrix

# ---------------------------------------------------------------------------
# roots and free kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootSet:
    """Roots of zeta^n = z with the lambda +/- i0 limit resolved."""

    z: complex
    n: int
    roots: np.ndarray          # counterclockwise from the principal root
    upper: np.ndarray          # indices with Im > 0 strictly
    lower: np.ndarray
    real: np.ndarray           # indices of (numerically) real roots
    real_side: dict            # index -> "upper"/"lower" at the chosen limit

    def group(self, side):
        """Root indices feeding the x>=y ("upper") or x<=y ("lower") branch."""
        strict = self.upper if side == "upper" else self.lower
        tagged = [j for j in self.real if self.real_side[int(j)] == side]
        return np.concatenate((strict, np.asarray(tagged, dtype=int))).astype(int)


def zeta_roots(z, n, side="+") -> RootSet:
    """The n-th roots of z; for real z, `side` picks the +i0 or -i0 limit.

    A real root kr moves into the upper half plane under z -> z + i*eps iff
    kr and z share their sign (d zeta / dz = zeta / (n z)).
    """
    z = complex(z)
    if z == 0:
        raise DomainError("z = 0 is the degenerate spectral point")
    if n < 1:
        raise DomainError("n must be >= 1")
    base = np.exp(2j * np.pi * np.arange(n) / n)
    roots = (z ** (1.0 / n)) * base
    scale = abs(z) ** (1.0 / n)
    tol = 1e-12 * scale
    real_idx = np.where(np.abs(roots.imag) <= tol)[0]
    roots = roots.copy()
    roots[real_idx] = roots[real_idx].real
    upper = np.array([j for j in range(n) if roots[j].imag > tol], dtype=int)
    lower = np.array([j for j in range(n) if roots[j].imag < -tol], dtype=int)
    real_side = {}
    for j in real_idx:
        up = roots[j].real * z.real > 0
        if side == "-":
            up = not up
        real_side[int(j)] = "upper" if up else "lower"
    return RootSet(z=z, n=n, roots=roots, upper=upper, lower=lower,
                   real=real_idx, real_side=real_side)


def _branch_data(rs: RootSet):
    """[(zeta, coefficient)] for each branch; coefficient of e^{i zeta (x-y)}."""
    n = rs.n
    ups = [(complex(rs.roots[j]), 1j / n * complex(rs.roots[j]) ** (1 - n))
           for j in rs.group("upper")]
    downs = [(complex(rs.roots[j]), -1j / n * complex(rs.roots[j]) ** (1 - n))
             for j in rs.group("lower")]
    return ups, downs


def free_resolvent_kernel(x, y, z, n, side="+", deriv=0):
    """Kernel of d^deriv/dx^deriv of (D^n - z)^{-1}; two-branch formula."""
    rs = zeta_roots(z, n, side=side)
    ups, downs = _branch_data(rs)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape), dtype=complex)
    ge = d >= 0
    for zeta, a in ups:
        term = a * (1j * zeta) ** deriv * np.exp(1j * zeta * np.where(ge, d, 0.0))
        out = out + np.where(ge, term, 0.0)
    for zeta, a in downs:
        term = a * (1j * zeta) ** deriv * np.exp(1j * zeta * np.where(ge, 0.0, d))
        out = out + np.where(ge, 0.0, term)
    if out.ndim == 0:
        return complex(out)
    return out


def eigenvalue_multiplicity_bound(n, sign_lambda=1):
    """Count of decay directions = roots strictly above the real axis."""
    rs = zeta_roots(1.0 if sign_lambda > 0 else -1.0, n)
    return int(len(rs.upper))


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


class PotentialSpec:
    """Short-range coefficients b~_0..b~_{n-2} of a gauged operator.

    funcs[m] must accept numpy arrays.  `support` marks compactly supported
    potentials (the solver then uses no outer region).
    """

    def __init__(self, n, funcs, support=None, label="custom", breakpoints=()):
        if n < 1:
            raise ConfigurationError("n must be >= 1")
        if len(funcs) != max(n - 1, 0):
            raise ConfigurationError("need exactly n-1 coefficient functions")
        self.n = int(n)
        self.funcs = list(funcs)
        self.support = support
        self.label = label
        self.breakpoints = tuple(sorted(abs(b) for b in breakpoints))

    @staticmethod
    def from_operator(op, x_max=2.6e4):
        return PotentialSpec(op.n, op.btilde_splines(x_max), support=None,
                             label=f"gauged n={op.n}")

    def values(self, x):
        x = np.asarray(x, dtype=float)
        if not self.funcs:
            return np.zeros((0,) + x.shape, dtype=complex)
        return np.stack([np.asarray(f(x), dtype=complex) for f in self.funcs])

    def symbol(self, x, zeta):
        """sum_m b~_m(x) zeta^m: the V-symbol collapsed on one exponential."""
        vals = self.values(x)
        out = np.zeros(np.asarray(x, dtype=float).shape, dtype=complex)
        for m in range(vals.shape[0]):
            out = out + vals[m] * zeta ** m
        return out

    def abs_sum(self, x):
        vals = self.values(np.asarray(x, dtype=float))
        if not vals.size:
            return np.zeros_like(np.asarray(x, dtype=float))
        return np.sum(np.abs(vals), axis=0)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------


@dataclass
class _Mesh:
    edges: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    panel_of: np.ndarray
    p: int
    cmat: np.ndarray  # Lagrange coefficient matrix on the reference nodes

    @property
    def n_panels(self):
        return self.edges.size - 1

    def panel_slice(self, q):
        return slice(q * self.p, (q + 1) * self.p)

    def ref_coord(self, q, x):
        lo, hi = self.edges[q], self.edges[q + 1]
        return (2.0 * x - (lo + hi)) / (hi - lo)


def _panelize(edges, p):
    gx, gw = gauss_rule(p)
    lo, hi = edges[:-1], edges[1:]
    c, s = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = (c[:, None] + s[:, None] * gx[None, :]).ravel()
    weights = (s[:, None] * gw[None, :]).ravel()
    panel_of = np.repeat(np.arange(edges.size - 1), p)
    return _Mesh(edges=edges, nodes=nodes, weights=weights, panel_of=panel_of,
                 p=p, cmat=lagrange_coeff_matrix(gx))


def _core_mesh(x0, k, p=10, h_first=0.35, grow=1.3, breaks=()):
    h_max = min(2.0 / max(abs(k), 0.25), 3.0)
    edges = [0.0]
    h = min(h_first, h_max)
    while edges[-1] < x0:
        edges.append(min(edges[-1] + h, x0))
        if edges[-1] > 4.0:
            h = min(h * grow, h_max)
    right = np.array(edges)
    # coefficient discontinuities must be panel edges (product integration
    # interpolates the solution panelwise)
    ins = [b for b in breaks if 0.0 < b < x0]
    if ins:
        right = np.unique(np.concatenate((right, np.asarray(ins))))
        keep = np.concatenate(([True], np.diff(right) > 1e-9))
        right = right[keep]
    return _panelize(np.concatenate((-right[:0:-1], right)), p)


def _outer_mesh(side, x0, x_out, k, p=8, grow=1.35):
    """Signed increasing panels covering [x0, x_out] (side=+1) or the mirror."""
    if x_out <= x0 * (1.0 + 1e-12):
        return None
    edges = [x0]
    h = max(0.5, 0.5 / max(abs(k), 0.25))
    while edges[-1] < x_out:
        edges.append(min(edges[-1] + h, x_out))
        h *= grow
    edges = np.asarray(edges)
    if side < 0:
        edges = -edges[::-1]
    return _panelize(edges, p)


def _seg_basis_moments(mesh: _Mesh, q, nu, t_lo=-1.0, t_hi=1.0, anchor=None):
    """int_{y(t_lo)}^{y(t_hi)} e^{i nu (y - y_anchor)} l_j(y) dy over panel q.

    nu may be complex; `anchor` (a reference coordinate) must be chosen so the
    exponential stays bounded on [t_lo, t_hi].  Default anchors at the panel
    center, fine for real nu.
    """
    lo, hi = mesh.edges[q], mesh.edges[q + 1]
    c, s = 0.5 * (lo + hi), 0.5 * (hi - lo)
    t_anchor = 0.0 if anchor is None else anchor
    m = exp_monomial_moments(1j * nu * s, t_anchor, t_lo, t_hi, mesh.p)
    return s * (mesh.cmat.T @ m)


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


@dataclass
class _Component:
    """Outer contribution E(y) * exp(i mu y) sampled on an outer mesh."""

    mu: float
    E: np.ndarray


class EigenfunctionField:
    """Solved continuum eigenfunction at one (lambda, k); see module docstring.

    Heavy data lives in the private solver; the public surface is evaluation
    (psi_at / dpsi_at / w_at), the r-functions and their limits, the raw
    scattering integrals, and solve diagnostics.
    """

    def __init__(self, solver, k, w, comps_r, comps_l, diagnostics):
        self._s = solver
        self.k = float(k)
        self.lam = solver.lam
        self.n = solver.n
        self.w = w
        self._comps = {+1: comps_r, -1: comps_l}
        self.diagnostics = diagnostics
        self.x = solver.mesh.nodes
        self.X0 = solver.x0
        self.X = solver.x_out
        self._rlim_cache = None

    # -- low-level cumulative machinery --------------------------------------

    def _core_full_integral(self, nu):
        """int_core e^{i nu y} w dy by the global Gauss rule (real nu)."""
        mesh = self._s.mesh
        return np.sum(mesh.weights * np.exp(1j * nu * mesh.nodes) * self.w)

    def _outer_full_integral(self, side, nu_shift):
        """sum over components of int_side E e^{i (mu+shift) y} dy."""
        mesh = self._s.outer[side]
        comps = self._comps[side]
        if mesh is None or not comps:
            return 0.0 + 0.0j
        total = 0.0 + 0.0j
        for comp in comps:
            nu = comp.mu + nu_shift
            for q in range(mesh.n_panels):
                c = 0.5 * (mesh.edges[q] + mesh.edges[q + 1])
                row = _seg_basis_moments(mesh, q, nu)
                total += np.exp(1j * nu * c) * (row @ comp.E[mesh.panel_slice(q)])
        return total

    def _core_cum_integral(self, xq, nu, from_left=True):
        """int over core of e^{i nu y} w dy, from -X0 (or to +X0) up to each xq."""
        mesh = self._s.mesh
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        # panel prefix totals
        totals = np.empty(mesh.n_panels, dtype=complex)
        for q in range(mesh.n_panels):
            c = 0.5 * (mesh.edges[q] + mesh.edges[q + 1])
            row = _seg_basis_moments(mesh, q, nu)
            totals[q] = np.exp(1j * nu * c) * (row @ self.w[mesh.panel_slice(q)])
        prefix = np.concatenate(([0.0], np.cumsum(totals)))
        out = np.empty(xq.size, dtype=complex)
        for i, xi in enumerate(xq):
            if xi <= mesh.edges[0]:
                out[i] = 0.0 if from_left else prefix[-1]
                continue
            if xi >= mesh.edges[-1]:
                out[i] = prefix[-1] if from_left else 0.0
                continue
            q = min(int(np.searchsorted(mesh.edges, xi, side="right")) - 1,
                    mesh.n_panels - 1)
            t = mesh.ref_coord(q, xi)
            c = 0.5 * (mesh.edges[q] + mesh.edges[q + 1])
            row = _seg_basis_moments(mesh, q, nu, t_lo=-1.0, t_hi=t)
            part = np.exp(1j * nu * c) * (row @ self.w[mesh.panel_slice(q)])
            left = prefix[q] + part
            out[i] = left if from_left else prefix[-1] - left
        return out

    def _outer_cum_integral(self, side, xq, nu, from_left):
        """Cumulative int of w e^{i nu y} over one outer side.

        from_left=True:  int from the side's left end to each xq;
        from_left=False: int from each xq to the side's right end.
        Queries outside the side count the full side or nothing accordingly.
        """
        mesh = self._s.outer[side]
        comps = self._comps[side]
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        out = np.zeros(xq.size, dtype=complex)
        if mesh is None or not comps:
            return out
        for comp in comps:
            nu_c = comp.mu + nu
            totals = np.empty(mesh.n_panels, dtype=complex)
            for q in range(mesh.n_panels):
                c = 0.5 * (mesh.edges[q] + mesh.edges[q + 1])
                row = _seg_basis_moments(mesh, q, nu_c)
                totals[q] = np.exp(1j * nu_c * c) * (row @ comp.E[mesh.panel_slice(q)])
            prefix = np.concatenate(([0.0], np.cumsum(totals)))
            for i, xi in enumerate(xq):
                if xi <= mesh.edges[0]:
                    left = 0.0
                elif xi >= mesh.edges[-1]:
                    left = prefix[-1]
                else:
                    q = min(int(np.searchsorted(mesh.edges, xi, side="right")) - 1,
                            mesh.n_panels - 1)
                    t = mesh.ref_coord(q, xi)
                    c = 0.5 * (mesh.edges[q] + mesh.edges[q + 1])
                    row = _seg_basis_moments(mesh, q, nu_c, t_lo=-1.0, t_hi=t)
                    left = prefix[q] + np.exp(1j * nu_c * c) * \
                        (row @ comp.E[mesh.panel_slice(q)])
                out[i] += left if from_left else prefix[-1] - left
        return out

    def half_line_integral(self, xq, nu, up_to=True):
        """int_{-inf}^{xq} e^{i nu y} w(y) dy (or the complement), vectorized."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        left_full = self._outer_full_integral(-1, nu)
        core_full = self._core_full_integral(nu)
        right_full = self._outer_full_integral(+1, nu)
        total = left_full + core_full + right_full
        out = np.empty(xq.size, dtype=complex)
        out[:] = left_full
        core_part = self._core_cum_integral(xq, nu, from_left=True)
        in_left = xq < -self.X0
        in_right = xq > self.X0
        mid = ~(in_left | in_right)
        out[mid] += core_part[mid]
        if np.any(in_left):
            out[in_left] = self._outer_cum_integral(-1, xq[in_left], nu,
                                                    from_left=True)
        if np.any(in_right):
            out[in_right] = left_full + core_full + \
                self._outer_cum_integral(+1, xq[in_right], nu, from_left=True)
        if up_to:
            return out
        return total - out

    # -- r functions and limits ----------------------------------------------

    def _rcoef(self):
        return 1j / self.n * self.k ** (1 - self.n)

    def r_limits(self):
        """The x -> +/-inf limits of r (odd n) or r_+/- (even n)."""
        if self._rlim_cache is not None:
            return self._rlim_cache
        n, k = self.n, self.k
        Im = (self._outer_full_integral(-1, -k) + self._core_full_integral(-k)
              + self._outer_full_integral(+1, -k))
        Ip = (self._outer_full_integral(-1, +k) + self._core_full_integral(+k)
              + self._outer_full_integral(+1, +k))
        c = self._rcoef()
        if n % 2 == 1:
            lims = {"r-inf": 1.0 + 0.0j, "r+inf": 1.0 - c * Im,
                    "I-": Im, "I+": Ip}
        elif k > 0:
            lims = {"r+-inf": 1.0 + 0.0j, "r++inf": 1.0 - c * Im,
                    "r-+inf": 0.0 + 0.0j, "r--inf": -c * Ip,
                    "I-": Im, "I+": Ip}
        else:
            lims = {"r++inf": 1.0 + 0.0j, "r+-inf": 1.0 + c * Im,
                    "r--inf": 0.0 + 0.0j, "r-+inf": c * Ip,
                    "I-": Im, "I+": Ip}
        self._rlim_cache = lims
        return lims

    def r_plus(self, x):
        """r(x) for odd n; r_+(x) for even n (the e^{+ikx} envelope)."""
        n, k, c = self.n, self.k, self._rcoef()
        if n % 2 == 1 or k > 0:
            return 1.0 - c * self.half_line_integral(x, -k, up_to=True)
        return 1.0 + c * self.half_line_integral(x, -k, up_to=False)

    def r_minus(self, x):
        """r_-(x) for even n (the e^{-ikx} envelope); zero for odd n."""
        n, k, c = self.n, self.k, self._rcoef()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if n % 2 == 1:
            return np.zeros(x.size, dtype=complex)
        if k > 0:
            return -c * self.half_line_integral(x, +k, up_to=False)
        return c * self.half_line_integral(x, +k, up_to=True)

    # -- field evaluation ------------------------------------------------------

    def psi_at(self, x, deriv=0):
        """D^deriv psi at arbitrary points (core: full kernel; outer: osc+dec)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.size, dtype=complex)
        k = self.k
        ups, downs = self._s.branches
        inside = np.abs(x) <= self.X0
        if np.any(inside):
            xi = x[inside]
            acc = k ** deriv * np.exp(1j * k * xi)
            for zeta, a in ups:
                cum = self._cum_kernel(xi, zeta, upper=True)
                acc = acc - a * zeta ** deriv * cum
            for zeta, a in downs:
                cum = self._cum_kernel(xi, zeta, upper=False)
                acc = acc - a * zeta ** deriv * cum
            out[inside] = acc
        if np.any(~inside):
            xo = x[~inside]
            rp = self.r_plus(xo)
            rm = self.r_minus(xo)
            acc = k ** deriv * np.exp(1j * k * xo) * rp \
                + (-k) ** deriv * np.exp(-1j * k * xo) * rm
            acc = acc + self._psi_dec_outer(xo, deriv)
            out[~inside] = acc
        return out

    def _cum_kernel(self, xq, zeta, upper):
        """int e^{i zeta (x-y)} w(y) dy over y < x (upper) or y > x (lower),
        including the outer components, stably anchored at x."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        out = np.zeros(xq.size, dtype=complex)
        mesh = self._s.mesh
        # core part, panel-anchored
        totals = np.empty(mesh.n_panels, dtype=complex)
        anchors = mesh.edges[1:] if upper else mesh.edges[:-1]
        for q in range(mesh.n_panels):
            lo, hi = mesh.edges[q], mesh.edges[q + 1]
            c, s = 0.5 * (lo + hi), 0.5 * (hi - lo)
            t_anchor = 1.0 if upper else -1.0
            row = _seg_basis_moments(mesh, q, -zeta, anchor=t_anchor)
            totals[q] = row @ self.w[mesh.panel_slice(q)]
        for i, xi in enumerate(xq):
            acc = 0.0 + 0.0j
            if upper:
                for q in range(mesh.n_panels):
                    if mesh.edges[q + 1] <= xi:
                        acc += np.exp(1j * zeta * (xi - anchors[q])) * totals[q]
                    elif mesh.edges[q] < xi:
                        t = mesh.ref_coord(q, xi)
                        lo, hi = mesh.edges[q], mesh.edges[q + 1]
                        s = 0.5 * (hi - lo)
                        row = _seg_basis_moments(mesh, q, -zeta, t_lo=-1.0,
                                                 t_hi=t, anchor=t)
                        acc += row @ self.w[mesh.panel_slice(q)]
            else:
                for q in range(mesh.n_panels):
                    if mesh.edges[q] >= xi:
                        acc += np.exp(1j * zeta * (xi - anchors[q])) * totals[q]
                    elif mesh.edges[q + 1] > xi:
                        t = mesh.ref_coord(q, xi)
                        row = _seg_basis_moments(mesh, q, -zeta, t_lo=t,
                                                 t_hi=1.0, anchor=t)
                        acc += row @ self.w[mesh.panel_slice(q)]
            out[i] = acc
        # outer parts (real zeta only contributes at meaningful size;
        # complex-root tails over the outer region are below 1e-9)
        if abs(complex(zeta).imag) < 1e-12:
            zr = complex(zeta).real
            if upper:
                out += np.exp(1j * zr * xq) * (
                    self._outer_cum_partial(-1, xq, -zr, count_below=True)
                    + self._outer_cum_partial(+1, xq, -zr, count_below=True))
            else:
                out += np.exp(1j * zr * xq) * (
                    self._outer_cum_partial(-1, xq, -zr, count_below=False)
                    + self._outer_cum_partial(+1, xq, -zr, count_below=False))
        return out

    def _outer_cum_partial(self, side, xq, nu, count_below):
        """int over the part of one outer side below/above each query point."""
        mesh = self._s.outer[side]
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        if mesh is None or not self._comps[side]:
            return np.zeros(xq.size, dtype=complex)
        full = self._outer_full_integral(side, nu)
        below = self._outer_cum_integral(side, xq, nu, from_left=True)
        return below if count_below else full - below

    def _psi_dec_outer(self, xo, deriv):
        """Complex-root remnants just beyond X0 (they die within a few units)."""
        out = np.zeros(xo.size, dtype=complex)
        ups, downs = self._s.branches
        for zeta, a in ups:
            if abs(zeta.imag) < 1e-12:
                continue
            right = xo > 0
            if np.any(right):
                cum = self._core_cum_anchor_edge(zeta, upper=True)
                out[right] -= a * zeta ** deriv * \
                    np.exp(1j * zeta * (xo[right] - self.X0)) * cum
        for zeta, a in downs:
            if abs(zeta.imag) < 1e-12:
                continue
            left = xo < 0
            if np.any(left):
                cum = self._core_cum_anchor_edge(zeta, upper=False)
                out[left] -= a * zeta ** deriv * \
                    np.exp(1j * zeta * (xo[left] + self.X0)) * cum
        return out

    def _core_cum_anchor_edge(self, zeta, upper):
        mesh = self._s.mesh
        edge = self.X0 if upper else -self.X0
        acc = 0.0 + 0.0j
        for q in range(mesh.n_panels):
            anchor_val = mesh.edges[q + 1] if upper else mesh.edges[q]
            t_anchor = 1.0 if upper else -1.0
            row = _seg_basis_moments(mesh, q, -zeta, anchor=t_anchor)
            acc += np.exp(-1j * zeta * (anchor_val - edge)) * \
                (row @ self.w[mesh.panel_slice(q)])
        return acc

    def w_at(self, x):
        """V psi at arbitrary points (core: Lagrange interp; outer: components)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.size, dtype=complex)
        mesh = self._s.mesh
        inside = np.abs(x) <= self.X0
        for i in np.where(inside)[0]:
            xi = x[i]
            q = min(int(np.searchsorted(mesh.edges, xi, side="right")) - 1,
                    mesh.n_panels - 1)
            q = max(q, 0)
            t = mesh.ref_coord(q, xi)
            basis = np.polynomial.polynomial.polyval(t, mesh.cmat)
            out[i] = basis @ self.w[mesh.panel_slice(q)]
        for side in (+1, -1):
            mesh_o = self._s.outer[side]
            if mesh_o is None:
                continue
            sel = (x * side > self.X0) & (np.abs(x) <= self.X)
            for i in np.where(sel)[0]:
                xi = x[i]
                q = min(int(np.searchsorted(mesh_o.edges, xi, side="right")) - 1,
                        mesh_o.n_panels - 1)
                q = max(q, 0)
                t = mesh_o.ref_coord(q, xi)
                basis = np.polynomial.polynomial.polyval(t, mesh_o.cmat)
                for comp in self._comps[side]:
                    out[i] += (basis @ comp.E[mesh_o.panel_slice(q)]) * \
                        np.exp(1j * comp.mu * xi)
        return out


class _CoreSolver:
    """Mesh, assembled matrix and LU for one (lambda, k); reusable across X."""

    def __init__(self, pot: PotentialSpec, k, x0, p=10, rcond_floor=1e-10):
        if k == 0:
            raise DomainError("k = 0: degenerate spectral point")
        self.pot = pot
        self.n = pot.n
        self.k = float(k)
        self.lam = float(k) ** pot.n
        if pot.n % 2 == 0 and self.lam <= 0:
            raise DomainError("even n has no propagating solutions for lambda <= 0")
        self.rs = zeta_roots(self.lam, self.n, side="+")
        self.branches = _branch_data(self.rs)
        self.x0 = float(x0)
        self.x_out = self.x0
        self.mesh = _core_mesh(self.x0, self.k, p=p, breaks=pot.breakpoints)
        self.outer = {+1: None, -1: None}
        self._assemble(rcond_floor)

    # real roots reaching each infinity
    def _real_root(self, side):
        ups, downs = self.branches
        group = ups if side == "upper" else downs
        for zeta, a in group:
            if abs(zeta.imag) < 1e-12:
                return zeta.real, a
        return None

    def _assemble(self, rcond_floor):
        mesh, pot = self.mesh, self.pot
        x = mesh.nodes
        m = x.size
        if self.n == 1:
            self.lu = None
            self.anorm = 1.0
            self.rcond = 1.0
            self.residual = 0.0
            return
        A = np.eye(m, dtype=complex)
        ups, downs = self.branches
        for zeta, a in ups:
            pcoef = a * pot.symbol(x, zeta)
            K = np.zeros((m, m), dtype=complex)
            for q in range(mesh.n_panels):
                hi = mesh.edges[q + 1]
                row = _seg_basis_moments(mesh, q, -zeta, anchor=1.0)
                after = x > hi - 1e-14
                # strictly later panels use the panel-edge anchored moments
                after &= mesh.panel_of > q
                if np.any(after):
                    K[np.ix_(np.where(after)[0], range(*mesh.panel_slice(q).indices(m)))] += \
                        np.exp(1j * zeta * (x[after] - hi))[:, None] * row[None, :]
                # self-panel partials
                for r in range(mesh.p):
                    i = q * mesh.p + r
                    t = mesh.ref_coord(q, x[i])
                    prow = _seg_basis_moments(mesh, q, -zeta, t_lo=-1.0, t_hi=t,
                                              anchor=t)
                    K[i, mesh.panel_slice(q)] += prow
            A += pcoef[:, None] * K
        for zeta, a in downs:
            pcoef = a * pot.symbol(x, zeta)
            K = np.zeros((m, m), dtype=complex)
            for q in range(mesh.n_panels):
                lo = mesh.edges[q]
                row = _seg_basis_moments(mesh, q, -zeta, anchor=-1.0)
                before = mesh.panel_of < q
                if np.any(before):
                    K[np.ix_(np.where(before)[0], range(*mesh.panel_slice(q).indices(m)))] += \
                        np.exp(1j * zeta * (x[before] - lo))[:, None] * row[None, :]
                for r in range(mesh.p):
                    i = q * mesh.p + r
                    t = mesh.ref_coord(q, x[i])
                    prow = _seg_basis_moments(mesh, q, -zeta, t_lo=t, t_hi=1.0,
                                              anchor=t)
                    K[i, mesh.panel_slice(q)] += prow
            A += pcoef[:, None] * K
        self.anorm = np.linalg.norm(A, 1)
        self.lu = lu_factor(A)
        self._A = A
        gecon = lapack.zgecon
        self.rcond = float(gecon(self.lu[0], self.anorm)[0])
        if self.rcond < rcond_floor:
            raise NearExceptionalPointError(self.lam, self.rcond)

    # -- outer iteration ------------------------------------------------------

    def solve(self, X, born_passes=3) -> EigenfunctionField:
        pot, mesh, k = self.pot, self.mesh, self.k
        x = mesh.nodes
        if self.n == 1:
            self.x_out = float(max(X, self.x0))
            return EigenfunctionField(self, k, np.zeros(x.size, dtype=complex),
                                      [], [],
                                      {"residual": 0.0, "rcond": 1.0,
                                       "X0": self.x0, "X": self.x_out,
                                       "mesh_size": int(x.size)})
        self.x_out = float(max(X, self.x0))
        if pot.support is not None:
            self.x_out = self.x0
        self.outer = {+1: _outer_mesh(+1, self.x0, self.x_out, k),
                      -1: _outer_mesh(-1, self.x0, self.x_out, k)}
        rhs0 = pot.symbol(x, k) * np.exp(1j * k * x)
        w = lu_solve(self.lu, rhs0)
        comps = {+1: [], -1: []}
        field = EigenfunctionField(self, k, w, comps[+1], comps[-1], {})
        ru = self._real_root("upper")
        rd = self._real_root("lower")
        for _ in range(born_passes):
            comps = self._refresh_outer(field, ru, rd)
            field._comps = comps
            feed = self._core_feedback(field, ru, rd)
            w = lu_solve(self.lu, rhs0 + feed)
            field.w = w
        comps = self._refresh_outer(field, ru, rd)
        field._comps = comps
        resid = float(np.max(np.abs(self._A @ field.w - (rhs0 + self._core_feedback(field, ru, rd)))))
        field.diagnostics = {
            "residual": resid,
            "rcond": self.rcond,
            "X0": self.x0,
            "X": self.x_out,
            "mesh_size": int(x.size),
            "abs_sum_at_X0": float(self.pot.abs_sum(np.array([self.x0]))[0]),
        }
        return field

    def _refresh_outer(self, field, ru, rd):
        """Born update of the outer components from the current state."""
        comps_new = {+1: [], -1: []}
        for side in (+1, -1):
            mesh_o = self.outer[side]
            if mesh_o is None:
                continue
            y = mesh_o.nodes
            incident = [(self.k, np.ones(y.size, dtype=complex))]
            # real-root wave launched toward this side by core + far side
            root = ru if side > 0 else rd
            if root is not None:
                zeta, a = root
                cum = field._core_full_integral(-zeta) \
                    + field._outer_full_integral(-side, -zeta)
                incident.append((zeta, -a * cum * np.ones(y.size, dtype=complex)))
            # within-side Born term from the previous components: the up-root
            # kernel integrates from the side's left end, the down-root kernel
            # from its right end
            if field._comps[side]:
                if ru is not None:
                    zeta, a = ru
                    cum = field._outer_cum_integral(side, y, -zeta, from_left=True)
                    incident.append((zeta, -a * cum))
                if rd is not None:
                    zeta, a = rd
                    cum = field._outer_cum_integral(side, y, -zeta, from_left=False)
                    incident.append((zeta, -a * cum))
            for mu, amp in incident:
                comps_new[side].append(
                    _Component(mu=float(np.real(mu)),
                               E=self.pot.symbol(y, mu) * amp))
        return comps_new

    def _core_feedback(self, field, ru, rd):
        """-V R0 w_outer evaluated on the core nodes (right-hand-side update)."""
        x = self.mesh.nodes
        feed = np.zeros(x.size, dtype=complex)
        # right outer reaches the core through the lower branch (real root)
        if rd is not None:
            zeta, a = rd
            tot = field._outer_full_integral(+1, -zeta)
            feed -= a * self.pot.symbol(x, zeta) * np.exp(1j * zeta * x) * tot
        if ru is not None:
            zeta, a = ru
            tot = field._outer_full_integral(-1, -zeta)
            feed -= a * self.pot.symbol(x, zeta) * np.exp(1j * zeta * x) * tot
        return feed


def default_core_radius(pot: PotentialSpec, X, threshold=1e-4):
    if pot.support is not None:
        return min(pot.support + 2.0, X)
    xs = np.linspace(30.0, 200.0, 343)
    vals = pot.abs_sum(xs) + pot.abs_sum(-xs)
    idx = np.where(vals < threshold)[0]
    x0 = xs[idx[0]] if idx.size else 200.0
    return float(min(max(x0, 40.0), 120.0, X))


def solve_lippmann_schwinger(pot: PotentialSpec, k, X=1.0e4, x_core=None,
                             p=10, born_passes=3) -> EigenfunctionField:
    """Solve for the continuum eigenfunction at wavenumber k (lambda = k^n)."""
    x0 = default_core_radius(pot, X) if x_core is None else min(x_core, X)
    solver = _CoreSolver(pot, k, x0, p=p)
    return solver.solve(X, born_passes=born_passes)


# ---------------------------------------------------------------------------
# scattering matrices
# ---------------------------------------------------------------------------


@dataclass
class SMatrixEntry:
    lam: float
    n: int
    S: np.ndarray              # 1x1 (odd n) or 2x2 (even n), X-extrapolated
    S_X: np.ndarray
    S_2X: np.ndarray
    unitarity_defect: float    # at truncation X
    unitarity_defect_2X: float
    truncation_X: float
    core_radius: float
    rcond: float
    mesh_size: int

    @property
    def extrapolated_defect(self):
        s = self.S
        return float(np.linalg.norm(s.conj().T @ s - np.eye(s.shape[0]), 2))


def _entries_from_field(field: EigenfunctionField):
    lims = field.r_limits()
    if field.n % 2 == 1:
        return {"s": lims["r+inf"]}
    if field.k > 0:
        return {"s11": lims["r++inf"], "s21": lims["r--inf"]}
    return {"s22": lims["r+-inf"], "s12": lims["r-+inf"]}


def scattering_matrix(pot: PotentialSpec, lam, X=1.0e4, x_core=None,
                      p=10) -> SMatrixEntry:
    """Assemble s(lambda) or S(lambda) with the X / 2X truncation pair."""
    lam = float(lam)
    if lam == 0:
        raise DomainError("lambda = 0 is the degenerate spectral point")
    n = pot.n
    if n % 2 == 1:
        k = np.sign(lam) * abs(lam) ** (1.0 / n)
        solver = _CoreSolver(pot, k, default_core_radius(pot, X) if x_core is None
                             else min(x_core, X), p=p)
        fX = solver.solve(X)
        e1 = _entries_from_field(fX)
        f2 = solver.solve(2 * X)
        e2 = _entries_from_field(f2)
        S_X = np.array([[e1["s"]]])
        S_2X = np.array([[e2["s"]]])
        meta = (solver.rcond, fX.diagnostics["mesh_size"], solver.x0)
    else:
        if lam <= 0:
            raise DomainError("even n: lambda must be positive")
        k = lam ** (1.0 / n)
        S_X = np.zeros((2, 2), dtype=complex)
        S_2X = np.zeros((2, 2), dtype=complex)
        meta = None
        for kk in (k, -k):
            solver = _CoreSolver(pot, kk, default_core_radius(pot, X) if x_core
                                 is None else min(x_core, X), p=p)
            fX = solver.solve(X)
            e1 = _entries_from_field(fX)
            f2 = solver.solve(2 * X)
            e2 = _entries_from_field(f2)
            if kk > 0:
                S_X[0, 0], S_X[1, 0] = e1["s11"], e1["s21"]
                S_2X[0, 0], S_2X[1, 0] = e2["s11"], e2["s21"]
            else:
                S_X[1, 1], S_X[0, 1] = e1["s22"], e1["s12"]
                S_2X[1, 1], S_2X[0, 1] = e2["s22"], e2["s12"]
            if meta is None:
                meta = (solver.rcond, fX.diagnostics["mesh_size"], solver.x0)
    S_ext = 2.0 * S_2X - S_X

    def defect(S):
        return float(np.linalg.norm(S.conj().T @ S - np.eye(S.shape[0]), 2))

    return SMatrixEntry(lam=lam, n=n, S=S_ext, S_X=S_X, S_2X=S_2X,
                        unitarity_defect=defect(S_X),
                        unitarity_defect_2X=defect(S_2X),
                        truncation_X=X, core_radius=meta[2], rcond=meta[0],
                        mesh_size=meta[1])


def scattering_scan(pot: PotentialSpec, lams, X=1.0e4, x_core=None, p=10):
    return [scattering_matrix(pot, lam, X=X, x_core=x_core, p=p) for lam in lams]


def r_functions(field: EigenfunctionField):
    """The r / r_+- limits at both infinities (plus the raw integrals)."""
    return field.r_limits()


# ---------------------------------------------------------------------------
# independent n = 2 route: envelope ODE shooting
# ---------------------------------------------------------------------------


def ode_cross_check(pot: PotentialSpec, k, X=1.0e4, rtol=1e-11, atol=1e-13):
    """Transmission/reflection for n = 2 by two-sided shooting.

    Integrates psi'' = (b0 - k^2) psi from +X to -X starting from the pure
    transmitted wave and matches plane waves at -X; independent of the
    Nystrom machinery.  Returns {"s11": ..., "s21": ...} for this k > 0.
    """
    from scipy.integrate import solve_ivp

    if pot.n != 2:
        raise ConfigurationError("ode_cross_check is the n = 2 oracle")
    if k <= 0:
        raise ConfigurationError("use k > 0")
    b0 = pot.funcs[0]

    def rhs(x, u):
        pr, pi, dpr, dpi = u
        b = b0(np.array([x]))[0] if pot.support is None or abs(x) <= pot.support \
            else 0.0
        c = (np.real(b) - k * k) + 1j * np.imag(b)
        psi = pr + 1j * pi
        dd = c * psi
        return [dpr, dpi, dd.real, dd.imag]

    x_hi = X if pot.support is None else min(X, pot.support)
    psi0 = np.exp(1j * k * x_hi)
    y0 = [psi0.real, psi0.imag, (1j * k * psi0).real, (1j * k * psi0).imag]
    sol = solve_ivp(rhs, (x_hi, -x_hi), y0, method="DOP853", rtol=rtol,
                    atol=atol, dense_output=False)
    if not sol.success:
        raise StiffIntegrationError(sol.message)
    pr, pi, dpr, dpi = sol.y[:, -1]
    psi, dpsi = pr + 1j * pi, dpr + 1j * dpi
    xm = sol.t[-1]
    alpha = (dpsi + 1j * k * psi) * np.exp(-1j * k * xm) / (2j * k)
    beta = -(dpsi - 1j * k * psi) * np.exp(1j * k * xm) / (2j * k)
    return {"s11": 1.0 / alpha, "s21": beta / alpha}


def square_well_reflection(V0, a, k):
    """Closed-form R, T for the well b0 = -V0 on (-a, a) (textbook oracle)."""
    kappa = np.sqrt(k * k + V0 + 0j)
    den = np.cos(2 * kappa * a) - 0.5j * (k * k + kappa * kappa) / (k * kappa) \
        * np.sin(2 * kappa * a)
    t = np.exp(-2j * k * a) / den
    r = 0.5j * ((kappa ** 2 - k ** 2) / (k * kappa)) * np.sin(2 * kappa * a) \
        * np.exp(-2j * k * a) / den
    return {"s11": t, "s21": r}
