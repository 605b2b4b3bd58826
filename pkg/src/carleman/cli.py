"""Command-line front end: deterministic curve/matrix emission per subcommand.

Exit codes: 0 success, 1 usage error, 2 validation (configuration/domain)
error, 3 numerical failure (near-exceptional point, stiffness, resolution).
All numbers are printed with 17 significant digits so emitted files round-trip
losslessly; every record carries the tolerances and truncation radii used.
CARLEMAN_THREADS caps the BLAS thread pool (set before numpy loads).
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _cap_threads():
    cap = os.environ.get("CARLEMAN_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                    "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_cap_threads()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _fmt(x):
    return f"{x:.17g}"


def _emit_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_list(text):
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _parse_grid(text):
    """'a:b:step' or comma list."""
    if ":" in text:
        import numpy as np

        a, b, s = (float(v) for v in text.split(":"))
        return list(np.arange(a, b + 0.5 * s, s))
    return _parse_list(text)


def _profile_from_args(args):
    from .profile import WeightProfile

    return WeightProfile(args.family, alpha=getattr(args, "alpha", 1.0),
                         beta=getattr(args, "beta", 1.0))


def _poly_pair(args):
    from .coeffmap import RealPolynomial, p_to_q, q_to_p

    if getattr(args, "p", None) is not None and getattr(args, "q", None) is not None:
        raise _Validation("give exactly one of --p / --q")
    if getattr(args, "p", None) is not None:
        P = RealPolynomial(_parse_list(args.p))
        return P, p_to_q(P)
    if getattr(args, "q", None) is not None:
        Q = RealPolynomial(_parse_list(args.q))
        return q_to_p(Q), Q
    raise _Validation("one of --p / --q is required")


class _Validation(ValueError):
    pass


# -- subcommands -------------------------------------------------------------


def _cmd_map_coeffs(args):
    P, Q = _poly_pair(args)
    if args.p is not None:
        _emit_json(args.emit, {"p": list(P.coeffs), "q": list(Q.coeffs)})
    else:
        _emit_json(args.emit, {"q": list(Q.coeffs), "p": list(P.coeffs)})
    return 0


def _cmd_profile(args):
    import numpy as np

    from .profile import ChangeOfVariables

    prof = _profile_from_args(args)
    cov = ChangeOfVariables(prof, args.n)
    xi = np.asarray(_parse_grid(args.xi_grid))
    rows = [(x, prof.v(x), cov.x_of_xi(x)) for x in xi]
    _emit_csv(args.emit, ["xi", "v", "x"], rows)
    return 0


def _cmd_transform(args):
    import numpy as np

    from .liouville import OperatorCoefficients
    from .profile import ChangeOfVariables

    P, Q = _poly_pair(args)
    prof = _profile_from_args(args)
    cov = ChangeOfVariables(prof, Q.degree)
    op = OperatorCoefficients(Q, cov)
    xs = np.asarray(_parse_grid(args.x_grid))
    b = op.b_values(xs)
    bt = op.gauged_values(xs)
    header = ["x"]
    for m in range(Q.degree + 1):
        header += [f"re_b{m}", f"im_b{m}"]
    for m in range(Q.degree + 1):
        header += [f"re_bt{m}", f"im_bt{m}"]
    rows = []
    for i, x in enumerate(xs):
        row = [x]
        for m in range(Q.degree + 1):
            row += [b[m, i].real, b[m, i].imag]
        for m in range(Q.degree + 1):
            row += [bt[m, i].real, bt[m, i].imag]
        rows.append(row)
    _emit_csv(args.emit, header, rows)
    return 0


def _cmd_scatter(args):
    from .liouville import OperatorCoefficients
    from .profile import ChangeOfVariables
    from .scattering import PotentialSpec, scattering_matrix

    P, Q = _poly_pair(args)
    prof = _profile_from_args(args)
    n = Q.degree
    cov = ChangeOfVariables(prof, n)
    pot = PotentialSpec.from_operator(OperatorCoefficients(Q, cov))
    import numpy as np

    lams = list(np.linspace(args.lambda_min, args.lambda_max, args.points))
    records = []
    for lam in lams:
        e = scattering_matrix(pot, lam, X=args.truncation)
        records.append({
            "lambda": lam,
            "entries": [[[v.real, v.imag] for v in row] for row in e.S],
            "unitarity_defect": e.unitarity_defect,
            "unitarity_defect_2X": e.unitarity_defect_2X,
            "truncation_X": e.truncation_X,
            "core_radius": e.core_radius,
            "rcond": e.rcond,
        })
    _emit_json(args.emit, {"n": n, "records": records})
    return 0


def _cmd_longrange(args):
    import numpy as np

    from .coeffmap import RealPolynomial, p_to_q
    from .liouville import OperatorCoefficients
    from .longrange import residual_symbol, sigma_iterate
    from .profile import ChangeOfVariables

    prof = _profile_from_args(args)
    P = RealPolynomial([0.0] * args.n + [1.0]) if args.p is None \
        else RealPolynomial(_parse_list(args.p))
    Q = p_to_q(P)
    cov = ChangeOfVariables(prof, Q.degree, xi_max=2000.0)
    op = OperatorCoefficients(Q, cov)
    xs = np.asarray(_parse_grid(args.x_grid))
    rows = []
    for x in xs:
        s = sigma_iterate(op, args.j, np.array([x]), args.k)[0]
        v = residual_symbol(op, args.j, np.array([x]), args.k)[0]
        rows.append((x, s.real, s.imag, v.real, v.imag))
    _emit_csv(args.emit, ["x", "re_sigma", "im_sigma", "re_resid", "im_resid"], rows)
    return 0


def _cmd_hankel_theta(args):
    import numpy as np

    from .liouville import OperatorCoefficients
    from .profile import ChangeOfVariables
    from .scattering import PotentialSpec, scattering_matrix, solve_lippmann_schwinger
    from .hankelphase import theta_profile

    P, Q = _poly_pair(args)
    prof = _profile_from_args(args)
    n = Q.degree
    cov = ChangeOfVariables(prof, n)
    pot = PotentialSpec.from_operator(OperatorCoefficients(Q, cov))
    e = scattering_matrix(pot, args.k ** n, X=args.truncation)
    if n % 2 == 1:
        entries = {"s": e.S[0, 0]}
    else:
        entries = {"s11": e.S[0, 0], "s12": e.S[0, 1],
                   "s21": e.S[1, 0], "s22": e.S[1, 1]}
    field = solve_lippmann_schwinger(pot, args.k, X=args.truncation)
    Ns = np.asarray(_parse_grid(args.N_grid))
    Ns = Ns[Ns != 0.0]
    prof_res = theta_profile(Ns, field, Q, cov, entries=entries)
    rows = []
    for i, N in enumerate(prof_res.N):
        v, a = prof_res.values[i], prof_res.asymptotic[i]
        rows.append((N, v.real, v.imag, a.real, a.imag,
                     prof_res.relative_residual[i]))
    _emit_csv(args.emit, ["N", "re_theta", "im_theta", "re_asym", "im_asym",
                          "residual"], rows)
    return 0


def _cmd_statphase(args):
    import numpy as np

    from .statphase import verify_remainder

    if args.case != "fresnel":
        raise _Validation("only the fresnel case is built in")
    omega = lambda y: np.asarray(y) ** 2
    g = lambda y: (1.0 + 1.5 * np.asarray(y)) * np.exp(-2.0 * np.asarray(y) ** 2)
    Ns = _parse_list(args.N)
    rep = verify_remainder(omega, g, Ns, a=4.0)
    payload = {
        "case": "fresnel",
        "decay_exponent": rep["decay_exponent"],
        "implied_constant": rep["implied_constant"],
        "rows": [{"N": r["N"], "remainder": r["remainder"],
                  "bound_shape": r["bound_shape"], "ratio": r["ratio"]}
                 for r in rep["rows"]],
    }
    _emit_json(args.emit, payload)
    return 0


def _cmd_evolve(args):
    import numpy as np

    from .coeffmap import RealPolynomial, p_to_q
    from .evolution import evolution_profile
    from .profile import ChangeOfVariables

    if args.profile != "gaussian":
        raise _Validation("only the gaussian spectral profile is built in")
    prof = _profile_from_args(args)
    P = RealPolynomial([0.0] * args.n + [1.0])
    Q = p_to_q(P)
    cov = ChangeOfVariables(prof, args.n)
    f_hat = lambda u: np.exp(-(np.asarray(u) - 1.0) ** 2 / 0.08)
    N = np.asarray(_parse_grid(args.N_grid)) * abs(args.T)
    res = evolution_profile(f_hat, N, args.T, Q, cov)
    rows = [(res["N"][i], res["prediction"][i].real, res["prediction"][i].imag,
             res["branch"][i]) for i in range(len(N))]
    _emit_csv(args.emit, ["N", "re_pred", "im_pred", "branch"], rows)
    return 0


def _cmd_verify(args):
    from . import verify as _verify

    failures = _verify.run_suite(args.suite, verbose=True)
    return 0 if failures == 0 else 3


def build_parser():
    ap = _Parser(prog="carleman",
                 description="generalized Carleman / Hankel operator laboratory")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add_common(p, poly=True, family=True):
        if poly:
            p.add_argument("--p", help="kernel polynomial coefficients, low->high")
            p.add_argument("--q", help="symbol polynomial coefficients, low->high")
        if family:
            p.add_argument("--family", default="cosh",
                           choices=["cosh", "power_law", "stretched_exp"])
            p.add_argument("--alpha", type=float, default=1.0)
            p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--emit", default=None, help="output path (stdout if omitted)")
        p.add_argument("--config", default=None,
                       help="JSON file whose entries override the flags")

    p = sub.add_parser("map-coeffs", help="P <-> Q coefficient map")
    add_common(p, family=False)
    p.set_defaults(fn=_cmd_map_coeffs)

    p = sub.add_parser("profile", help="emit weight/map table",
                       description="CSV columns: xi, v, x  (weight value and "
                                   "the change of variables at each xi)")
    add_common(p, poly=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xi-grid", default="-10:10:0.25")
    p.set_defaults(fn=_cmd_profile)

    p = sub.add_parser("transform", help="emit b_m(x) and gauged b~_m(x)",
                       description="CSV columns: x, re_b0..im_bn, "
                                   "re_bt0..im_btn (raw and gauged operator "
                                   "coefficients)")
    add_common(p)
    p.add_argument("--x-grid", default="-20:20:0.5")
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("scatter", help="scattering matrices over a lambda grid")
    add_common(p)
    p.add_argument("--n", type=int, help="(ignored; degree from the polynomial)")
    p.add_argument("--lambda-min", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--truncation", type=float, default=1.0e4)
    p.set_defaults(fn=_cmd_scatter)

    p = sub.add_parser("longrange", help="sigma iteration and residual symbol",
                       description="CSV columns: x, re_sigma, im_sigma, "
                                   "re_resid, im_resid")
    add_common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--x-grid", default="100,1000,10000,100000")
    p.set_defaults(fn=_cmd_longrange)

    p = sub.add_parser("hankel-theta", help="sqrt(t) theta(t,k) vs asymptotics",
                       description="CSV columns: N (= ln t), re_theta, "
                                   "im_theta, re_asym, im_asym, residual")
    add_common(p)
    p.add_argument("--n", type=int, help="(ignored; degree from the polynomial)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--N-grid", default="-30:30:5")
    p.add_argument("--truncation", type=float, default=1.0e4)
    p.set_defaults(fn=_cmd_hankel_theta)

    p = sub.add_parser("statphase", help="stationary-phase remainder report")
    p.add_argument("--case", default="fresnel")
    p.add_argument("--N", default="1e2,1e3,1e4")
    p.add_argument("--emit", default=None)
    p.set_defaults(fn=_cmd_statphase)

    p = sub.add_parser("evolve", help="large-time profile prediction")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--T", type=float, default=1000.0)
    p.add_argument("--profile", default="gaussian")
    p.add_argument("--family", default="cosh",
                   choices=["cosh", "power_law", "stretched_exp"])
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--N-grid", default="-4:4:0.1",
                   help="grid of ln t in units of |T|")
    p.add_argument("--emit", default=None)
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="core", choices=["core", "scatter", "all"])
    p.set_defaults(fn=_cmd_verify)
    return ap


def _apply_config(args):
    path = getattr(args, "config", None)
    if not path:
        return
    with open(path) as fh:
        overrides = json.load(fh)
    for key, value in overrides.items():
        setattr(args, key.replace("-", "_"), value)


_VALUE_FLAGS = {"--p", "--q", "--xi-grid", "--x-grid", "--N-grid", "--N",
                "--lambda-min", "--lambda-max", "--k", "--T", "--alpha",
                "--beta", "--truncation", "--j"}


def _merge_negative_values(argv):
    """Join value flags with arguments that start with '-' (grids like
    -30:30:1 would otherwise be mistaken for options)."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and \
                argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None):
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = ap.parse_args(_merge_negative_values(list(argv)))
    try:
        _apply_config(args)
        rc = args.fn(args)
    except _Validation as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 2
    except Exception as exc:  # mapped below
        from .errors import ConfigurationError, DomainError, NumericalError

        if isinstance(exc, (ConfigurationError, DomainError)):
            sys.stderr.write(f"validation error: {exc}\n")
            return 2
        if isinstance(exc, NumericalError):
            sys.stderr.write(f"numerical failure: {exc}\n")
            return 3
        raise
    return rc


if __name__ == "__main__":
    sys.exit(main())
