"""Command-line surface.

Subcommands cover the raw pipelines (zgv, curves, oracle) and the packaged
applications (2devp, dist-instab, double-eig, qep-zgv, mathieu). Reports are
canonical JSON on stdout or in the --out file; the curves subcommand writes a
CSV table. Whenever a report or table goes to a file, an eigencurve figure is
rendered next to it (same name, .png) unless --no-plot is given; --plot PATH
picks the figure location explicitly.

Exit codes: 0 success, 2 input error, 3 numerical failure. Failures put a
one-object error JSON on stderr.

The --seed flag wins over the optional EIGENCURVES_SEED environment variable;
with neither, the seed is 0.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .applications import (
    InvalidWeight,
    NotHermitian,
    NotIndefinite,
    NotStable,
    SingularLeadingCoeff,
    distance_to_instability,
    double_eigenvalue_points,
    mathieu_discretization,
    qep_zgv,
    sturm_liouville_critical,
    twod_eigenvalues,
)
from .io import PencilFormatError, dumps_canonical, load_matrices, load_pencil, \
    point_to_dict, report_to_dict
from .linalg import SingularPencil
from .oracle import zgv_oracle
from .pencil import BivariatePencil
from .points import (
    NotBiregular,
    NotCritical,
    NotOnCurve,
    critical_points_direct,
    critical_points_projected,
)
from .plots import render_report
from .refine import DivergedIterate, NoConvergence, mfrd_refine_all
from .singgep import ProjectedPencilSingular
from .twopar import SingularDelta0


class CliInputError(ValueError):
    """Bad argument values that argparse cannot catch itself."""


_INPUT_ERRORS = (PencilFormatError, CliInputError, NotHermitian, NotIndefinite,
                 NotStable, SingularLeadingCoeff, InvalidWeight)
_NUMERICAL_ERRORS = (NotBiregular, NotCritical, NotOnCurve, SingularPencil,
                     SingularDelta0, ProjectedPencilSingular, NoConvergence,
                     DivergedIterate)

_MODE_KEYS = {"zgv": "ZGV", "2d": "all2D"}


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("EIGENCURVES_SEED", "")
    if not env:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliInputError(f"EIGENCURVES_SEED must be an integer, got {env!r}")


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _plot_target(args) -> str | None:
    if getattr(args, "no_plot", False):
        return None
    if getattr(args, "plot", None):
        return args.plot
    if getattr(args, "out", None):
        return str(Path(args.out).with_suffix(".png"))
    return None


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _run_pipeline(P: BivariatePencil, args, seed: int):
    mode = _MODE_KEYS[args.mode]
    if args.method == "direct":
        kw = {}
        if args.delta is not None:
            kw["delta"] = args.delta
        return critical_points_direct(P, mode=mode, seed=seed,
                                      delta1=args.delta1, delta2=args.delta2,
                                      **kw)
    if args.method == "projected":
        return critical_points_projected(P, mode=mode, delta1=args.delta1,
                                         delta2=args.delta2, seed=seed)
    kw = {}
    if args.delta is not None:
        kw["delta"] = args.delta
    return mfrd_refine_all(P, mode=mode, seed=seed, **kw)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_zgv(args) -> int:
    P = load_pencil(args.pencil)
    seed = _resolve_seed(args.seed)
    rep = _run_pipeline(P, args, seed)
    _write_output(dumps_canonical(report_to_dict(rep)), args.out)
    target = _plot_target(args)
    if target:
        render_report(P, rep.points, target, lmin=args.lmin, lmax=args.lmax,
                      steps=args.steps, title=f"critical points ({rep.method})")
    return 0


def _cmd_curves(args) -> int:
    from .plots import curve_table, render_curves

    P = load_pencil(args.pencil)
    lams, table = curve_table(P, args.lmin, args.lmax, args.steps)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda"] + [f"mu_{j + 1}" for j in range(P.n)])
    for lam, row in zip(lams, table):
        w.writerow([repr(float(lam))] +
                   ["" if np.isnan(v) else repr(float(v)) for v in row])
    _write_output(buf.getvalue(), args.out)
    target = _plot_target(args)
    if target:
        render_curves(P, target, args.lmin, args.lmax, args.steps,
                      title="eigencurves")
    return 0


def _cmd_2devp(args) -> int:
    A, B = load_matrices(args.matrices, ("A", "B"))
    seed = _resolve_seed(args.seed)
    sols = twod_eigenvalues(A, B, method=args.method, seed=seed)
    doc = {
        "method": args.method,
        "seed": seed,
        "points": [{
            "lambda": s.lam,
            "mu": s.mu,
            "kind": s.kind,
            "residuals": {"equation": s.residual_eq,
                          "constraint": s.residual_constraint,
                          "normalization": s.residual_norm},
        } for s in sols],
    }
    _write_output(dumps_canonical(doc), args.out)
    target = _plot_target(args)
    if target:
        P = BivariatePencil(A, -B, -np.eye(A.shape[0]))
        render_report(P, [s.point for s in sols if s.point is not None],
                      target, steps=args.steps, title="constrained pairs")
    return 0


def _cmd_dist_instab(args) -> int:
    (A,) = load_matrices(args.matrix, ("A",))
    seed = _resolve_seed(args.seed)
    beta, lam_opt = distance_to_instability(A, method=args.method, seed=seed)
    doc = {"method": args.method, "seed": seed,
           "beta": beta, "lambda_opt": lam_opt}
    _write_output(dumps_canonical(doc), args.out)
    return 0


def _cmd_double_eig(args) -> int:
    A, B = load_matrices(args.matrices, ("A", "B"))
    seed = _resolve_seed(args.seed)
    pts = double_eigenvalue_points(A, B, method=args.method, seed=seed)
    doc = {"method": args.method, "seed": seed,
           "points": [{"mu": _pair(m), "lambda": _pair(l)} for m, l in pts]}
    _write_output(dumps_canonical(doc), args.out)
    return 0


def _cmd_qep_zgv(args) -> int:
    L0, L1, L2, M = load_matrices(args.matrices, ("L0", "L1", "L2", "M"))
    seed = _resolve_seed(args.seed)
    pts = qep_zgv(L0, L1, L2, M, method=args.method, seed=seed)
    doc = {"method": args.method, "seed": seed,
           "points": [{"lambda": lam, "omega": om} for lam, om in pts]}
    _write_output(dumps_canonical(doc), args.out)
    return 0


def _cmd_mathieu(args) -> int:
    if args.n < 8:
        raise CliInputError("--n must be at least 8")
    refine = []
    if args.refine:
        try:
            refine = [int(tok) for tok in args.refine.split(",") if tok]
        except ValueError:
            raise CliInputError(f"--refine must be comma-separated integers, "
                                f"got {args.refine!r}")
        if any(m < 8 for m in refine):
            raise CliInputError("--refine sizes must be at least 8")
    seed = _resolve_seed(args.seed)
    D = mathieu_discretization(args.n)
    pts = sturm_liouville_critical(D, refine, method=args.method, seed=seed)
    doc = {
        "method": args.method,
        "mode": "ZGV",
        "seed": seed,
        "thresholds": {},
        "points": [point_to_dict(p) for p in pts],
        "rejected": [],
    }
    _write_output(dumps_canonical(doc), args.out)
    target = _plot_target(args)
    if target:
        fine = mathieu_discretization(refine[-1]) if refine else D
        render_report(fine.interior_pencil(), pts, target, steps=args.steps,
                      title=f"periodic potential eigencurves (n={args.n})")
    return 0


def _cmd_oracle(args) -> int:
    P = load_pencil(args.pencil)
    if P.n > 4:
        raise CliInputError(f"the resultant oracle supports n <= 4, got n={P.n}")
    roots = zgv_oracle(P)
    doc = {
        "method": "oracle",
        "mode": "ZGV",
        "seed": 0,
        "thresholds": {"residual": 1e-8, "pmu": 1e-6},
        "points": [{"lambda": _pair(l), "mu": _pair(m)} for l, m in roots],
        "rejected": [],
    }
    _write_output(dumps_canonical(doc), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_common(sp, plot: bool = True) -> None:
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: EIGENCURVES_SEED or 0)")
    sp.add_argument("--out", default=None, help="write output to this file")
    if plot:
        sp.add_argument("--plot", default=None,
                        help="render the eigencurve figure to this PNG")
        sp.add_argument("--no-plot", action="store_true",
                        help="skip the figure next to --out")
        sp.add_argument("--steps", type=int, default=241,
                        help="lambda samples for figures/tables")


def _add_method(sp, choices=("direct", "projected", "mfrd")) -> None:
    sp.add_argument("--method", choices=choices, default="direct")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="eigencurves",
        description="Critical points of eigencurves of bivariate matrix "
                    "pencils A + lambda*B + mu*C.")
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("zgv", help="critical points of a pencil file")
    sp.add_argument("pencil", help="JSON file with matrices A, B, C")
    _add_method(sp)
    sp.add_argument("--mode", choices=("zgv", "2d"), default="zgv",
                    help="zgv: stationary points only; 2d: every critical point")
    sp.add_argument("--delta", type=float, default=None,
                    help="acceptance threshold (direct) or detuning (mfrd)")
    sp.add_argument("--delta1", type=float, default=1e-8,
                    help="singular-part residual threshold")
    sp.add_argument("--delta2", type=float, default=1e-10,
                    help="transversality threshold")
    sp.add_argument("--lmin", type=float, default=None)
    sp.add_argument("--lmax", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_zgv)

    sp = sub.add_parser("curves", help="sample eigencurves to CSV")
    sp.add_argument("pencil", help="JSON file with matrices A, B, C")
    sp.add_argument("--lmin", type=float, default=-2.0)
    sp.add_argument("--lmax", type=float, default=2.0)
    _add_common(sp)
    sp.set_defaults(func=_cmd_curves)

    sp = sub.add_parser("2devp",
                        help="constrained two-parameter eigenvalues "
                             "(Hermitian A, indefinite Hermitian B)")
    sp.add_argument("matrices", help="JSON file with matrices A, B")
    _add_method(sp)
    _add_common(sp)
    sp.set_defaults(func=_cmd_2devp)

    sp = sub.add_parser("dist-instab", help="distance to instability")
    sp.add_argument("matrix", help="JSON file with matrix A (stable)")
    _add_method(sp)
    _add_common(sp, plot=False)
    sp.set_defaults(func=_cmd_dist_instab)

    sp = sub.add_parser("double-eig",
                        help="parameters where A + mu*B has a multiple eigenvalue")
    sp.add_argument("matrices", help="JSON file with matrices A, B")
    _add_method(sp)
    _add_common(sp, plot=False)
    sp.set_defaults(func=_cmd_double_eig)

    sp = sub.add_parser("qep-zgv",
                        help="zero-group-velocity points of a quadratic "
                             "eigenvalue problem")
    sp.add_argument("matrices", help="JSON file with matrices L0, L1, L2, M")
    _add_method(sp)
    _add_common(sp, plot=False)
    sp.set_defaults(func=_cmd_qep_zgv)

    sp = sub.add_parser("mathieu", help="built-in periodic-potential demo")
    sp.add_argument("--n", type=int, default=25,
                    help="coarse collocation size (default 25)")
    sp.add_argument("--refine", default="",
                    help="comma-separated finer sizes, e.g. 50,100")
    _add_method(sp, choices=("direct", "projected"))
    sp.set_defaults(method="projected")
    _add_common(sp)
    sp.set_defaults(func=_cmd_mathieu)

    sp = sub.add_parser("oracle",
                        help="resultant-based stationary points (n <= 4)")
    sp.add_argument("pencil", help="JSON file with matrices A, B, C")
    sp.add_argument("--out", default=None, help="write output to this file")
    sp.set_defaults(func=_cmd_oracle)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        return _fail(2, exc)
    except _NUMERICAL_ERRORS as exc:
        return _fail(3, exc)


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(dumps_canonical({"error": type(exc).__name__,
                                      "message": str(exc)}))
    return code


if __name__ == "__main__":
    sys.exit(main())
