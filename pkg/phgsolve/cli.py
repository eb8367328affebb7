"""
CLI Module - batch command-line surface

用途:
- spec: injective and surjective boundary spectra of an operator file, a normal family file or a
  mode-reduced operator
- solve / ppstar / kernel: formal, sharp, PP* and kernel-element solves of an operator file
- divspec / divsolve / oracle: the asymptotically Euclidean drivers

Exit status: 0 on success, 2 on NotSolvable / PredictionViolated, 1 on every other error.
Reports go to --out or stdout; logs go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from . import jsonio
from .b_operator import BOperator, injective_spectrum_of, surjective_spectrum_of
from .errors import InputError, NotSolvable, PhgSolveError, PredictionViolated
from .euclid import (
    MetricSpec,
    ModeSpec,
    boundary_spectrum_report,
    cartesian_apply_oracle,
    divsolve,
    mode_block,
    power_profile,
    radial_divergence_oracle,
)
from .euclid.metric import OPERATORS, TYPES
from .euclid.oracles import sampled_profile
from .euclid.spectrum import re_strip_to_im
from .formal_solver import formal_solve, kernel_element, ppstar_formal_solve, sharp_solve
from .logs import get_logger, set_level
from .mellin_family import injective_spectrum, surjective_spectrum
from .series_core import PhgExpansion
from .settings import get_settings, override_settings, reset_settings

logger = get_logger("CLI")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOLVABLE = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's exit 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise InputError(f"{self.prog}: {message}")


# ==================== parser ====================


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--tol-rank", type=float, default=None, help="relative singular-value threshold (default 1e-9)")
    p.add_argument("--tol-root", type=float, default=None, help="root clustering distance (default 1e-7)")
    p.add_argument("--jmax", type=int, default=None, help="longest singular chain tried (default 6)")
    p.add_argument("--quiet", action="store_true", help="log warnings only")
    return p


def _euclid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", type=Path, default=None, help='metric file {"n","a","b","coupling"}')
    p.add_argument("--n", type=int, default=None, help="dimension (default 3, or the metric file's)")
    p.add_argument("--operator", choices=OPERATORS, default="div_2tensor")
    p.add_argument("--lmax", type=int, default=None, help="largest harmonic degree (default 4)")
    p.add_argument("--weight", type=float, default=None, help="override the density weight -n")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = _Parser(prog="phgsolve", description="Polyhomogeneous formal solutions of b-differential systems")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("spec", parents=[common], help="boundary spectrum of an operator")
    p.add_argument("--op", type=Path, default=None, help="operator file")
    p.add_argument("--operator", choices=OPERATORS, default=None, help="mode-reduced operator instead of --op")
    p.add_argument("--family", type=Path, default=None, help="normal operator family file instead of --op")
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--type", choices=TYPES, default="scalar")
    p.add_argument("--metric", type=Path, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--weight", type=float, default=None)
    p.add_argument("--strip", type=float, nargs=2, metavar=("A", "B"), default=None, help="window in Re s")

    p = sub.add_parser("solve", parents=[common], help="formal or sharp solve")
    p.add_argument("--op", type=Path, required=True)
    p.add_argument("--rhs", type=Path, required=True, help='expansion file, optional "probe" field')
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--alpha-coker", type=float, default=None, help="run the sharp solve with this cokernel weight")
    p.add_argument("--weight", type=float, default=None)

    p = sub.add_parser("ppstar", parents=[common], help="PP* route compared with the sharp route")
    p.add_argument("--op", type=Path, required=True)
    p.add_argument("--rhs", type=Path, required=True)
    p.add_argument("--alpha", type=float, default=0.5, help="conjugation weight")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--alpha-coker", type=float, default=None)
    p.add_argument("--weight", type=float, default=None)

    p = sub.add_parser("kernel", parents=[common], help="formal kernel element")
    p.add_argument("--op", type=Path, required=True)
    p.add_argument("--s0", type=str, required=True, help="leading exponent, e.g. 1 or 1+2j")
    p.add_argument("--k", type=int, default=0, help="leading log power")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--weight", type=float, default=None)

    p = sub.add_parser("divspec", parents=[common], help="spectrum over modes l <= lmax")
    _euclid_args(p)
    p.add_argument("--strip", type=float, nargs=2, metavar=("A", "B"), default=None)
    p.add_argument("--kind", choices=["surjective", "injective"], default=None)

    p = sub.add_parser("divsolve", parents=[common], help="solve a divergence mode system")
    _euclid_args(p)
    p.add_argument("--route", choices=["sharp", "ppstar"], default="sharp")
    p.add_argument("--rhs", type=Path, default=None, help="forcing over the system rows; Schwartz if omitted")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--alpha-coker", type=float, default=None, help="default n/2")
    p.add_argument("--alpha", type=float, default=None, help="PP* weight (default 0.5)")

    p = sub.add_parser("oracle", parents=[common], help="numerical oracles")
    p.add_argument("which", choices=["radial", "cartesian"])
    _euclid_args(p)
    p.add_argument("--profile", type=Path, required=True, help="samples (radial) or power profile (cartesian)")
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--type", choices=TYPES, default="scalar")
    return ap


# ==================== helpers ====================


def _install_overrides(args: argparse.Namespace) -> None:
    override_settings(
        tolerances={"rank": args.tol_rank, "root_cluster": args.tol_root},
        chains={"jmax": args.jmax},
    )
    set_level("WARNING" if args.quiet else get_settings().logging.level)


def _operator(args: argparse.Namespace) -> BOperator:
    P = jsonio.load_operator(args.op)
    return P if getattr(args, "weight", None) is None else P.with_weight(args.weight)


def _rhs(path: Path, P: BOperator) -> Tuple[PhgExpansion, Optional[np.ndarray]]:
    f, probe = jsonio.load_expansion(path)
    if f.dim != P.rows:
        raise InputError(f"{path}: expansion has {f.dim} components, the operator has {P.rows} rows")
    return f, probe


def _metric(args: argparse.Namespace) -> MetricSpec:
    metric = jsonio.load_metric(args.metric) if args.metric is not None else MetricSpec()
    if args.n is not None:
        metric = MetricSpec(n=args.n, a=metric.a, b=metric.b, coupling=metric.coupling)
    return metric


def _strip(args: argparse.Namespace) -> Tuple[float, float]:
    lo, hi = args.strip if args.strip is not None else get_settings().cli.strip
    if not lo < hi:
        raise InputError(f"strip must satisfy A < B, got {lo} {hi}")
    return float(lo), float(hi)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"not a complex number: {text!r}") from exc


# ==================== commands ====================


def _family_spectrum(args: argparse.Namespace) -> str:
    N = jsonio.load_family(args.family)
    weight = 0.0 if args.weight is None else args.weight
    strip_im = re_strip_to_im(_strip(args))
    injective = injective_spectrum(N, strip_im)
    surjective = surjective_spectrum(N, weight, strip_im)
    if args.format == "csv":
        return jsonio.spectrum_csv(injective, surjective)
    return jsonio.dumps(
        {
            "family": jsonio.family_to_json(N),
            "weight": weight,
            "injective": jsonio.spectrum_report_to_json(injective),
            "surjective": jsonio.spectrum_report_to_json(surjective),
        }
    )


def cmd_spec(args: argparse.Namespace) -> str:
    if args.family is not None:
        return _family_spectrum(args)
    if args.op is not None:
        P = _operator(args)
    elif args.operator is not None:
        metric = _metric(args)
        mode = ModeSpec(operator=args.operator, ell=args.ell, type=args.type, n=metric.n)
        P = mode_block(metric, mode, args.weight).operator
    else:
        raise InputError("spec needs --op FILE, --family FILE or --operator NAME")
    strip_im = re_strip_to_im(_strip(args))
    injective = injective_spectrum_of(P, strip_im)
    surjective = surjective_spectrum_of(P, strip_im)
    if args.format == "csv":
        return jsonio.spectrum_csv(injective, surjective)
    return jsonio.dumps(
        {
            "operator": P.label,
            "weight": P.weight,
            "injective": jsonio.spectrum_report_to_json(injective),
            "surjective": jsonio.spectrum_report_to_json(surjective),
        }
    )


def _emit_solve(args: argparse.Namespace, report: Any, extra: Optional[Dict[str, Any]] = None) -> str:
    if args.format == "csv":
        return jsonio.expansion_csv(report.solution)
    payload = dict(extra or {})
    payload.update(jsonio.solve_report_to_json(report))
    return jsonio.dumps(payload)


def cmd_solve(args: argparse.Namespace) -> str:
    P = _operator(args)
    f, probe = _rhs(args.rhs, P)
    if args.alpha_coker is None:
        report = formal_solve(P, f, args.target)
    else:
        report = sharp_solve(P, f, args.alpha_coker, args.target, probe)
    return _emit_solve(args, report)


def cmd_ppstar(args: argparse.Namespace) -> str:
    P = _operator(args)
    f, probe = _rhs(args.rhs, P)
    report = ppstar_formal_solve(P, args.alpha, f, args.target, args.alpha_coker, probe)
    return _emit_solve(args, report)


def cmd_kernel(args: argparse.Namespace) -> str:
    P = _operator(args)
    report = kernel_element(P, _parse_complex(args.s0), args.k, args.target)
    return _emit_solve(args, report)


def cmd_divspec(args: argparse.Namespace) -> str:
    metric = _metric(args)
    lmax = get_settings().cli.lmax if args.lmax is None else args.lmax
    report = boundary_spectrum_report(metric, args.operator, _strip(args), lmax, args.kind)
    if args.format == "csv":
        return jsonio.spectrum_csv(report)
    return jsonio.dumps(
        {"operator": args.operator, "n": metric.n, "lmax": lmax, "spectrum": jsonio.spectrum_report_to_json(report)}
    )


def cmd_divsolve(args: argparse.Namespace) -> str:
    metric = _metric(args)
    lmax = get_settings().cli.lmax if args.lmax is None else args.lmax
    rhs, probe = (None, None) if args.rhs is None else jsonio.load_expansion(args.rhs)
    result = divsolve(
        metric,
        args.operator,
        lmax,
        route=args.route,
        rhs=rhs,
        alpha_coker=args.alpha_coker,
        target=args.target,
        alpha=args.alpha,
        probe=probe,
        weight=args.weight,
    )
    extra = {"system": {"rows": result.system.row_labels(), "cols": result.system.col_labels()}}
    return _emit_solve(args, result.report, extra)


def cmd_oracle(args: argparse.Namespace) -> str:
    profile = jsonio.load_profile(args.profile)
    if args.which == "radial":
        if not profile.r or len(profile.r) != len(profile.u):
            raise InputError(f"{args.profile}: radial oracle needs samples r and u of equal length")
        n = args.n if args.n is not None else 3
        support = profile.support if profile.support is not None else max(profile.r)
        result = radial_divergence_oracle(n, sampled_profile(profile.r, profile.u), support, profile.grid or None)
        if args.format == "csv":
            return jsonio.profile_csv(result.grid, {"f": result.profile})
        return jsonio.dumps(
            {
                "n": n,
                "support": support,
                "moment": result.moment,
                "integral": result.integral,
                "fittedExponent": jsonio.real_to_json(result.fitted_exponent),
                "rapidDecay": result.rapid_decay,
                "grid": [float(r) for r in result.grid],
                "profile": [float(v) for v in result.profile],
            }
        )

    metric = _metric(args)
    mode = ModeSpec(operator=args.operator, ell=args.ell, type=args.type, n=metric.n)
    if profile.s is None or not profile.grid:
        raise InputError(f"{args.profile}: cartesian oracle needs an exponent s and a grid")
    block = mode_block(metric, mode)
    weights = {k: jsonio.as_complex(v) for k, v in profile.weights.items()} or None
    u = power_profile(block, jsonio.as_complex(profile.s), weights)
    result = cartesian_apply_oracle(metric, mode, u, profile.grid)
    if args.format == "csv":
        columns: Dict[str, Sequence[complex]] = {}
        for i, name in enumerate(result.rows):
            columns[f"{name}.cartesian"] = result.cartesian[:, i]
            columns[f"{name}.mode"] = result.mode[:, i]
        return jsonio.profile_csv(result.grid, columns)
    return jsonio.dumps(
        {
            "operator": mode.operator,
            "ell": mode.ell,
            "type": mode.type,
            "rows": list(result.rows),
            "grid": [float(r) for r in result.grid],
            "cartesian": [jsonio.vector_to_json(row) for row in result.cartesian],
            "mode": [jsonio.vector_to_json(row) for row in result.mode],
            "relError": jsonio.real_to_json(result.rel_error),
            "order": jsonio.real_to_json(result.order),
            "estimate": jsonio.real_to_json(result.estimate),
        }
    )


COMMANDS: Dict[str, Callable[[argparse.Namespace], str]] = {
    "spec": cmd_spec,
    "solve": cmd_solve,
    "ppstar": cmd_ppstar,
    "kernel": cmd_kernel,
    "divspec": cmd_divspec,
    "divsolve": cmd_divsolve,
    "oracle": cmd_oracle,
}


# ==================== entry ====================


def _write(args: argparse.Namespace, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8")
    logger.info(f"report written to {args.out}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, run one command and return the exit status."""
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
    except InputError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_ERROR
    try:
        _install_overrides(args)
        _write(args, COMMANDS[args.command](args))
        return EXIT_OK
    except (NotSolvable, PredictionViolated) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_UNSOLVABLE
    except (PhgSolveError, ValidationError, ValueError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_ERROR
    finally:
        reset_settings()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
