"""
Drivers Module - solves on mode systems

divsolve runs the sharp or PP* route for a divergence mode system; probes select which cokernel
directions the Schwartz part of the forcing pairs with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from ..errors import InputError
from ..formal_solver import SolveReport, ppstar_formal_solve, sharp_solve
from ..logs import get_logger
from ..series_core import PhgExpansion
from .metric import MetricSpec
from .modes import ModeSystem, mode_system

logger = get_logger("Drivers")

DEFAULT_PPSTAR_ALPHA = 0.5


@dataclass(frozen=True, eq=False)
class DivSolveResult:
    system: ModeSystem
    report: SolveReport


def default_alpha_coker(metric: MetricSpec) -> float:
    """Self-dual weight -w/2 = n/2."""
    return metric.n / 2.0


def probe_without(system: ModeSystem, modes: Iterable[Tuple[int, str]]) -> np.ndarray:
    """All-ones probe with the rows of the given (l, type) blocks zeroed."""
    probe = np.ones(system.operator.rows, dtype=complex)
    for ell, htype in modes:
        for idx in system.rows_of(ell, htype).values():
            probe[idx] = 0.0
    return probe


def leading_exponent_of(report: SolveReport, components: Optional[Sequence[int]] = None) -> Optional[complex]:
    """Lowest exponent with a nonzero coefficient, optionally restricted to some components."""
    for term in report.solution.terms:
        coeff = term.coeff if components is None else term.coeff[list(components)]
        if coeff.size and np.max(np.abs(coeff)) > 0:
            return term.s
    return None


def divsolve(
    metric: MetricSpec,
    operator: str,
    lmax: int,
    route: str = "sharp",
    rhs: Optional[PhgExpansion] = None,
    alpha_coker: Optional[float] = None,
    target: Optional[float] = None,
    alpha: Optional[float] = None,
    probe: Optional[Sequence[complex]] = None,
    weight: Optional[float] = None,
) -> DivSolveResult:
    """
    Solve the mode system of a divergence operator.

    Args:
        rhs: forcing expansion over the system rows; empty (Schwartz forcing) by default
        alpha_coker: defaults to n/2, so alpha0 is the first surjective exponent above it
        route: "sharp" or "ppstar"
    """
    if operator not in ("div_1form", "div_2tensor"):
        raise InputError(f"divsolve needs a divergence operator, got {operator}")
    system = mode_system(metric, operator, lmax, weight)
    P = system.operator
    if target is None:
        target = float(metric.n + 2)
    f = PhgExpansion.empty(P.rows, target) if rhs is None else rhs
    if f.dim != P.rows:
        raise InputError(f"rhs has {f.dim} components, the mode system has {P.rows} rows")
    coker = default_alpha_coker(metric) if alpha_coker is None else float(alpha_coker)
    if route == "sharp":
        report = sharp_solve(P, f, coker, target, probe)
    elif route == "ppstar":
        a = DEFAULT_PPSTAR_ALPHA if alpha is None else float(alpha)
        report = ppstar_formal_solve(P, a, f, target, coker, probe)
    else:
        raise InputError(f"unknown route: {route}")
    logger.info(f"{operator} n={metric.n} l<={lmax} via {route}: {len(report.solution)} term(s) below {target:g}")
    return DivSolveResult(system, report)
