"""
Formal Solver Module - term-by-term formal solutions with sharp index sets

用途:
- formal_solve: solve away the rhs one exponent group at a time (normal solve + residue)
- sharp_solve: alpha0 selection, Schwartz corrections at surjective-spectrum points, prediction check
- ppstar_formal_solve: comparison route through T = (rho^-a P rho^a)(rho^-a P rho^a)*
- kernel_element: formal kernel elements of underdetermined operators with prescribed leading term

Every route returns a SolveReport whose realized index set is checked against the predicted one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .b_operator import (
    BOperator,
    adjoint,
    apply_to_expansion,
    compose,
    conjugate_by_weight,
    normal_part,
    ord_function,
    surjective_spectrum_of,
)
from .errors import InputError, NotUnderdetermined, PredictionViolated, TaylorDepthExceeded
from .logs import get_logger
from .mellin_family import SpectrumPoint, laurent_from_terms, residue_of, singular_chains
from .normal_solver import PairingContext, SchwartzCorrection, StageRecord, schwartz_correction, solve_normal
from .series_core import (
    FORCING,
    SCHWARTZ,
    IndexEntry,
    IndexSet,
    PhgExpansion,
    predicted_index_set,
    same_exponent,
)
from .settings import get_settings

logger = get_logger("Formal")

DIRECT = "direct"
PPSTAR = "ppstar"
KERNEL = "kernel"


# ==================== reports ====================


@dataclass(frozen=True)
class ExponentStep:
    """One normal solve: exponent, largest rhs log power, largest solution log power, J."""

    s: complex
    rhs_log: int
    solution_log: int
    J: int
    stages: Tuple[StageRecord, ...] = ()

    @property
    def log_enlargement(self) -> int:
        return max(0, self.solution_log - self.rhs_log)


@dataclass
class SolveDiagnostics:
    steps: List[ExponentStep] = field(default_factory=list)
    alpha0: Optional[float] = None
    corrections: List[SchwartzCorrection] = field(default_factory=list)
    defect_below_target: float = 0.0
    padded: bool = False


@dataclass(frozen=True)
class RouteComparison:
    """Realized index sets of the sharp and PP* routes for the same rhs."""

    sharp: IndexSet
    ppstar: IndexSet
    contained: bool
    strict: bool


@dataclass
class SolveReport:
    solution: PhgExpansion
    predicted: IndexSet
    realized: IndexSet
    residual: PhgExpansion
    route: str
    target: float
    diagnostics: SolveDiagnostics
    comparison: Optional[RouteComparison] = None


# ==================== helpers ====================


class _ContextCache:
    """PairingContext per exponent, reused across iterations."""

    def __init__(self, P: BOperator, jmax: Optional[int]):
        self.N = normal_part(P)
        self.w = P.weight
        self.jmax = jmax
        self._items: List[Tuple[complex, PairingContext]] = []

    def get(self, s: complex) -> PairingContext:
        for t, ctx in self._items:
            if same_exponent(t, s):
                return ctx
        ctx = PairingContext.build(self.N, self.w, -1j * complex(s), self.jmax)
        self._items.append((complex(s), ctx))
        return ctx


def default_target(f: PhgExpansion) -> float:
    lead = f.leading_exponent()
    base = lead.real if lead is not None else 0.0
    return base + get_settings().series.target_gap


def _check_depth(P: BOperator, lowest: float, target: float) -> None:
    if math.isfinite(lowest) and target > lowest + P.taylor_depth + 1 + 1e-12:
        raise TaylorDepthExceeded(
            f"target {target:g} needs Taylor depth beyond {P.taylor_depth} (lowest exponent {lowest:g})"
        )


def _prepare_rhs(f: PhgExpansion, target: float, diagnostics: SolveDiagnostics) -> PhgExpansion:
    if f.remainder_order < target:
        logger.warning(f"rhs known only to order {f.remainder_order:g}; padding with zero up to {target:g}")
        diagnostics.padded = True
        return f.with_remainder(target)
    return f


def _lowest(f: PhgExpansion, target: float) -> float:
    reals = [t.s.real for t in f.terms if t.s.real < target]
    return min(reals) if reals else math.inf


def _iterate(
    P: BOperator,
    rhs: PhgExpansion,
    target: float,
    solution: PhgExpansion,
    contexts: _ContextCache,
    diagnostics: SolveDiagnostics,
) -> Tuple[PhgExpansion, PhgExpansion]:
    """Solve away every rhs group below target; returns (solution, final rhs)."""
    while True:
        groups = [g for g in rhs.exponent_groups() if g[0].real < target]
        if not groups:
            return solution, rhs
        s0, terms = groups[0]
        ctx = contexts.get(s0)
        result = solve_normal(ctx, laurent_from_terms(terms, ctx.z0, P.rows))
        new_terms = residue_of(result.solution, s0)
        new = PhgExpansion.from_terms(new_terms, P.cols, target, strict=False)
        solution = solution + new
        image = apply_to_expansion(P, new.with_remainder(rhs.remainder_order))
        rhs = (rhs - image).without_exponent(s0)
        step = ExponentStep(
            s=s0,
            rhs_log=max(t.k for t in terms),
            solution_log=max((t.k for t in new_terms), default=-1),
            J=result.J,
            stages=result.stages,
        )
        diagnostics.steps.append(step)
        if step.log_enlargement:
            logger.info(f"s={s0:.6g}: log power raised by {step.log_enlargement} (J={result.J})")


def _defect(P: BOperator, u: PhgExpansion, f: PhgExpansion, target: float) -> float:
    image = apply_to_expansion(P, u.with_remainder(max(f.remainder_order, target)))
    return (image - f).max_magnitude(below=target)


def _check_prediction(realized: IndexSet, predicted: IndexSet, route: str) -> None:
    if realized.issubset(predicted):
        return
    extra = [(e.s, e.k) for e in realized if e.s.real < predicted.horizon and not predicted.contains(e.s, e.k)]
    raise PredictionViolated(f"{route} solution has terms outside the predicted index set: {extra[:5]}")


def _finish(
    P: BOperator,
    f: PhgExpansion,
    solution: PhgExpansion,
    rhs: PhgExpansion,
    target: float,
    predicted: IndexSet,
    route: str,
    diagnostics: SolveDiagnostics,
) -> SolveReport:
    diagnostics.defect_below_target = _defect(P, solution, f, target)
    realized = solution.index_set(target)
    _check_prediction(realized, predicted, route)
    return SolveReport(
        solution=solution,
        predicted=predicted,
        realized=realized,
        residual=-rhs,
        route=route,
        target=target,
        diagnostics=diagnostics,
    )


# ==================== formal solve ====================


def formal_solve(
    P: BOperator,
    f: PhgExpansion,
    target: Optional[float] = None,
    jmax: Optional[int] = None,
) -> SolveReport:
    """
    Formal solution u with P u - f = O(rho^target).

    Args:
        P: operator with surjective normal family at the exponents met
        f: rhs expansion; padded with zero when known to lower order than target
        target: defaults to the leading Re s of f plus the configured gap

    Raises:
        NotSolvable: propagated with the offending exponent
        TaylorDepthExceeded: target beyond what the Taylor depth determines
    """
    if f.dim != P.rows:
        raise InputError(f"rhs has {f.dim} components, operator has {P.rows} rows")
    target = default_target(f) if target is None else float(target)
    diagnostics = SolveDiagnostics()
    rhs = _prepare_rhs(f, target, diagnostics)
    _check_depth(P, _lowest(rhs, target), target)
    contexts = _ContextCache(P, jmax)
    solution, rhs_final = _iterate(P, rhs, target, PhgExpansion.empty(P.cols, target), contexts, diagnostics)
    predicted = predicted_index_set(rhs.index_set(target), ord_function(P, jmax), FORCING, target)
    return _finish(P, rhs, solution, rhs_final, target, predicted, DIRECT, diagnostics)


# ==================== sharp solve ====================


def select_alpha0(alpha_coker: float, surjective_reals: Iterable[float]) -> float:
    """alpha_coker itself when it is a real part of the surjective spectrum, else the next one above (or +inf)."""
    tol = get_settings().tolerances.exponent
    reals = sorted(float(r) for r in surjective_reals)
    for r in reals:
        if abs(r - alpha_coker) <= tol * max(1.0, abs(r)):
            return float(alpha_coker)
    above = [r for r in reals if r > alpha_coker]
    return above[0] if above else math.inf


def _surjective_points(P: BOperator, lo: float, hi: float, jmax: Optional[int]) -> List[SpectrumPoint]:
    """Surjective-spectrum points with Re s in (lo, hi)."""
    if not (math.isfinite(lo) and lo < hi):
        return []
    return list(surjective_spectrum_of(P, (-hi, -lo), jmax).points)


def _schwartz_entries(points: Sequence[SpectrumPoint], alpha0: float, target: float) -> List[IndexEntry]:
    tol = get_settings().tolerances.exponent
    return [
        IndexEntry(p.s, max((p.ord or 1) - 1, 0))
        for p in points
        if p.s.real >= alpha0 - tol * max(1.0, abs(alpha0)) and p.s.real < target
    ]


def _apply_corrections(
    P: BOperator,
    points: Sequence[SpectrumPoint],
    at: float,
    target: float,
    contexts: _ContextCache,
    probe: Optional[np.ndarray],
    diagnostics: SolveDiagnostics,
) -> PhgExpansion:
    """Schwartz corrections at the points with Re s = at."""
    out = PhgExpansion.empty(P.cols, target)
    if not math.isfinite(at):
        return out
    tol = get_settings().tolerances.exponent
    for p in points:
        if abs(p.s.real - at) > tol * max(1.0, abs(at)) or p.s.real >= target:
            continue
        corr = schwartz_correction(contexts.get(p.s), probe)
        diagnostics.corrections.append(corr)
        out = out + PhgExpansion.from_terms(corr.terms, P.cols, target, strict=False)
    return out


def _corrected_rhs(P: BOperator, f: PhgExpansion, V: PhgExpansion, exponents: Sequence[complex]) -> PhgExpansion:
    """f - P V with the correction exponents removed (P V vanishes there by construction)."""
    if V.is_zero():
        return f
    image = apply_to_expansion(P, V.with_remainder(f.remainder_order))
    for s in exponents:
        image = image.without_exponent(s)
    return f - image


def sharp_solve(
    P: BOperator,
    f: PhgExpansion,
    alpha_coker: float,
    target: Optional[float] = None,
    probe: Optional[Sequence[complex]] = None,
    jmax: Optional[int] = None,
) -> SolveReport:
    """
    Solution with index set E(P, F) u E(P, alpha0).

    Args:
        alpha_coker: supremum of the weights below which f pairs to zero with the cokernel;
            supplied by the caller, never inferred
        probe: vector defining the cokernel functional of the Schwartz part (default all ones)

    Raises:
        PredictionViolated: a realized term outside the predicted index set
    """
    if f.dim != P.rows:
        raise InputError(f"rhs has {f.dim} components, operator has {P.rows} rows")
    if math.isnan(alpha_coker) or alpha_coker == -math.inf:
        raise InputError("alpha_coker must be finite or +inf")
    target = default_target(f) if target is None else float(target)
    diagnostics = SolveDiagnostics()
    rhs = _prepare_rhs(f, target, diagnostics)

    alpha_f = min((t.s.real for t in rhs.terms if t.k == 0), default=math.inf)
    if alpha_coker > alpha_f:
        raise InputError(f"alpha_coker {alpha_coker:g} exceeds the leading log-free exponent {alpha_f:g} of f")

    points = _surjective_points(P, alpha_coker - 0.5, target, jmax)
    alpha0 = select_alpha0(alpha_coker, (p.s.real for p in points)) if math.isfinite(alpha_coker) else math.inf
    diagnostics.alpha0 = alpha0
    logger.info(f"alpha_coker={alpha_coker:g} -> alpha0={alpha0:g} ({len(points)} surjective point(s) below target)")
    _check_depth(P, min(_lowest(rhs, target), alpha0), target)

    contexts = _ContextCache(P, jmax)
    probe_vec = None if probe is None else np.asarray(probe, dtype=complex)
    V = _apply_corrections(P, points, alpha0, target, contexts, probe_vec, diagnostics)
    corrected = _corrected_rhs(P, rhs, V, [c.s for c in diagnostics.corrections])
    solution, rhs_final = _iterate(P, corrected, target, V, contexts, diagnostics)

    ord_fn = ord_function(P, jmax)
    predicted = predicted_index_set(rhs.index_set(target), ord_fn, FORCING, target)
    entries = _schwartz_entries(points, alpha0, target)
    if entries:
        predicted = predicted.union(predicted_index_set(entries, ord_fn, SCHWARTZ, target))
    return _finish(P, rhs, solution, rhs_final, target, predicted, DIRECT, diagnostics)


# ==================== PP* route ====================


def _orthogonal_points(
    P: BOperator, alpha_coker: Optional[float], lo: float, target: float, jmax: Optional[int]
) -> List[complex]:
    """Surjective-spectrum exponents of P in (lo, target) lying below alpha0; f pairs to zero there."""
    if alpha_coker is None:
        return []
    points = _surjective_points(P, lo - 0.5, target, jmax)
    alpha0 = select_alpha0(alpha_coker, (p.s.real for p in points)) if math.isfinite(alpha_coker) else math.inf
    if alpha0 == math.inf:
        return [p.s for p in points]
    tol = get_settings().tolerances.exponent
    return [p.s for p in points if p.s.real < alpha0 - tol * max(1.0, abs(alpha0))]



def ppstar_formal_solve(
    P: BOperator,
    alpha: float,
    f: PhgExpansion,
    target: Optional[float] = None,
    alpha_coker: Optional[float] = None,
    probe: Optional[Sequence[complex]] = None,
    jmax: Optional[int] = None,
    compare: bool = True,
) -> SolveReport:
    """
    u = rho^{2 alpha} P* rho^{-alpha} v with T v = rho^{-alpha} f, T = P_a P_a*, P_a = rho^-a P rho^a.

    The Schwartz part of v is corrected at every surjective-spectrum point of T with Re s above
    the self-dual weight -w/2, except where that point is a cokernel point of P below alpha0:
    there f pairs to zero, as in the sharp route. With alpha_coker=None every pairing is kept.
    With compare=True the sharp route runs on the same f and the realized index sets are
    compared (alpha_coker defaults to -w/2 there).
    """
    if f.dim != P.rows:
        raise InputError(f"rhs has {f.dim} components, operator has {P.rows} rows")
    if alpha_coker is not None and (math.isnan(alpha_coker) or alpha_coker == -math.inf):
        raise InputError("alpha_coker must be finite or +inf")
    target = default_target(f) if target is None else float(target)
    diagnostics = SolveDiagnostics()
    rhs = _prepare_rhs(f, target, diagnostics)

    P_a = conjugate_by_weight(P, alpha)
    T = compose(P_a, adjoint(P_a))
    back = conjugate_by_weight(adjoint(P), -alpha)
    v_target = target - alpha
    g = rhs.shift(-alpha)
    threshold = -P.weight / 2.0
    points = _surjective_points(T, threshold, v_target, jmax)
    _check_depth(T, min([_lowest(g, v_target)] + [p.s.real for p in points]), v_target)

    contexts = _ContextCache(T, jmax)
    probe_vec = None if probe is None else np.asarray(probe, dtype=complex)
    V = PhgExpansion.empty(T.cols, v_target)
    tol = get_settings().tolerances.exponent
    orthogonal = _orthogonal_points(P, alpha_coker, threshold + alpha, target, jmax)
    for p in points:
        if p.s.real <= threshold + tol * max(1.0, abs(threshold)):
            continue
        if any(same_exponent(p.s + alpha, q) for q in orthogonal):
            logger.info(f"s={p.s:.6g}: cokernel of P below alpha0, no Schwartz pairing")
            continue
        corr = schwartz_correction(contexts.get(p.s), probe_vec)
        diagnostics.corrections.append(corr)
        V = V + PhgExpansion.from_terms(corr.terms, T.cols, v_target, strict=False)
    corrected = _corrected_rhs(T, g, V, [c.s for c in diagnostics.corrections])
    v, rhs_final = _iterate(T, corrected, v_target, V, contexts, diagnostics)

    u = apply_to_expansion(back, v.with_remainder(max(g.remainder_order, v_target))).shift(alpha).truncate(target)

    ord_fn = ord_function(T, jmax)
    pred_v = predicted_index_set(g.index_set(v_target), ord_fn, FORCING, v_target)
    entries = [IndexEntry(p.s, max((p.ord or 1) - 1, 0)) for p in points if p.s.real > threshold]
    if entries:
        pred_v = pred_v.union(predicted_index_set(entries, ord_fn, SCHWARTZ, v_target))
    predicted = pred_v.shift(alpha)

    diagnostics.defect_below_target = _defect(P, u, rhs, target)
    realized = u.index_set(target)
    _check_prediction(realized, predicted, PPSTAR)
    comparison = None
    if compare:
        coker = threshold if alpha_coker is None else float(alpha_coker)
        alpha_f = min((t.s.real for t in rhs.terms if t.k == 0), default=math.inf)
        sharp = sharp_solve(P, rhs, min(coker, alpha_f), target, probe, jmax)
        contained = sharp.realized.issubset(realized)
        comparison = RouteComparison(sharp.realized, realized, contained, contained and not realized.issubset(sharp.realized))
        logger.info(f"PP* comparison: sharp {len(sharp.realized)} entries, PP* {len(realized)}, strict={comparison.strict}")
    return SolveReport(
        solution=u,
        predicted=predicted,
        realized=realized,
        residual=-(rhs_final.shift(alpha)),
        route=PPSTAR,
        target=target,
        diagnostics=diagnostics,
        comparison=comparison,
    )


# ==================== kernel elements ====================


def kernel_element(
    P: BOperator,
    s0: complex,
    k: int,
    target: Optional[float] = None,
    jmax: Optional[int] = None,
) -> SolveReport:
    """
    Formal element of ker P with leading term rho^{s0} (log rho)^k.

    Raises:
        NotUnderdetermined: chains of N at -i s0 stabilize, so no such element exists
    """
    s0 = complex(s0)
    if k < 0:
        raise InputError(f"log power must be nonnegative, got {k}")
    target = s0.real + get_settings().series.target_gap if target is None else float(target)
    _check_depth(P, s0.real, target)
    N = normal_part(P)
    depth = max(get_settings().chains.jmax if jmax is None else jmax, k)
    chains = singular_chains(N, -1j * s0, depth)
    if chains.resolved:
        raise NotUnderdetermined(
            f"chains at s={s0:.6g} stabilize at ord {chains.ord}; kernel elements need a wide family"
        )
    lead = chains.lot_basis(k)[:, 0]
    seed_terms = residue_of(chains.lift(k, lead), s0)
    seed = PhgExpansion.from_terms(seed_terms, P.cols, target, strict=False)
    diagnostics = SolveDiagnostics()
    forcing = PhgExpansion.empty(P.rows, target)
    rhs = -apply_to_expansion(P, seed).without_exponent(s0)
    rhs = rhs.with_remainder(target)
    solution, rhs_final = _iterate(P, rhs, target, seed, _ContextCache(P, jmax), diagnostics)
    predicted = predicted_index_set([IndexEntry(s0, k)], ord_function(P, jmax), SCHWARTZ, target)
    logger.info(f"kernel element at s0={s0:.6g}, k={k}: {len(solution)} term(s) below {target:g}")
    return _finish(P, forcing, solution, rhs_final, target, predicted, KERNEL, diagnostics)
