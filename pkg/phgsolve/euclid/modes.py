"""
Modes Module - mode-reduced b-operators on asymptotically Euclidean R^n

用途:
- mode_reduce: rho^{-1} d, rho^{-1} delta_g (1-forms, 2-tensors) and rho^{-2} Laplacian per (l, type)
- mode_system: block-diagonal direct sum over l <= lmax, with the optional l = 1 coupling

Frame conventions live in harmonics.py. With rho = 1/r: r d/dr = -i rho D, d/dr = -i rho (rho D).
Divergences are formal adjoints for the metric density c(rho) rho^{-n} |drho / rho| (weight -n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..b_operator import BOperator, adjoint, compose, conjugate_by_weight, direct_sum
from ..errors import InadmissibleMode
from ..logs import get_logger
from .harmonics import components, harmonic_constants
from .metric import OPERATORS, TYPES, MetricSeries, MetricSpec, ModeSpec, check_admissible, metric_series

logger = get_logger("Modes")

# (row, col, j, constant, series name)
Entry = Tuple[str, str, int, complex, str]


@dataclass(frozen=True, eq=False)
class ModeBlock:
    operator: BOperator
    mode: ModeSpec
    rows: Tuple[str, ...]
    cols: Tuple[str, ...]

    @property
    def tag(self) -> str:
        return f"l={self.mode.ell} {self.mode.type}"


def _assemble(
    rows: Sequence[str],
    cols: Sequence[str],
    entries: Sequence[Entry],
    ms: MetricSeries,
    weight: float,
    label: str,
) -> BOperator:
    order = max((e[2] for e in entries), default=0)
    arr = np.zeros((order + 1, ms.depth + 1, len(rows), len(cols)), dtype=complex)
    for row, col, j, const, name in entries:
        if row not in rows or col not in cols:
            continue
        series = getattr(ms, name)
        arr[j, :, rows.index(row), cols.index(col)] += const * series[: ms.depth + 1]
    return BOperator(arr, weight, label)


def _multiplier(series: np.ndarray, dim: int, ms: MetricSeries, weight: float) -> BOperator:
    return BOperator.multiplication(list(series), dim, ms.depth, weight)


# ==================== gradients ====================


def _exterior_d(ms: MetricSeries, ell: int, n: int, weight: float) -> Tuple[BOperator, Tuple[str, ...], Tuple[str, ...]]:
    const = harmonic_constants(ell, n)
    rows = components("1form", ell, n, "scalar")
    cols = ("u",)
    entries: List[Entry] = [
        ("E1", "u", 1, -1j, "Fi"),
        ("E2", "u", 0, math.sqrt(const.lam), "Bi"),
    ]
    return _assemble(rows, cols, entries, ms, weight, f"d[l={ell}]"), rows, cols


def _sym_gradient(
    ms: MetricSeries, ell: int, n: int, htype: str, weight: float
) -> Tuple[BOperator, Tuple[str, ...], Tuple[str, ...]]:
    """rho^{-1} sym(nabla) from 1-form components to 2-tensor components."""
    const = harmonic_constants(ell, n)
    rows = components("2tensor", ell, n, htype)
    cols = components("1form", ell, n, htype)
    r2 = math.sqrt(2.0)
    entries: List[Entry] = []
    if htype == "scalar":
        lam, m = const.lam, const.m
        entries = [
            ("T1", "E1", 1, -1j, "Fi"),
            ("T2", "E2", 1, -1j / r2, "Fi"),
            ("T2", "E2", 0, -1.0 / r2, "Hs"),
            ("T2", "E1", 0, math.sqrt(lam) / r2, "Bi"),
            ("T3", "E1", 0, math.sqrt(m), "Hs"),
            ("T3", "E2", 0, -math.sqrt(lam / m), "Bi"),
        ]
        if lam > 0:
            entries.append(("T4", "E2", 0, const.N4 / math.sqrt(lam), "Bi"))
    elif htype == "vector":
        entries = [
            ("V1", "W1", 1, -1j / r2, "Fi"),
            ("V1", "W1", 0, -1.0 / r2, "Hs"),
            ("V2", "W1", 0, const.NV, "Bi"),
        ]
    return _assemble(rows, cols, entries, ms, weight, f"S[l={ell},{htype}]"), rows, cols


def _divergence(gradient: BOperator, ms: MetricSeries, label: str) -> BOperator:
    """c^{-1} (rho Q rho^{-1})* c for Q = rho^{-1} (gradient)."""
    Q = adjoint(conjugate_by_weight(gradient, -1.0))
    left = _multiplier(ms.cinv, Q.rows, ms, gradient.weight)
    right = _multiplier(ms.c, Q.cols, ms, gradient.weight)
    return compose(compose(left, Q), right).with_label(label)


def _degenerate(cols: Sequence[str], ms: MetricSeries, weight: float, label: str) -> BOperator:
    """Divergence on a family with no image components: a 0 x k operator."""
    return BOperator(np.zeros((1, ms.depth + 1, 0, len(cols)), dtype=complex), weight, label)


# ==================== mode_reduce ====================


def mode_block(metric: MetricSpec, mode: ModeSpec, weight: Optional[float] = None) -> ModeBlock:
    """mode_reduce together with the component names of rows and columns."""
    mode = ModeSpec(operator=mode.operator, ell=mode.ell, type=mode.type, n=metric.n)
    check_admissible(mode)
    ms = metric_series(metric)
    w = metric.weight if weight is None else float(weight)
    n, ell, htype = metric.n, mode.ell, mode.type
    label = f"{mode.operator}[l={ell},{htype}]"

    if mode.operator == "exterior_d":
        op, rows, cols = _exterior_d(ms, ell, n, w)
        return ModeBlock(op.with_label(label), mode, rows, cols)
    if mode.operator == "laplacian_scalar":
        d, _, _ = _exterior_d(ms, ell, n, w)
        div = _divergence(d, ms, "div")
        op = compose(conjugate_by_weight(div, 1.0), d)
        return ModeBlock(op.with_label(label), mode, ("u",), ("u",))
    if mode.operator == "div_1form":
        cols = components("1form", ell, n, htype)
        if htype == "vector":
            return ModeBlock(_degenerate(cols, ms, w, label), mode, (), cols)
        d, _, _ = _exterior_d(ms, ell, n, w)
        return ModeBlock(_divergence(d, ms, label), mode, ("u",), cols)
    if mode.operator == "div_2tensor":
        cols = components("2tensor", ell, n, htype)
        if htype == "tensor":
            return ModeBlock(_degenerate(cols, ms, w, label), mode, (), cols)
        S, out_rows, _ = _sym_gradient(ms, ell, n, htype, w)
        rows = components("1form", ell, n, htype)
        return ModeBlock(_divergence(S, ms, label), mode, rows, out_rows)
    raise InadmissibleMode(f"unknown operator: {mode.operator}")


def mode_reduce(metric: MetricSpec, mode: ModeSpec, weight: Optional[float] = None) -> BOperator:
    """
    b-operator on the radial profiles of one (l, type) block.

    Raises:
        InadmissibleMode: the harmonic family does not exist
    """
    return mode_block(metric, mode, weight).operator


def admissible_modes(operator: str, n: int, lmax: int) -> List[ModeSpec]:
    out = []
    for ell in range(lmax + 1):
        for htype in TYPES:
            mode = ModeSpec(operator=operator, ell=ell, type=htype, n=n)
            try:
                check_admissible(mode)
            except InadmissibleMode:
                continue
            out.append(mode)
    return out


# ==================== mode_system ====================


@dataclass(frozen=True, eq=False)
class ModeSystem:
    """Direct sum of mode blocks; offsets index rows / columns of each block in the sum."""

    operator: BOperator
    blocks: Tuple[ModeBlock, ...]
    row_offsets: Tuple[int, ...]
    col_offsets: Tuple[int, ...]

    def rows_of(self, ell: int, htype: str) -> Dict[str, int]:
        for b, r0 in zip(self.blocks, self.row_offsets):
            if b.mode.ell == ell and b.mode.type == htype:
                return {name: r0 + i for i, name in enumerate(b.rows)}
        return {}

    def cols_of(self, ell: int, htype: str) -> Dict[str, int]:
        for b, c0 in zip(self.blocks, self.col_offsets):
            if b.mode.ell == ell and b.mode.type == htype:
                return {name: c0 + i for i, name in enumerate(b.cols)}
        return {}

    def row_labels(self) -> List[str]:
        return [f"{b.tag} {name}" for b in self.blocks for name in b.rows]

    def col_labels(self) -> List[str]:
        return [f"{b.tag} {name}" for b in self.blocks for name in b.cols]


def _add_coupling(system: ModeSystem, coupling: float) -> BOperator:
    """coupling * (T1 + T2 + T3) of the l = 1 scalar block into the l = 1 vector W1 row, at rho^1."""
    target = system.rows_of(1, "vector").get("W1")
    sources = system.cols_of(1, "scalar")
    op = system.operator
    if target is None or not sources or op.taylor_depth < 1:
        logger.warning("coupling requested but the l = 1 vector / scalar blocks are not both present")
        return op
    arr = np.array(op.coeffs)
    for name in ("T1", "T2", "T3"):
        if name in sources:
            arr[0, 1, target, sources[name]] += coupling
    return BOperator(arr, op.weight, op.label)


def mode_system(
    metric: MetricSpec,
    operator: str,
    lmax: int,
    weight: Optional[float] = None,
) -> ModeSystem:
    """Block-diagonal operator over all admissible modes l <= lmax with a nonempty image."""
    if operator not in OPERATORS:
        raise InadmissibleMode(f"unknown operator: {operator}")
    blocks = []
    for mode in admissible_modes(operator, metric.n, lmax):
        block = mode_block(metric, mode, weight)
        if block.operator.rows == 0:
            logger.debug(f"skipping {block.tag}: no image components")
            continue
        blocks.append(block)
    if not blocks:
        raise InadmissibleMode(f"{operator} has no admissible modes up to l={lmax}")
    row_offsets, col_offsets = [], []
    r = c = 0
    for b in blocks:
        row_offsets.append(r)
        col_offsets.append(c)
        r += b.operator.rows
        c += b.operator.cols
    op = direct_sum([b.operator for b in blocks], label=f"{operator}[l<={lmax}]")
    system = ModeSystem(op, tuple(blocks), tuple(row_offsets), tuple(col_offsets))
    if operator == "div_2tensor" and metric.coupling != 0.0:
        system = ModeSystem(_add_coupling(system, metric.coupling), system.blocks, system.row_offsets, system.col_offsets)
    return system
