"""
B-Operator Module - totally characteristic operators P = sum_{j,t} A_{j,t} rho^t (rho D)^j

用途:
- Taylor-truncated operator representation with a reference-density weight w
- Normal part (Mellin family), formal action on polyhomogeneous expansions
- Adjoint with respect to rho^w |drho / rho|, conjugation by rho^alpha, composition, direct sums

Pinned conventions: D = -i d/drho, so rho D = -i rho d/drho; (rho D) rho^t = rho^t (rho D - i t);
(rho D)* = rho D - i w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, TaylorDepthExceeded
from .mellin_family import (
    MellinFamily,
    OrdFunction,
    SpectrumReport,
    injective_spectrum,
    ord_function as _family_ord_function,
    surjective_spectrum,
)
from .series_core import PhgExpansion, PhgTerm
from .settings import get_settings


def _binomial_shift(j: int, c: complex) -> List[complex]:
    """(X + c)^j = sum_p C(j, p) c^(j-p) X^p; returns the list over p."""
    return [math.comb(j, p) * complex(c) ** (j - p) for p in range(j + 1)]


@dataclass(frozen=True, eq=False)
class BOperator:
    """
    Operator blocks stored as coeffs[j, t] = A_{j,t}, shape (order+1, depth+1, rows, cols).

    Blocks with t beyond taylor_depth are unknown, not zero.
    """

    coeffs: np.ndarray
    weight: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=complex)
        if arr.ndim != 4 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"operator blocks must have shape (order+1, depth+1, rows, cols), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "weight", float(self.weight))

    # ---------- constructors ----------

    @classmethod
    def from_blocks(
        cls,
        blocks: Iterable[Tuple[int, int, np.ndarray]],
        order: int,
        taylor_depth: int,
        rows: int,
        cols: int,
        weight: float = 0.0,
        label: str = "",
    ) -> "BOperator":
        """Missing blocks are zero."""
        arr = np.zeros((order + 1, taylor_depth + 1, rows, cols), dtype=complex)
        for j, t, matrix in blocks:
            if not (0 <= j <= order and 0 <= t <= taylor_depth):
                raise DimensionMismatch(f"block (j={j}, t={t}) outside order {order} / depth {taylor_depth}")
            m = np.array(matrix, dtype=complex).reshape(rows, cols)
            arr[j, t] += m
        return cls(arr, weight, label)

    @classmethod
    def identity(cls, dim: int, taylor_depth: Optional[int] = None, weight: float = 0.0) -> "BOperator":
        depth = get_settings().series.taylor_depth if taylor_depth is None else taylor_depth
        return cls.from_blocks([(0, 0, np.eye(dim))], 0, depth, dim, dim, weight, "Id")

    @classmethod
    def rho_d(cls, dim: int = 1, taylor_depth: Optional[int] = None, weight: float = 0.0) -> "BOperator":
        depth = get_settings().series.taylor_depth if taylor_depth is None else taylor_depth
        return cls.from_blocks([(1, 0, np.eye(dim))], 1, depth, dim, dim, weight, "rhoD")

    @classmethod
    def multiplication(
        cls, series: Sequence[complex], dim: int, taylor_depth: Optional[int] = None, weight: float = 0.0
    ) -> "BOperator":
        """Multiplication by the scalar power series sum_t series[t] rho^t."""
        depth = get_settings().series.taylor_depth if taylor_depth is None else taylor_depth
        blocks = [(0, t, c * np.eye(dim)) for t, c in enumerate(series) if t <= depth]
        return cls.from_blocks(blocks, 0, depth, dim, dim, weight, "mult")

    # ---------- shape ----------

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def taylor_depth(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def rows(self) -> int:
        return self.coeffs.shape[2]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[3]

    def block(self, j: int, t: int) -> np.ndarray:
        if t > self.taylor_depth:
            raise TaylorDepthExceeded(f"rho^{t} block requested from an operator of Taylor depth {self.taylor_depth}")
        if j > self.order:
            return np.zeros((self.rows, self.cols), dtype=complex)
        return np.array(self.coeffs[j, t])

    def with_weight(self, weight: float) -> "BOperator":
        return BOperator(self.coeffs, weight, self.label)

    def with_label(self, label: str) -> "BOperator":
        return BOperator(self.coeffs, self.weight, label)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BOperator):
            return NotImplemented
        return (
            self.coeffs.shape == other.coeffs.shape
            and np.array_equal(self.coeffs, other.coeffs)
            and self.weight == other.weight
            and self.label == other.label
        )

    __hash__ = None  # type: ignore[assignment]

    def nonzero_blocks(self) -> List[Tuple[int, int, np.ndarray]]:
        return [
            (j, t, self.coeffs[j, t])
            for j in range(self.order + 1)
            for t in range(self.taylor_depth + 1)
            if np.any(self.coeffs[j, t])
        ]


# ==================== families ====================


def taylor_family(P: BOperator, t: int) -> MellinFamily:
    """N_t(z) = sum_j A_{j,t} z^j, the rho^t part of P."""
    if t > P.taylor_depth:
        raise TaylorDepthExceeded(f"rho^{t} part requested from an operator of Taylor depth {P.taylor_depth}")
    return MellinFamily(tuple(P.coeffs[:, t]))


def normal_part(P: BOperator) -> MellinFamily:
    return taylor_family(P, 0)


def ord_function(P: BOperator, jmax: Optional[int] = None, tol_rank: Optional[float] = None) -> OrdFunction:
    """s -> ord(P*, conj(-i s) + i w)."""
    return _family_ord_function(normal_part(P), P.weight, jmax, tol_rank)


def injective_spectrum_of(P: BOperator, strip: Tuple[float, float], jmax: Optional[int] = None) -> SpectrumReport:
    return injective_spectrum(normal_part(P), strip, jmax)


def surjective_spectrum_of(P: BOperator, strip: Tuple[float, float], jmax: Optional[int] = None) -> SpectrumReport:
    return surjective_spectrum(normal_part(P), P.weight, strip, jmax)


# ==================== action on expansions ====================


def apply_to_expansion(P: BOperator, u: PhgExpansion) -> PhgExpansion:
    """
    Formal term-by-term action.

    rho^t N_t(rho D) on rho^s L^k v (L = log rho) gives, with B_q = N_t^{(q)}(-i s) / q!,
    sum_q B_q v (-i)^q k! / (k-q)! rho^{s+t} L^{k-q}.
    The result is known up to min(u.remainder_order, min Re s + T + 1).
    """
    if u.dim != P.cols:
        raise DimensionMismatch(f"operator expects {P.cols} components, expansion has {u.dim}")
    if not u.terms:
        return PhgExpansion.empty(P.rows, u.remainder_order)
    smin = min(t.s.real for t in u.terms)
    remainder = min(u.remainder_order, smin + P.taylor_depth + 1)
    families = [taylor_family(P, t) for t in range(P.taylor_depth + 1)]
    out: List[PhgTerm] = []
    for term in u.terms:
        z0 = -1j * term.s
        for t, family in enumerate(families):
            if term.s.real + t >= remainder:
                break
            if not np.any(family.coeffs[0]) and family.degree == 0:
                continue
            B = family.taylor_at(z0, term.k + 1)
            for q in range(term.k + 1):
                factor = (-1j) ** q * math.factorial(term.k) / math.factorial(term.k - q)
                out.append(PhgTerm(term.s + t, term.k - q, factor * (B[q] @ term.coeff)))
    return PhgExpansion.from_terms(out, P.rows, remainder, strict=False)


# ==================== algebra ====================


def adjoint(P: BOperator) -> BOperator:
    """
    Formal adjoint for the density rho^w |drho / rho| and the fibre inner product.

    (rho^t A (rho D)^j)* = rho^t A^H (rho D - i (w + t))^j; N(P*, conj(z) + i w) = N(P, z)^H.
    """
    w = P.weight
    out = np.zeros((P.order + 1, P.taylor_depth + 1, P.cols, P.rows), dtype=complex)
    for j, t, A in P.nonzero_blocks():
        AH = A.conj().T
        for p, c in enumerate(_binomial_shift(j, -1j * (w + t))):
            out[p, t] += c * AH
    label = f"{P.label}*" if P.label else ""
    return BOperator(out, w, label)


def conjugate_by_weight(P: BOperator, alpha: float) -> BOperator:
    """rho^{-alpha} P rho^{alpha}: every rho D becomes rho D - i alpha."""
    out = np.zeros_like(P.coeffs)
    for j, t, A in P.nonzero_blocks():
        for p, c in enumerate(_binomial_shift(j, -1j * alpha)):
            out[p, t] += c * A
    return BOperator(out, P.weight, P.label)


def compose(P: BOperator, Q: BOperator) -> BOperator:
    """P Q to the shared Taylor depth, with (rho D)^j rho^t' = rho^t' (rho D - i t')^j."""
    if P.cols != Q.rows:
        raise DimensionMismatch(f"cannot compose {P.rows}x{P.cols} with {Q.rows}x{Q.cols}")
    depth = min(P.taylor_depth, Q.taylor_depth)
    out = np.zeros((P.order + Q.order + 1, depth + 1, P.rows, Q.cols), dtype=complex)
    q_blocks = Q.nonzero_blocks()
    for j, t, A in P.nonzero_blocks():
        if t > depth:
            continue
        for jq, tq, B in q_blocks:
            if t + tq > depth:
                continue
            AB = A @ B
            for p, c in enumerate(_binomial_shift(j, -1j * tq)):
                out[p + jq, t + tq] += c * AB
    label = f"({P.label})({Q.label})" if P.label or Q.label else ""
    return BOperator(out, P.weight, label)


def add_operators(P: BOperator, Q: BOperator) -> BOperator:
    if (P.rows, P.cols) != (Q.rows, Q.cols):
        raise DimensionMismatch(f"cannot add {P.rows}x{P.cols} and {Q.rows}x{Q.cols}")
    depth = min(P.taylor_depth, Q.taylor_depth)
    out = np.zeros((max(P.order, Q.order) + 1, depth + 1, P.rows, P.cols), dtype=complex)
    out[: P.order + 1] += P.coeffs[:, : depth + 1]
    out[: Q.order + 1] += Q.coeffs[:, : depth + 1]
    return BOperator(out, P.weight, P.label)


def direct_sum(ops: Sequence[BOperator], label: str = "") -> BOperator:
    """Block-diagonal operator; shares the first operator's weight."""
    if not ops:
        raise DimensionMismatch("direct sum of no operators")
    weights = {op.weight for op in ops}
    if len(weights) > 1:
        raise DimensionMismatch(f"direct sum of operators with different weights {sorted(weights)}")
    depth = min(op.taylor_depth for op in ops)
    order = max(op.order for op in ops)
    rows = sum(op.rows for op in ops)
    cols = sum(op.cols for op in ops)
    out = np.zeros((order + 1, depth + 1, rows, cols), dtype=complex)
    r = c = 0
    for op in ops:
        out[: op.order + 1, :, r:r + op.rows, c:c + op.cols] = op.coeffs[:, : depth + 1]
        r += op.rows
        c += op.cols
    return BOperator(out, ops[0].weight, label)
