"""
Normal Solver Module - pairings between singular chains and the normal-operator solve

用途:
- PairingContext: chains of N at z0 and of the adjoint family at zeta0 = conj(z0) + i w, built once
- pairing_bj / residue_pairing / pairing_matrix: the bilinear forms between P and P* chains
- solve_normal: staged solve of N(z)u(z) - f(z) holomorphic at z0 with log enlargement <= J
- schwartz_correction: finite-dimensional correction at a surjective-spectrum point

Inner products are linear in the first slot: <a, b> = b^H a = np.vdot(b, a).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import NotSolvable
from .logs import get_logger
from .mellin_family import (
    ChainData,
    LaurentData,
    MellinFamily,
    adjoint_family,
    principal_coefficients,
    regular_coefficients,
    residue_of,
    singular_chains,
)
from .series_core import PhgTerm
from .settings import get_settings

logger = get_logger("Normal")


@dataclass(frozen=True, eq=False)
class PairingContext:
    """
    Everything the pairings need at one point z0, computed once.

    primal: chains of N at z0, computed up to j = J
    dual: chains of the adjoint family at zeta0; J = dual.ord
    quotients[j] / dual_quotients[j]: complements of F_[j+1] in F_[j], j < J
    """

    N: MellinFamily
    w: float
    z0: complex
    primal: ChainData
    dual: ChainData
    B: Tuple[np.ndarray, ...]
    Bstar: Tuple[np.ndarray, ...]
    quotients: Tuple[np.ndarray, ...]
    dual_quotients: Tuple[np.ndarray, ...]

    @classmethod
    def build(
        cls,
        N: MellinFamily,
        w: float,
        z0: complex,
        jmax: Optional[int] = None,
        tol_rank: Optional[float] = None,
    ) -> "PairingContext":
        z0 = complex(z0)
        M = adjoint_family(N, w)
        zeta0 = complex(np.conj(z0) + 1j * w)
        dual = singular_chains(M, zeta0, jmax, tol_rank)
        J = dual.require_ord()
        primal = singular_chains(N, z0, max(J - 1, 0), tol_rank)
        ctx = cls(
            N=N,
            w=float(w),
            z0=z0,
            primal=primal,
            dual=dual,
            B=tuple(N.taylor_at(z0, N.degree + 1)),
            Bstar=tuple(M.taylor_at(zeta0, M.degree + 1)),
            quotients=tuple(primal.quotient_basis(j) for j in range(J)),
            dual_quotients=tuple(dual.quotient_basis(j) for j in range(J)),
        )
        logger.debug(f"context at s={ctx.s:.6g}: J={J}, dual dims {dual.quotient_dims}")
        return ctx

    @property
    def J(self) -> int:
        return self.dual.require_ord()

    @property
    def zeta0(self) -> complex:
        return complex(np.conj(self.z0) + 1j * self.w)

    @property
    def s(self) -> complex:
        return 1j * self.z0

    @property
    def rows(self) -> int:
        return self.N.rows

    @property
    def cols(self) -> int:
        return self.N.cols

    def taylor(self, count: int) -> List[np.ndarray]:
        return _padded(self.B, count)

    def dual_taylor(self, count: int) -> List[np.ndarray]:
        return _padded(self.Bstar, count)


def _padded(B: Sequence[np.ndarray], count: int) -> List[np.ndarray]:
    zero = np.zeros_like(B[0])
    return [B[p] if p < len(B) else zero for p in range(count)]


def _holomorphic_value(B: Sequence[np.ndarray], u: LaurentData) -> np.ndarray:
    """Value at z0 of N(z)u(z) for u with holomorphic image."""
    return regular_coefficients(_padded(B, u.length + 1), u, 1)[0]


# ==================== pairings ====================


def lifted_pairing(ctx: PairingContext, utilde: LaurentData, ustar: np.ndarray) -> complex:
    """<N(z)u~(z), u*> at z0 for a lift u~ in F_j(P)."""
    return complex(np.vdot(np.asarray(ustar, dtype=complex), _holomorphic_value(ctx.B, utilde)))


def pairing_bj(ctx: PairingContext, j: int, u: np.ndarray, ustar: np.ndarray) -> complex:
    """
    b_j(u, u*) for u in F_[j](P, z0), u* in F_[j](P*, zeta0).

    Raises:
        NotInDomain: u or u* outside its leading-order space
    """
    ctx.dual.lift(j, ustar)
    return lifted_pairing(ctx, ctx.primal.lift(j, u), ustar)


def dual_pairing_bj(ctx: PairingContext, j: int, u: np.ndarray, ustar: np.ndarray) -> complex:
    """<u, M(zeta)u*~(zeta)> at zeta0; equals pairing_bj."""
    ctx.primal.lift(j, u)
    h = _holomorphic_value(ctx.Bstar, ctx.dual.lift(j, ustar))
    return complex(np.vdot(h, np.asarray(u, dtype=complex)))


def residue_pairing(ctx: PairingContext, utilde: LaurentData, ustartilde: LaurentData) -> complex:
    """
    Res_{z=z0} <N(z)u~(z), u*~(conj(z) + i w)>.

    With u*~ = sum_l (zeta - zeta0)^{-l-1} v_l the pairing is sum_l (z - z0)^{-l-1} <N u~, v_l>,
    so the residue is sum_l <c_l, v_l> where c_l is the (z - z0)^l coefficient of N u~.
    """
    L = ustartilde.length
    c = regular_coefficients(ctx.taylor(utilde.length + L), utilde, L)
    return complex(sum(np.vdot(v, c[l]) for l, v in enumerate(ustartilde.vectors)))


def pairing_matrix(ctx: PairingContext, j: int) -> np.ndarray:
    """b_j between the quotient bases; entry [b, a] pairs primal a with dual b."""
    Q = ctx.quotients[j] if j < len(ctx.quotients) else ctx.primal.quotient_basis(j)
    Qs = ctx.dual_quotients[j] if j < len(ctx.dual_quotients) else ctx.dual.quotient_basis(j)
    out = np.zeros((Qs.shape[1], Q.shape[1]), dtype=complex)
    for a in range(Q.shape[1]):
        lift = ctx.primal.lift(j, Q[:, a])
        for b in range(Qs.shape[1]):
            out[b, a] = lifted_pairing(ctx, lift, Qs[:, b])
    return out


# ==================== solve ====================


@dataclass(frozen=True)
class StageRecord:
    """One cokernel stage: chain length j, size of the pairings removed, rank used."""

    j: int
    pairing_norm: float
    rank: int


@dataclass(frozen=True, eq=False)
class NormalSolveResult:
    solution: LaurentData
    J: int
    log_enlargement: int
    defect: float
    stages: Tuple[StageRecord, ...] = field(default_factory=tuple)


def _combine(elements: Sequence[LaurentData], c: np.ndarray, z0: complex, dim: int, length: int) -> LaurentData:
    acc = LaurentData.zero(z0, dim, length)
    for e, ca in zip(elements, c):
        if ca != 0:
            acc = acc + e.scale(ca)
    return acc


def _solve_simple_pole(ctx: PairingContext, f0: np.ndarray, stages: List[StageRecord]) -> LaurentData:
    """u with N(z)u(z) - (z - z0)^{-1} f0 holomorphic."""
    tols = get_settings().tolerances
    f_cur = np.array(f0, dtype=complex)
    acc = LaurentData.zero(ctx.z0, ctx.cols, 1)
    for j in range(ctx.J - 1, -1, -1):
        duals = ctx.dual.lot_basis(j)
        if duals.shape[1] == 0:
            continue
        target = duals.conj().T @ f_cur
        if np.max(np.abs(target)) <= tols.pairing * max(1.0, np.linalg.norm(f_cur)):
            continue
        lifts = ctx.primal.elements(j)
        if not lifts:
            continue
        H = np.column_stack([_holomorphic_value(ctx.B, e) for e in lifts])
        system = duals.conj().T @ H
        c, _, rank, _ = np.linalg.lstsq(system, target, rcond=tols.rank)
        acc = acc + _combine(lifts, c, ctx.z0, ctx.cols, j + 1).shifted(1)
        f_cur = f_cur - H @ c
        stages.append(StageRecord(j, float(np.linalg.norm(target)), int(rank)))
        logger.debug(f"s={ctx.s:.6g}: stage j={j} removed pairing {np.linalg.norm(target):.3g}")

    N0 = ctx.B[0]
    u0 = np.linalg.lstsq(N0, f_cur, rcond=tols.rank)[0] if N0.size else np.zeros(ctx.cols, dtype=complex)
    defect = np.linalg.norm(N0 @ u0 - f_cur) if N0.size else np.linalg.norm(f_cur)
    if defect > tols.solve * max(1.0, np.linalg.norm(f0)):
        K = ctx.dual.lot_basis(0)
        obstruction = K @ (K.conj().T @ f_cur)
        raise NotSolvable(
            f"normal operator not solvable at s={ctx.s:.6g}: cokernel defect {defect:.3g}",
            exponent=ctx.s,
            obstruction=obstruction,
        )
    return acc + LaurentData(ctx.z0, (u0,))


def _principal(ctx: PairingContext, u: LaurentData) -> List[np.ndarray]:
    return principal_coefficients(ctx.taylor(u.length), u)


def solve_normal(ctx: PairingContext, f: LaurentData) -> NormalSolveResult:
    """
    Solve N(z)u(z) - f(z) holomorphic at z0, f = sum_k (z - z0)^{-k-1} f_k.

    Pole orders are handled from the top down: the simple-pole solve for the current
    coefficient is multiplied by (z - z0)^{-idx} and the remaining principal part recomputed.

    Raises:
        NotSolvable: a regular system is inconsistent; carries the obstructing functional
    """
    tols = get_settings().tolerances
    stages: List[StageRecord] = []
    result = LaurentData.zero(ctx.z0, ctx.cols, 1)
    r = list(f.vectors)
    for idx in range(f.length - 1, -1, -1):
        if np.max(np.abs(r[idx]), initial=0.0) <= tols.zero:
            continue
        piece = _solve_simple_pole(ctx, r[idx], stages).shifted(idx)
        result = result + piece
        image = _principal(ctx, result)
        r = [
            (f.vectors[i] if i < f.length else 0) - (image[i] if i < len(image) else 0)
            for i in range(f.length)
        ]
    result = result.trimmed()
    image = _principal(ctx, result)
    width = max(len(image), f.length)
    defect = 0.0
    for i in range(width):
        want = f.vectors[i] if i < f.length else np.zeros(ctx.rows, dtype=complex)
        got = image[i] if i < len(image) else np.zeros(ctx.rows, dtype=complex)
        defect = max(defect, float(np.max(np.abs(got - want), initial=0.0)))
    scale = max(1.0, max(np.max(np.abs(v), initial=0.0) for v in f.vectors))
    if defect > tols.solve * scale:
        raise NotSolvable(f"principal-part defect {defect:.3g} at s={ctx.s:.6g}", exponent=ctx.s)
    enlargement = max(0, result.length - f.length)
    logger.debug(f"s={ctx.s:.6g}: solved with {enlargement} extra log power(s), J={ctx.J}")
    return NormalSolveResult(result, ctx.J, enlargement, defect, tuple(stages))


def solve_at_exponent(ctx: PairingContext, f: LaurentData) -> LaurentData:
    return solve_normal(ctx, f).solution


# ==================== Schwartz correction ====================


@dataclass(frozen=True, eq=False)
class SchwartzCorrection:
    """
    Correction at one surjective-spectrum point.

    functional[b]: value of the cokernel functional on the dual chain basis element b
    terms: residue of the chosen combination of primal chains (empty when J = 0)
    """

    s: complex
    J: int
    functional: np.ndarray
    coefficients: np.ndarray
    rank: int
    mismatch: float
    terms: Tuple[PhgTerm, ...]


def schwartz_correction(ctx: PairingContext, probe: Optional[np.ndarray] = None) -> SchwartzCorrection:
    """
    Solve i b(v~_a, u*~_b) c_a = lambda_b over F_{J-1}(P) and F_{J-1}(P*).

    lambda_b = <probe, leading-order term of u*~_b>; the probe stands in for the forcing whose
    pairings against the cokernel cannot be computed formally.
    """
    J = ctx.J
    if J == 0:
        return SchwartzCorrection(ctx.s, 0, np.zeros(0, dtype=complex), np.zeros(0, dtype=complex), 0, 0.0, ())
    probe = np.ones(ctx.rows, dtype=complex) if probe is None else np.asarray(probe, dtype=complex).reshape(-1)
    lifts = ctx.primal.elements(J - 1)
    duals = ctx.dual.elements(J - 1)
    lam = np.array([np.vdot(d.lot, probe) for d in duals], dtype=complex)
    M = np.zeros((len(duals), len(lifts)), dtype=complex)
    for a, v in enumerate(lifts):
        for b, d in enumerate(duals):
            M[b, a] = 1j * residue_pairing(ctx, v, d)
    if not lifts or not duals:
        c, rank = np.zeros(len(lifts), dtype=complex), 0
    else:
        c, _, rank, _ = np.linalg.lstsq(M, lam, rcond=get_settings().tolerances.rank)
    mismatch = float(np.linalg.norm(M @ c - lam)) if lam.size else 0.0
    if mismatch > get_settings().tolerances.lift * max(1.0, float(np.linalg.norm(lam))):
        logger.warning(f"s={ctx.s:.6g}: cokernel functional only matched up to {mismatch:.3g}")
    v = _combine(lifts, c, ctx.z0, ctx.cols, J)
    terms = tuple(residue_of(v.trimmed(), ctx.s))
    logger.info(f"Schwartz correction at s={ctx.s:.6g}: J={J}, |lambda|={np.linalg.norm(lam):.3g}, rank {rank}")
    return SchwartzCorrection(ctx.s, J, lam, np.asarray(c), int(rank), mismatch, terms)
