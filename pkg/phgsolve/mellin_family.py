"""
Mellin Family Module - matrix polynomial families N(z) = sum_m A_m z^m

用途:
- Evaluation, Taylor coefficients at a point, shifted and adjoint families
- Indicial roots in a strip (companion pencil, clustering, Newton polish)
- Singular chains: principal parts sum_k (z - z0)^{-k-1} u_k with N(z)u(z) holomorphic,
  their leading-order spaces, ord and quotient dimensions
- Residues of Laurent data as expansion terms, and the ord function of the adjoint side

Conventions: exponent s <-> Mellin point z = -i s; the adjoint family with weight w satisfies
M(conj(z) + i w) = N(z)^H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, IdenticallySingular, NotInDomain, OrderNotResolved
from .logs import get_logger
from .series_core import PhgTerm, same_exponent
from .settings import get_settings

logger = get_logger("Mellin")

# fixed points for the det-identically-zero test
_PROBE_POINTS = (0.3718 + 0.5147j, -1.2309 + 0.7771j, 2.1913 - 1.4306j)


def shift_coefficients(coeffs: Sequence[np.ndarray], c: complex) -> List[np.ndarray]:
    """Coefficients of sum_m A_m (z + c)^m."""
    d = len(coeffs) - 1
    out = []
    for p in range(d + 1):
        acc = np.zeros_like(coeffs[0], dtype=complex)
        for m in range(p, d + 1):
            acc = acc + math.comb(m, p) * complex(c) ** (m - p) * coeffs[m]
        out.append(acc)
    return out


@dataclass(frozen=True, eq=False)
class MellinFamily:
    coeffs: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        mats = [np.array(a, dtype=complex, ndmin=2) for a in self.coeffs]
        if not mats:
            raise DimensionMismatch("a Mellin family needs at least one coefficient")
        shape = mats[0].shape
        for a in mats:
            if a.shape != shape:
                raise DimensionMismatch(f"coefficient shapes differ: {a.shape} vs {shape}")
            a.setflags(write=False)
        object.__setattr__(self, "coeffs", tuple(mats))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "MellinFamily":
        return cls((np.zeros((rows, cols), dtype=complex),))

    @property
    def rows(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def cols(self) -> int:
        return self.coeffs[0].shape[1]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def scale(self) -> float:
        """Largest coefficient norm; floor for rank decisions."""
        norms = [np.linalg.norm(a, 2) if a.size else 0.0 for a in self.coeffs]
        return max(norms) if norms else 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MellinFamily):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(
            np.array_equal(a, b) for a, b in zip(self.coeffs, other.coeffs)
        )

    __hash__ = None  # type: ignore[assignment]

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.array(self.coeffs[-1])
        for a in reversed(self.coeffs[:-1]):
            out = out * z + a
        return out

    def derivative(self) -> "MellinFamily":
        if self.degree == 0:
            return MellinFamily.zeros(self.rows, self.cols)
        return MellinFamily(tuple(m * self.coeffs[m] for m in range(1, len(self.coeffs))))

    def taylor_at(self, z0: complex, count: int) -> List[np.ndarray]:
        """B_0..B_{count-1} with N(z) = sum_p B_p (z - z0)^p."""
        shifted = shift_coefficients(self.coeffs, z0)
        zero = np.zeros((self.rows, self.cols), dtype=complex)
        return [shifted[p] if p < len(shifted) else zero for p in range(count)]

    def shifted(self, c: complex) -> "MellinFamily":
        """z -> N(z + c)."""
        return MellinFamily(tuple(shift_coefficients(self.coeffs, c)))

    def sharp(self) -> "MellinFamily":
        """sum_m A_m^H z^m (equals N(conj z)^H)."""
        return MellinFamily(tuple(a.conj().T for a in self.coeffs))

    def multiply(self, other: "MellinFamily") -> "MellinFamily":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out = [np.zeros((self.rows, other.cols), dtype=complex) for _ in range(self.degree + other.degree + 1)]
        for a, A in enumerate(self.coeffs):
            for b, B in enumerate(other.coeffs):
                out[a + b] = out[a + b] + A @ B
        return MellinFamily(tuple(out))

    def trimmed(self) -> "MellinFamily":
        """Drop exactly vanishing leading coefficients."""
        coeffs = list(self.coeffs)
        while len(coeffs) > 1 and not np.any(coeffs[-1]):
            coeffs.pop()
        return MellinFamily(tuple(coeffs))


def evaluate(N: MellinFamily, z: complex) -> np.ndarray:
    return N.evaluate(z)


def adjoint_family(N: MellinFamily, w: float) -> MellinFamily:
    """M(zeta) = sum_m A_m^H (zeta - i w)^m, so that M(conj(z) + i w) = N(z)^H."""
    return MellinFamily(tuple(shift_coefficients([a.conj().T for a in N.coeffs], -1j * w)))


# ==================== rank helpers ====================


def _rank_tol(tol: Optional[float]) -> float:
    return get_settings().tolerances.rank if tol is None else tol


def null_space(T: np.ndarray, tol: float, scale: float = 0.0) -> np.ndarray:
    """Orthonormal kernel basis; singular values below tol * max(sigma_max, scale) count as zero."""
    rows, cols = T.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = sla.svd(T, full_matrices=True)
    floor = tol * max(s[0] if s.size else 0.0, scale)
    rank = int(np.sum(s > floor)) if floor > 0 else int(np.sum(s > 0))
    return vh[rank:].conj().T


def orth(A: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal range basis with an absolute floor of tol (columns of A are at most unit size)."""
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    u, s, _ = sla.svd(A, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank]


def singular_ratio(M: np.ndarray, scale: float = 0.0) -> float:
    """sigma_min / max(sigma_max, scale); 0 for rank-deficient shapes."""
    if M.size == 0:
        return 1.0
    if M.shape[0] < M.shape[1]:
        return 0.0
    s = sla.svdvals(M)
    denom = max(s[0], scale)
    return float(s[-1] / denom) if denom > 0 else 0.0


# ==================== indicial roots ====================


def _inside(x: float, lo: float, hi: float) -> bool:
    tol = get_settings().tolerances.exponent * max(1.0, abs(x))
    return lo + tol < x < hi - tol


def _check_regular(N: MellinFamily, tol: float) -> None:
    scale = N.scale
    if all(singular_ratio(N.evaluate(z), scale) <= tol for z in _PROBE_POINTS):
        raise IdenticallySingular(f"det N(z) vanishes identically ({N.rows}x{N.cols}, degree {N.degree})")


def _finite_eigenvalues(N: MellinFamily) -> np.ndarray:
    fam = N.trimmed()
    d, n = fam.degree, fam.rows
    if d == 0:
        return np.zeros(0, dtype=complex)
    size = n * d
    C = np.zeros((size, size), dtype=complex)
    D = np.eye(size, dtype=complex)
    for i in range(d - 1):
        C[i * n:(i + 1) * n, (i + 1) * n:(i + 2) * n] = np.eye(n)
    for m in range(d):
        C[(d - 1) * n:, m * n:(m + 1) * n] = -fam.coeffs[m]
    D[(d - 1) * n:, (d - 1) * n:] = fam.coeffs[d]
    alpha, beta = sla.eig(C, D, right=False, homogeneous_eigvals=True)
    finite = np.abs(beta) * 1e12 > np.abs(alpha)
    return alpha[finite] / beta[finite]


def _polish(N: MellinFamily, z: complex) -> complex:
    """Newton on det N: z <- z - 1 / tr(N(z)^{-1} N'(z))."""
    dN = N.derivative()
    start = z
    for _ in range(4):
        try:
            tr = np.trace(np.linalg.solve(N.evaluate(z), dN.evaluate(z)))
        except np.linalg.LinAlgError:
            break
        if tr == 0 or not np.isfinite(tr):
            break
        step = -1.0 / tr
        z = z + step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    if abs(z - start) > get_settings().tolerances.root_cluster * max(1.0, abs(start)):
        logger.warning(f"Newton polish drifted from {start:.6g} to {z:.6g}; keeping the eigenvalue")
        return start
    return z


def _cluster(eigs: Iterable[complex], tol: float) -> List[List[complex]]:
    clusters: List[List[complex]] = []
    for z in sorted(eigs, key=lambda v: (v.real, v.imag)):
        for c in clusters:
            if any(abs(z - m) <= tol * max(1.0, abs(m)) for m in c):
                c.append(z)
                break
        else:
            clusters.append([z])
    return clusters


def _exponent_order(z: complex) -> Tuple[float, float]:
    s = 1j * z
    return (s.real, s.imag)


def indicial_roots(
    N: MellinFamily,
    strip: Tuple[float, float],
    tol_root: Optional[float] = None,
    tol_rank: Optional[float] = None,
) -> List[Tuple[complex, int]]:
    """
    Roots of det N(z) with Im z strictly inside the strip.

    Args:
        N: square family
        strip: (ImMin, ImMax)

    Returns:
        (z0, multiplicity) sorted by exponent s = i z0
    """
    if not N.is_square:
        raise DimensionMismatch(f"indicial roots need a square family, got {N.rows}x{N.cols}")
    if N.rows == 0:
        return []
    settings = get_settings()
    tol_root = settings.tolerances.root_cluster if tol_root is None else tol_root
    _check_regular(N, _rank_tol(tol_rank))

    scale = N.scale
    roots: List[Tuple[complex, int]] = []
    for members in _cluster(_finite_eigenvalues(N), tol_root):
        z = complex(np.mean(members))
        if len(members) == 1:
            z = _polish(N, z)
        if singular_ratio(N.evaluate(z), scale) > settings.tolerances.root_check:
            logger.debug(f"discarding spurious eigenvalue {z:.6g}")
            continue
        roots.append((z, len(members)))
    lo, hi = strip
    found = [(z, m) for z, m in roots if _inside(z.imag, lo, hi)]
    return sorted(found, key=lambda r: _exponent_order(r[0]))


def _tall_roots(M: MellinFamily, strip: Tuple[float, float], tol_root: Optional[float]) -> List[Tuple[complex, Optional[int]]]:
    """Points where a tall family loses rank: roots of det(M^# M) filtered by rank of M."""
    aux = M.sharp().multiply(M)
    check = get_settings().tolerances.root_check
    scale = M.scale
    out = []
    for z, _ in indicial_roots(aux, strip, tol_root):
        if singular_ratio(M.evaluate(z), scale) <= check:
            out.append((z, None))
    return out


def family_roots(
    N: MellinFamily, strip: Tuple[float, float], tol_root: Optional[float] = None
) -> List[Tuple[complex, Optional[int]]]:
    """Points where N(z) fails to be injective; square or tall families only."""
    if N.is_square:
        return list(indicial_roots(N, strip, tol_root))
    if N.rows > N.cols:
        return _tall_roots(N, strip, tol_root)
    raise OrderNotResolved(f"{N.rows}x{N.cols} family has a kernel at every point; no discrete spectrum")


# ==================== Laurent data and singular chains ====================


@dataclass(frozen=True, eq=False)
class LaurentData:
    """Principal part sum_k (z - z0)^{-k-1} u_k; the last vector is the leading-order term."""

    z0: complex
    vectors: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        vecs = [np.array(v, dtype=complex).reshape(-1) for v in self.vectors]
        if not vecs:
            raise ValueError("Laurent data needs at least one vector")
        dim = vecs[0].shape[0]
        for v in vecs:
            if v.shape != (dim,):
                raise DimensionMismatch("Laurent vectors differ in length")
            v.setflags(write=False)
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "vectors", tuple(vecs))

    @classmethod
    def zero(cls, z0: complex, dim: int, length: int = 1) -> "LaurentData":
        return cls(z0, tuple(np.zeros(dim, dtype=complex) for _ in range(length)))

    @property
    def length(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.vectors[0].shape[0]

    @property
    def lot(self) -> np.ndarray:
        return self.vectors[-1]

    def as_array(self) -> np.ndarray:
        return np.vstack(self.vectors)

    def padded(self, length: int) -> "LaurentData":
        extra = tuple(np.zeros(self.dim, dtype=complex) for _ in range(max(0, length - self.length)))
        return LaurentData(self.z0, self.vectors + extra)

    def shifted(self, p: int) -> "LaurentData":
        """(z - z0)^{-p} times the data."""
        lead = tuple(np.zeros(self.dim, dtype=complex) for _ in range(p))
        return LaurentData(self.z0, lead + self.vectors)

    def trimmed(self, tol: Optional[float] = None) -> "LaurentData":
        tol = get_settings().tolerances.zero if tol is None else tol
        vecs = list(self.vectors)
        while len(vecs) > 1 and np.max(np.abs(vecs[-1]), initial=0.0) <= tol:
            vecs.pop()
        return LaurentData(self.z0, tuple(vecs))

    def __add__(self, other: "LaurentData") -> "LaurentData":
        n = max(self.length, other.length)
        a, b = self.padded(n), other.padded(n)
        return LaurentData(self.z0, tuple(x + y for x, y in zip(a.vectors, b.vectors)))

    def scale(self, c: complex) -> "LaurentData":
        return LaurentData(self.z0, tuple(c * v for v in self.vectors))


def toeplitz_system(B: Sequence[np.ndarray], j: int) -> np.ndarray:
    """Block (r, c) = B_{c-r} for c >= r: holomorphy of N(z) sum_{k<=j} (z-z0)^{-k-1} u_k."""
    rows, cols = B[0].shape
    T = np.zeros(((j + 1) * rows, (j + 1) * cols), dtype=complex)
    for r in range(j + 1):
        for c in range(r, j + 1):
            T[r * rows:(r + 1) * rows, c * cols:(c + 1) * cols] = B[c - r]
    return T


def principal_coefficients(B: Sequence[np.ndarray], u: LaurentData) -> List[np.ndarray]:
    """Coefficient of (z - z0)^{-r-1} in N(z) u(z), r = 0..len-1."""
    L = u.length
    out = []
    for r in range(L):
        acc = np.zeros(B[0].shape[0], dtype=complex)
        for p in range(L - r):
            acc = acc + B[p] @ u.vectors[r + p]
        out.append(acc)
    return out


def regular_coefficients(B: Sequence[np.ndarray], u: LaurentData, count: int) -> List[np.ndarray]:
    """Coefficient of (z - z0)^r in N(z) u(z), r = 0..count-1; B must hold len(u) + count terms."""
    out = []
    for r in range(count):
        acc = np.zeros(B[0].shape[0], dtype=complex)
        for k, v in enumerate(u.vectors):
            acc = acc + B[r + k + 1] @ v
        out.append(acc)
    return out


@dataclass(frozen=True, eq=False)
class ChainData:
    """
    Singular chains of a family at z0.

    bases[j]: orthonormal basis (columns) of F_j, stacked blocks u_0..u_j
    lot_bases[j]: orthonormal basis of the leading-order space F_[j]
    ord: smallest j with F_[j] = 0, None when not reached by jmax + 1
    """

    z0: complex
    cols: int
    bases: Tuple[np.ndarray, ...]
    lot_bases: Tuple[np.ndarray, ...]
    ord: Optional[int]
    jmax: int

    @property
    def resolved(self) -> bool:
        return self.ord is not None

    @property
    def lot_dims(self) -> Tuple[int, ...]:
        return tuple(b.shape[1] for b in self.lot_bases)

    @property
    def quotient_dims(self) -> Tuple[int, ...]:
        """dim F_j / F_{j-1} = dim F_[j] for j < ord."""
        dims = self.lot_dims
        return dims[: self.ord] if self.resolved else dims

    @property
    def partial_multiplicities(self) -> Tuple[int, ...]:
        """dim F_[j] / F_[j+1] for j < ord: number of chains of length exactly j + 1."""
        if not self.resolved:
            return ()
        dims = self.lot_dims
        return tuple(dims[j] - dims[j + 1] for j in range(self.ord))

    def require_ord(self) -> int:
        if self.ord is None:
            raise OrderNotResolved(
                f"singular chains at z0={self.z0:.6g} did not stabilize by jmax={self.jmax}",
                z0=self.z0,
                jmax=self.jmax,
            )
        return self.ord

    def _check_computed(self, j: int) -> bool:
        """True when F_[j] is known to vanish beyond the computed range."""
        if j < len(self.bases):
            return False
        if self.resolved:
            return True
        raise OrderNotResolved(f"chains at z0={self.z0:.6g} computed only up to j={len(self.bases) - 1}", z0=self.z0)

    def elements(self, j: int) -> List[LaurentData]:
        """Basis of F_j as Laurent data of length j + 1."""
        if self._check_computed(j):
            # beyond ord, F_j is F_{ord-1} padded with zero leading-order terms
            if not self.ord:
                return []
            return [e.padded(j + 1) for e in self.elements(self.ord - 1)]
        basis = self.bases[j]
        return [LaurentData(self.z0, tuple(col.reshape(j + 1, self.cols))) for col in basis.T]

    def lot_basis(self, j: int) -> np.ndarray:
        if self._check_computed(j):
            return np.zeros((self.cols, 0), dtype=complex)
        return self.lot_bases[j]

    def quotient_basis(self, j: int) -> np.ndarray:
        """Orthonormal complement of F_[j+1] inside F_[j]."""
        Q = self.lot_basis(j)
        R = self.lot_basis(j + 1)
        if R.shape[1]:
            Q = Q - R @ (R.conj().T @ Q)
        return orth(Q, _rank_tol(None))

    def lift(self, j: int, u: np.ndarray, tol: Optional[float] = None) -> LaurentData:
        """Minimal-norm element of F_j with leading-order term u."""
        tol = get_settings().tolerances.lift if tol is None else tol
        u = np.asarray(u, dtype=complex).reshape(-1)
        if self._check_computed(j):
            if np.linalg.norm(u) <= tol:
                return LaurentData.zero(self.z0, self.cols, j + 1)
            raise NotInDomain(f"leading-order space at j={j} is zero at z0={self.z0:.6g}")
        basis = self.bases[j]
        lot = basis[j * self.cols:(j + 1) * self.cols, :]
        if basis.shape[1] == 0:
            coeffs = np.zeros(0, dtype=complex)
        else:
            coeffs = np.linalg.lstsq(lot, u, rcond=_rank_tol(None))[0]
        residual = np.linalg.norm(lot @ coeffs - u) if coeffs.size else np.linalg.norm(u)
        if residual > tol * max(1.0, np.linalg.norm(u)):
            raise NotInDomain(f"vector is not a leading-order term at j={j} (residual {residual:.3g})")
        stacked = basis @ coeffs if coeffs.size else np.zeros((j + 1) * self.cols, dtype=complex)
        return LaurentData(self.z0, tuple(stacked.reshape(j + 1, self.cols)))


def singular_chains(
    N: MellinFamily,
    z0: complex,
    jmax: Optional[int] = None,
    tol_rank: Optional[float] = None,
) -> ChainData:
    """
    Spaces F_j of principal parts with N(z)u(z) holomorphic at z0, j = 0..jmax+1.

    Stops at the first j with F_[j] = 0 (then ord = j); ord stays None otherwise.
    """
    settings = get_settings()
    jmax = settings.chains.jmax if jmax is None else jmax
    tol = _rank_tol(tol_rank)
    B = N.taylor_at(z0, jmax + 2)
    scale = max((np.linalg.norm(b, 2) if b.size else 0.0) for b in B)
    bases: List[np.ndarray] = []
    lots: List[np.ndarray] = []
    order: Optional[int] = None
    cols = N.cols
    for j in range(jmax + 2):
        basis = null_space(toeplitz_system(B, j), tol, scale)
        if basis.shape[0] == 0:
            basis = np.zeros(((j + 1) * cols, 0), dtype=complex)
        lot = orth(basis[j * cols:(j + 1) * cols, :], tol)
        bases.append(basis)
        lots.append(lot)
        if lot.shape[1] == 0:
            order = j
            break
    return ChainData(complex(z0), cols, tuple(bases), tuple(lots), order, jmax)


def residue_of(u: LaurentData, s0: Optional[complex] = None) -> List[PhgTerm]:
    """Res_{z=z0} rho^{iz} u(z): terms (s0, k, i^k / k! u_k) with s0 = i z0."""
    s0 = 1j * u.z0 if s0 is None else complex(s0)
    zero = get_settings().tolerances.zero
    terms = []
    for k, v in enumerate(u.vectors):
        c = (1j ** k / math.factorial(k)) * v
        if c.size and np.max(np.abs(c)) > zero:
            terms.append(PhgTerm(s0, k, c))
    return terms


def laurent_from_terms(terms: Sequence[PhgTerm], z0: complex, dim: int) -> LaurentData:
    """Inverse of residue_of for terms sharing one exponent: u_k = k! (-i)^k c_k."""
    kmax = max((t.k for t in terms), default=0)
    vecs = [np.zeros(dim, dtype=complex) for _ in range(kmax + 1)]
    for t in terms:
        vecs[t.k] = vecs[t.k] + math.factorial(t.k) * (-1j) ** t.k * t.coeff
    return LaurentData(z0, tuple(vecs))


# ==================== spectra and the ord function ====================


@dataclass(frozen=True)
class SpectrumPoint:
    """
    One boundary-spectrum point.

    z0 is the Mellin point on the operator side (s = i z0); for surjective points the chains
    were computed for the adjoint family at zeta0 = conj(z0) + i w.
    """

    z0: complex
    s: complex
    det_multiplicity: Optional[int]
    ord: Optional[int]
    quotient_dims: Tuple[int, ...]
    partial_multiplicities: Tuple[int, ...] = ()
    zeta0: Optional[complex] = None
    provenance: Tuple[str, ...] = ()


@dataclass(frozen=True)
class SpectrumReport:
    points: Tuple[SpectrumPoint, ...]
    strip: Tuple[float, float]
    kind: str = "injective"

    def exponents(self) -> List[complex]:
        return [p.s for p in self.points]


def _point_from_chains(
    z0: complex, mult: Optional[int], chains: ChainData, zeta0: Optional[complex] = None
) -> SpectrumPoint:
    return SpectrumPoint(
        z0=complex(z0),
        s=1j * complex(z0),
        det_multiplicity=mult,
        ord=chains.ord,
        quotient_dims=tuple(chains.quotient_dims),
        partial_multiplicities=tuple(chains.partial_multiplicities),
        zeta0=zeta0,
    )


def injective_spectrum(
    N: MellinFamily,
    strip: Tuple[float, float],
    jmax: Optional[int] = None,
    tol_root: Optional[float] = None,
) -> SpectrumReport:
    """Points where N(z) is not injective, with ord(P, z0) and chain dimensions."""
    points = []
    for z, mult in family_roots(N, strip, tol_root):
        points.append(_point_from_chains(z, mult, singular_chains(N, z, jmax)))
    return SpectrumReport(tuple(points), tuple(strip), "injective")


def surjective_spectrum(
    N: MellinFamily,
    w: float,
    strip: Tuple[float, float],
    jmax: Optional[int] = None,
    tol_root: Optional[float] = None,
) -> SpectrumReport:
    """
    Points z with ord(P*, conj(z) + i w) >= 1, for Im z inside the strip.

    The adjoint family is searched in Im zeta in (w - ImMax, w - ImMin).
    """
    M = adjoint_family(N, w)
    lo, hi = strip
    points = []
    for zeta, mult in family_roots(M, (w - hi, w - lo), tol_root):
        z = np.conj(zeta) + 1j * w
        if not _inside(z.imag, lo, hi):
            continue
        points.append(_point_from_chains(z, mult, singular_chains(M, zeta, jmax), zeta0=complex(zeta)))
    points.sort(key=lambda p: (p.s.real, p.s.imag))
    return SpectrumReport(tuple(points), tuple(strip), "surjective")


class OrdFunction:
    """s -> ord(P*, conj(-i s) + i w), computed from chains of the adjoint family and cached."""

    def __init__(self, adjoint: MellinFamily, w: float, jmax: Optional[int] = None, tol_rank: Optional[float] = None):
        self.adjoint = adjoint
        self.weight = float(w)
        self.jmax = jmax
        self.tol_rank = tol_rank
        self._cache: List[Tuple[complex, ChainData]] = []

    def point(self, s: complex) -> complex:
        return complex(np.conj(-1j * complex(s)) + 1j * self.weight)

    def chains(self, s: complex) -> ChainData:
        for t, data in self._cache:
            if same_exponent(t, s):
                return data
        data = singular_chains(self.adjoint, self.point(s), self.jmax, self.tol_rank)
        self._cache.append((complex(s), data))
        return data

    def __call__(self, s: complex) -> int:
        return self.chains(s).require_ord()


def ord_function(
    N: MellinFamily, w: float, jmax: Optional[int] = None, tol_rank: Optional[float] = None
) -> OrdFunction:
    """Ord function for the surjective spectrum of the operator with normal family N and weight w."""
    return OrdFunction(adjoint_family(N, w), w, jmax, tol_rank)
