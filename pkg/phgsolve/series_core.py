"""
Series Core Module - index sets and polyhomogeneous expansions

用途:
- IndexSet: (exponent, log power) pairs closed under s -> s+1 and k -> k-1 below a horizon
- PhgExpansion: canonically ordered terms rho^s (log rho)^k c plus a remainder order
- Predicted index sets of formal solutions (forcing / Schwartz variants) and the extended union

Exponents follow the rho^s convention; the Mellin point of an exponent s is z0 = -i s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch, InvalidIndexEntry, TermBeyondRemainder
from .settings import get_settings

FORCING = "forcing"
SCHWARTZ = "schwartz"

OrdFn = Callable[[complex], int]


def _exponent_tol(tol: Optional[float]) -> float:
    return get_settings().tolerances.exponent if tol is None else tol


def same_exponent(s: complex, t: complex, tol: Optional[float] = None) -> bool:
    """Exponents are identified when |s - t| <= tol * max(1, |s|)."""
    return abs(complex(s) - complex(t)) <= _exponent_tol(tol) * max(1.0, abs(s))


def exponent_key(s: complex) -> Tuple[float, float]:
    s = complex(s)
    return (s.real, s.imag)


@dataclass(frozen=True)
class IndexEntry:
    s: complex
    k: int

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise InvalidIndexEntry(f"log power must be a nonnegative integer, got {self.k!r}")
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "k", int(self.k))

    @property
    def key(self) -> Tuple[float, float, int]:
        return (self.s.real, self.s.imag, self.k)


class _ExponentTable:
    """Exponent representative -> largest log power, with tolerance matching."""

    def __init__(self, tol: float):
        self.tol = tol
        self.rows: List[List] = []

    def find(self, s: complex) -> Optional[int]:
        for i, (rep, _) in enumerate(self.rows):
            if abs(rep - s) <= self.tol * max(1.0, abs(rep)):
                return i
        return None

    def record(self, s: complex, k: int) -> None:
        i = self.find(s)
        if i is None:
            self.rows.append([complex(s), int(k)])
        elif k > self.rows[i][1]:
            self.rows[i][1] = int(k)

    def max_log(self, s: complex) -> int:
        i = self.find(s)
        return -1 if i is None else self.rows[i][1]

    def sorted_rows(self) -> List[Tuple[complex, int]]:
        return sorted(((s, k) for s, k in self.rows), key=lambda r: exponent_key(r[0]))


def _close(pairs: Iterable[Tuple[complex, int]], horizon: float, tol: float) -> Tuple[IndexEntry, ...]:
    seed = _ExponentTable(tol)
    for s, k in pairs:
        seed.record(s, k)
    closed = _ExponentTable(tol)
    for s, k in seed.sorted_rows():
        m = 0
        while s.real + m < horizon:
            closed.record(s + m, k)
            m += 1
    entries = [IndexEntry(s, j) for s, kmax in closed.sorted_rows() for j in range(kmax + 1)]
    return tuple(sorted(entries, key=lambda e: e.key))


@dataclass(frozen=True)
class IndexSet:
    """Closed, horizon-truncated index set. Build through validate_index_set."""

    entries: Tuple[IndexEntry, ...]
    horizon: float

    def __iter__(self) -> Iterator[IndexEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def _table(self, tol: Optional[float] = None) -> _ExponentTable:
        table = _ExponentTable(_exponent_tol(tol))
        for e in self.entries:
            table.record(e.s, e.k)
        return table

    def max_logs(self) -> List[Tuple[complex, int]]:
        """(exponent, largest log power) per exponent, canonical order."""
        return self._table().sorted_rows()

    def max_log(self, s: complex) -> int:
        """Largest log power at s, -1 when s is absent."""
        return self._table().max_log(s)

    def exponents(self) -> List[complex]:
        return [s for s, _ in self.max_logs()]

    def contains(self, s: complex, k: int) -> bool:
        return 0 <= k <= self.max_log(s)

    def issubset(self, other: "IndexSet") -> bool:
        """Containment below the smaller horizon."""
        bound = min(self.horizon, other.horizon)
        table = other._table()
        return all(table.max_log(e.s) >= e.k for e in self.entries if e.s.real < bound)

    def union(self, other: "IndexSet") -> "IndexSet":
        horizon = min(self.horizon, other.horizon)
        pairs = [(e.s, e.k) for e in self.entries] + [(e.s, e.k) for e in other.entries]
        return validate_index_set([IndexEntry(s, k) for s, k in pairs], horizon)

    def shift(self, alpha: float) -> "IndexSet":
        """rho^alpha times the index set."""
        return IndexSet(tuple(IndexEntry(e.s + alpha, e.k) for e in self.entries), self.horizon + alpha)

    def truncate(self, horizon: float) -> "IndexSet":
        horizon = min(horizon, self.horizon)
        return IndexSet(tuple(e for e in self.entries if e.s.real < horizon), horizon)

    def is_empty(self) -> bool:
        return not self.entries


def validate_index_set(entries: Iterable[IndexEntry], horizon: float, tol: Optional[float] = None) -> IndexSet:
    """
    Smallest closed index set containing the entries, truncated at the horizon.

    Args:
        entries: IndexEntry items or (s, k) pairs
        horizon: finite real; entries with Re s >= horizon are dropped

    Returns:
        deduplicated, canonically sorted IndexSet
    """
    if horizon is None or not math.isfinite(horizon):
        raise InvalidIndexEntry(f"horizon must be finite, got {horizon!r}")
    pairs = []
    for e in entries:
        if not isinstance(e, IndexEntry):
            e = IndexEntry(*e)
        pairs.append((e.s, e.k))
    return IndexSet(_close(pairs, float(horizon), _exponent_tol(tol)), float(horizon))


def default_horizon(exponents: Iterable[complex], base: float = 0.0) -> float:
    """Lowest real part plus the configured horizon span."""
    reals = [complex(s).real for s in exponents]
    start = min(reals) if reals else base
    return start + get_settings().series.horizon_span


def extended_union(E: IndexSet, F: IndexSet) -> IndexSet:
    """E u F u {(s, k + l + 1) : (s, k) in E, (s, l) in F}."""
    horizon = min(E.horizon, F.horizon)
    f_table = F._table()
    pairs = [(e.s, e.k) for e in E.entries] + [(e.s, e.k) for e in F.entries]
    for s, k in E.max_logs():
        l = f_table.max_log(s)
        if l >= 0:
            pairs.append((s, k + l + 1))
    return validate_index_set([IndexEntry(s, k) for s, k in pairs if s.real < horizon], horizon)


def predicted_index_set(
    F: Union[IndexSet, Iterable[IndexEntry]],
    ord_fn: OrdFn,
    variant: str = FORCING,
    horizon: Optional[float] = None,
) -> IndexSet:
    """
    Index set of a formal solution.

    forcing:  (s + j, k + l) with l <= sum_{q=0}^{j} ord(s + q) for (s, k) in F
    schwartz: the same with the sum starting at q = 1

    Args:
        F: forcing index set, or spectrum entries for the Schwartz variant
        ord_fn: s -> ord(P*, conj(-i s) + i w)
        variant: "forcing" or "schwartz"
        horizon: truncation; defaults to the horizon of F
    """
    if variant not in (FORCING, SCHWARTZ):
        raise ValueError(f"unknown variant: {variant}")
    if horizon is None:
        if not isinstance(F, IndexSet):
            raise ValueError("horizon required when F is not an IndexSet")
        horizon = F.horizon
    base = F if isinstance(F, IndexSet) else validate_index_set(F, horizon)
    base = base.truncate(horizon) if base.horizon > horizon else validate_index_set(base.entries, horizon)

    tol = _exponent_tol(None)
    cache = _ExponentTable(tol)
    cached: Dict[int, int] = {}

    def order_at(s: complex) -> int:
        i = cache.find(s)
        if i is None:
            cache.record(s, 0)
            i = len(cache.rows) - 1
            cached[i] = int(ord_fn(s))
        return cached[i]

    start = 0 if variant == FORCING else 1
    pairs: List[Tuple[complex, int]] = []
    for s, k in base.max_logs():
        total = 0
        j = 0
        while s.real + j < horizon:
            if j >= start:
                total += order_at(s + j)
            pairs.append((s + j, k + total))
            j += 1
    return validate_index_set([IndexEntry(s, k) for s, k in pairs], horizon)


# ==================== Expansions ====================


@dataclass(frozen=True, eq=False)
class PhgTerm:
    s: complex
    k: int
    coeff: np.ndarray

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise InvalidIndexEntry(f"log power must be a nonnegative integer, got {self.k!r}")
        coeff = np.array(self.coeff, dtype=complex).reshape(-1)
        coeff.setflags(write=False)
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "coeff", coeff)

    @property
    def key(self) -> Tuple[float, float, int]:
        return (self.s.real, self.s.imag, self.k)

    @property
    def magnitude(self) -> float:
        return float(np.max(np.abs(self.coeff))) if self.coeff.size else 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhgTerm):
            return NotImplemented
        return self.s == other.s and self.k == other.k and np.array_equal(self.coeff, other.coeff)

    __hash__ = None  # type: ignore[assignment]


def _merge_terms(
    terms: Iterable[PhgTerm],
    dim: int,
    remainder: float,
    strict: bool,
    zero_tol: Optional[float] = None,
) -> Tuple[PhgTerm, ...]:
    settings = get_settings()
    tol = settings.tolerances.exponent
    zero_tol = settings.tolerances.zero if zero_tol is None else zero_tol
    reps: List[complex] = []
    sums: Dict[Tuple[int, int], np.ndarray] = {}
    for t in terms:
        if t.coeff.shape != (dim,):
            raise DimensionMismatch(f"term at s={t.s} has {t.coeff.shape[0]} components, expected {dim}")
        if t.s.real >= remainder:
            if strict:
                raise TermBeyondRemainder(f"term at Re s={t.s.real:g} is not below remainder order {remainder:g}")
            continue
        idx = next((i for i, r in enumerate(reps) if abs(r - t.s) <= tol * max(1.0, abs(r))), None)
        if idx is None:
            reps.append(t.s)
            idx = len(reps) - 1
        key = (idx, t.k)
        sums[key] = sums[key] + t.coeff if key in sums else np.array(t.coeff)
    out = [
        PhgTerm(reps[i], k, c)
        for (i, k), c in sums.items()
        if c.size and np.max(np.abs(c)) > zero_tol
    ]
    return tuple(sorted(out, key=lambda t: t.key))


@dataclass(frozen=True, eq=False)
class PhgExpansion:
    """
    Sum of rho^s (log rho)^k coeff with an O(rho^{C - eps}) remainder, C = remainder_order.

    Terms are canonical: sorted by (Re s, Im s, k), keys distinct, no zero coefficients.
    """

    terms: Tuple[PhgTerm, ...]
    remainder_order: float
    dim: int

    @classmethod
    def empty(cls, dim: int, remainder_order: float) -> "PhgExpansion":
        return cls((), float(remainder_order), int(dim))

    @classmethod
    def from_terms(
        cls,
        terms: Iterable[PhgTerm],
        dim: int,
        remainder_order: float,
        strict: bool = True,
    ) -> "PhgExpansion":
        """Merge terms at equal keys; strict rejects terms at or beyond the remainder."""
        remainder_order = float(remainder_order)
        return cls(_merge_terms(terms, int(dim), remainder_order, strict), remainder_order, int(dim))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhgExpansion):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.remainder_order == other.remainder_order
            and len(self.terms) == len(other.terms)
            and all(a == b for a, b in zip(self.terms, other.terms))
        )

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PhgTerm]:
        return iter(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # ---------- arithmetic ----------

    def add_term(self, t: PhgTerm) -> "PhgExpansion":
        return add_term(self, t)

    def add(self, other: "PhgExpansion") -> "PhgExpansion":
        remainder = min(self.remainder_order, other.remainder_order)
        return PhgExpansion.from_terms(self.terms + other.terms, self._same_dim(other), remainder, strict=False)

    def scale(self, c: complex) -> "PhgExpansion":
        return PhgExpansion.from_terms(
            (PhgTerm(t.s, t.k, c * t.coeff) for t in self.terms), self.dim, self.remainder_order
        )

    def subtract(self, other: "PhgExpansion") -> "PhgExpansion":
        return self.add(other.scale(-1.0))

    __add__ = add
    __sub__ = subtract

    def __neg__(self) -> "PhgExpansion":
        return self.scale(-1.0)

    def _same_dim(self, other: "PhgExpansion") -> int:
        if self.dim != other.dim:
            raise DimensionMismatch(f"expansions over {self.dim} and {other.dim} components")
        return self.dim

    def shift(self, alpha: complex) -> "PhgExpansion":
        """rho^alpha times the expansion."""
        terms = tuple(PhgTerm(t.s + alpha, t.k, t.coeff) for t in self.terms)
        return PhgExpansion(terms, self.remainder_order + float(np.real(alpha)), self.dim)

    def truncate(self, order: float) -> "PhgExpansion":
        order = min(float(order), self.remainder_order)
        return PhgExpansion(tuple(t for t in self.terms if t.s.real < order), order, self.dim)

    def with_remainder(self, order: float) -> "PhgExpansion":
        """Lower the remainder (dropping terms) or raise it (the missing terms are zero)."""
        order = float(order)
        if order <= self.remainder_order:
            return self.truncate(order)
        return PhgExpansion(self.terms, order, self.dim)

    def restrict(self, components: Sequence[int]) -> "PhgExpansion":
        idx = list(components)
        return PhgExpansion.from_terms(
            (PhgTerm(t.s, t.k, t.coeff[idx]) for t in self.terms), len(idx), self.remainder_order
        )

    # ---------- queries ----------

    def exponent_groups(self) -> List[Tuple[complex, List[PhgTerm]]]:
        """Terms grouped by exponent (tolerance-identified), lowest first."""
        groups: List[Tuple[complex, List[PhgTerm]]] = []
        for t in self.terms:
            for s, members in groups:
                if same_exponent(s, t.s):
                    members.append(t)
                    break
            else:
                groups.append((t.s, [t]))
        return sorted(groups, key=lambda g: exponent_key(g[0]))

    def without_exponent(self, s: complex) -> "PhgExpansion":
        return PhgExpansion(tuple(t for t in self.terms if not same_exponent(s, t.s)), self.remainder_order, self.dim)

    def leading_exponent(self) -> Optional[complex]:
        return self.terms[0].s if self.terms else None

    def term(self, s: complex, k: int) -> Optional[PhgTerm]:
        return next((t for t in self.terms if t.k == k and same_exponent(s, t.s)), None)

    def coefficient(self, s: complex, k: int) -> np.ndarray:
        t = self.term(s, k)
        return np.zeros(self.dim, dtype=complex) if t is None else np.array(t.coeff)

    def max_magnitude(self, below: Optional[float] = None) -> float:
        mags = [t.magnitude for t in self.terms if below is None or t.s.real < below]
        return max(mags) if mags else 0.0

    def index_set(self, horizon: Optional[float] = None) -> IndexSet:
        if horizon is None:
            horizon = (
                self.remainder_order
                if math.isfinite(self.remainder_order)
                else default_horizon([t.s for t in self.terms])
            )
        return validate_index_set([IndexEntry(t.s, t.k) for t in self.terms], horizon)

    def evaluate(self, rho: Union[float, np.ndarray]) -> np.ndarray:
        """Term sum at rho > 0; shape (len(rho), dim)."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        log_rho = np.log(rho)
        out = np.zeros((rho.size, self.dim), dtype=complex)
        for t in self.terms:
            profile = np.exp(t.s * log_rho) * log_rho ** t.k
            out += profile[:, None] * t.coeff[None, :]
        return out


def add_term(e: PhgExpansion, t: PhgTerm) -> PhgExpansion:
    """Coefficient-wise merge at key (s, k); a cancelled term disappears."""
    if t.s.real >= e.remainder_order:
        raise TermBeyondRemainder(
            f"term at Re s={t.s.real:g} is not below remainder order {e.remainder_order:g}"
        )
    return PhgExpansion.from_terms(e.terms + (t,), e.dim, e.remainder_order)
