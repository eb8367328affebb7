"""
Errors Module - exception hierarchy

Every failure the library can signal derives from PhgSolveError so that the
CLI can map it to an exit status in one place.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np


class PhgSolveError(Exception):
    """Base class for all library errors."""


class InputError(PhgSolveError):
    """Malformed input file or run configuration."""


class InvalidIndexEntry(PhgSolveError):
    """Index entry with a negative log power or a non-finite horizon."""


class TermBeyondRemainder(PhgSolveError):
    """Term placed at or beyond the remainder order of an expansion."""


class IdenticallySingular(PhgSolveError):
    """det N(z) vanishes identically."""


class OrderNotResolved(PhgSolveError):
    """Singular chains did not stabilize within jmax."""

    def __init__(self, message: str, z0: Optional[complex] = None, jmax: Optional[int] = None):
        super().__init__(message)
        self.z0 = z0
        self.jmax = jmax


class NotInDomain(PhgSolveError):
    """Vector outside the leading-order space it was claimed to belong to."""


class NotSolvable(PhgSolveError):
    """Normal-operator system inconsistent beyond tolerance."""

    def __init__(
        self,
        message: str,
        exponent: Optional[complex] = None,
        obstruction: Optional[Sequence[complex]] = None,
    ):
        super().__init__(message)
        self.exponent = exponent
        self.obstruction = None if obstruction is None else np.asarray(obstruction, dtype=complex)


class TaylorDepthExceeded(PhgSolveError):
    """A Taylor coefficient beyond the operator's depth was needed."""


class DimensionMismatch(PhgSolveError):
    """Operand shapes do not fit together."""


class PredictionViolated(PhgSolveError):
    """A realized expansion term lies outside the predicted index set."""


class NotUnderdetermined(PhgSolveError):
    """Kernel construction requested at a point where chains stabilize."""


class InadmissibleMode(PhgSolveError):
    """Harmonic degree / type combination that does not exist."""


class GridTooCoarse(PhgSolveError):
    """Finite-difference self-convergence estimate above tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate
