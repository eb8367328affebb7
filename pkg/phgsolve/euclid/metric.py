"""
Metric Module - radially perturbed Euclidean metrics and mode descriptors

g = A(rho) dr^2 + B(rho) r^2 g_sphere with A = 1 + rho a(rho), B = 1 + rho b(rho), rho = 1/r.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..errors import InadmissibleMode
from ..settings import get_settings

OperatorId = Literal["exterior_d", "div_1form", "div_2tensor", "laplacian_scalar"]
HarmonicType = Literal["scalar", "vector", "tensor"]

OPERATORS = ("exterior_d", "div_1form", "div_2tensor", "laplacian_scalar")
TYPES = ("scalar", "vector", "tensor")


class MetricSpec(BaseModel):
    n: int = Field(3, ge=2)
    a: List[float] = []  # radial perturbation, Taylor coefficients in rho
    b: List[float] = []  # tangential perturbation
    coupling: float = 0.0  # non-radial rho^1 coupling of l=1 modes (div_2tensor only)

    @property
    def euclidean(self) -> bool:
        return not any(self.a) and not any(self.b) and self.coupling == 0.0

    @property
    def symmetric_to_subleading(self) -> bool:
        """Radial perturbations are spherically symmetric; only the coupling breaks symmetry."""
        return self.coupling == 0.0

    @property
    def weight(self) -> float:
        return -float(self.n)

    def A(self, rho: np.ndarray) -> np.ndarray:
        return 1.0 + rho * np.polynomial.polynomial.polyval(rho, self.a or [0.0])

    def B(self, rho: np.ndarray) -> np.ndarray:
        return 1.0 + rho * np.polynomial.polynomial.polyval(rho, self.b or [0.0])


class ModeSpec(BaseModel):
    operator: OperatorId
    ell: int = Field(ge=0)
    type: HarmonicType = "scalar"
    n: int = Field(3, ge=2)


def check_admissible(mode: ModeSpec) -> None:
    """
    Harmonic families that exist on S^{n-1}.

    vector type: l >= 1, n >= 3; tensor type (trace-free divergence-free): l >= 2, n >= 4.
    exterior_d and laplacian_scalar act on functions, scalar type only.
    """
    if mode.operator in ("exterior_d", "laplacian_scalar") and mode.type != "scalar":
        raise InadmissibleMode(f"{mode.operator} acts on functions; no {mode.type}-type modes")
    if mode.type == "vector" and (mode.ell < 1 or mode.n < 3):
        raise InadmissibleMode(f"vector-type harmonics need l >= 1 and n >= 3 (got l={mode.ell}, n={mode.n})")
    if mode.type == "tensor":
        if mode.operator != "div_2tensor":
            raise InadmissibleMode(f"{mode.operator} has no tensor-type modes")
        if mode.ell < 2 or mode.n < 4:
            raise InadmissibleMode(f"tensor-type harmonics need l >= 2 and n >= 4 (got l={mode.ell}, n={mode.n})")


# ==================== power series in rho ====================


def series_mul(a: np.ndarray, b: np.ndarray, depth: int) -> np.ndarray:
    return np.convolve(a, b)[: depth + 1]


def series_power(c: np.ndarray, p: float, depth: int) -> np.ndarray:
    """c^p for c_0 = 1 (J.C.P. Miller recurrence)."""
    c = np.pad(np.asarray(c, dtype=float), (0, max(0, depth + 1 - len(c))))[: depth + 1]
    w = np.zeros(depth + 1)
    w[0] = c[0] ** p
    for k in range(1, depth + 1):
        j = np.arange(1, k + 1)
        w[k] = np.sum(((p + 1) * j - k) * c[j] * w[k - j]) / (k * c[0])
    return w


def series_rho_d(c: np.ndarray) -> np.ndarray:
    """rho d/drho termwise."""
    return np.arange(len(c)) * np.asarray(c)


@dataclass(frozen=True)
class MetricSeries:
    """
    Coefficient series of the mode operators.

    Fi = A^{-1/2}; Bi = B^{-1/2}; Hs = A^{-1/2} (1 - (rho B') / (2 B)); c = A^{1/2} B^{(n-1)/2}
    (metric density relative to r^{n-1} dr d(omega)).
    """

    Fi: np.ndarray
    Bi: np.ndarray
    Hs: np.ndarray
    c: np.ndarray
    cinv: np.ndarray
    depth: int


def metric_series(metric: MetricSpec, depth: Optional[int] = None) -> MetricSeries:
    depth = get_settings().series.taylor_depth if depth is None else depth
    A = np.zeros(depth + 1)
    B = np.zeros(depth + 1)
    A[0] = B[0] = 1.0
    for t, v in enumerate(metric.a[:depth]):
        A[t + 1] = v
    for t, v in enumerate(metric.b[:depth]):
        B[t + 1] = v
    Fi = series_power(A, -0.5, depth)
    Bi = series_power(B, -0.5, depth)
    half_log_b = series_mul(series_rho_d(B), series_power(B, -1.0, depth), depth) / 2.0
    unit = np.zeros(depth + 1)
    unit[0] = 1.0
    Hs = series_mul(Fi, unit - half_log_b, depth)
    m = metric.n - 1
    c = series_mul(series_power(A, 0.5, depth), series_power(B, m / 2.0, depth), depth)
    cinv = series_mul(Fi, series_power(B, -m / 2.0, depth), depth)
    return MetricSeries(Fi, Bi, Hs, c, cinv, depth)
