"""
Harmonics Module - normalization table for the mode decomposition

Components of each (l, type) block, in the orthonormal frame of g:

    functions       u                       u(r) Y
    1-forms         E1 (scalar)             A^{1/2} Y dr
                    E2 (scalar, l >= 1)     B^{1/2} r dY / sqrt(lam)
                    W1 (vector)             B^{1/2} r X
    2-tensors       T1 (scalar)             A Y dr dr
                    T2 (scalar, l >= 1)     sqrt(2) (AB)^{1/2} r sym(dr, dY) / sqrt(lam)
                    T3 (scalar)             B r^2 Y g_sphere / sqrt(m)
                    T4 (scalar, l >= 2)     B r^2 (Hess Y + (lam/m) Y g_sphere) / N4
                    V1 (vector)             sqrt(2) (AB)^{1/2} r sym(dr, X)
                    V2 (vector, l >= 2)     B r^2 sym(nabla X) / NV
                    TT (tensor)             B r^2 (trace-free divergence-free harmonic)

with Y unit-normalized, X = star-rotated gradient / sqrt(lam), lam = l(l + n - 2), m = n - 1,
N4^2 = (m - 1) lam (lam - m) / m, NV^2 = (l - 1)(l + n - 1) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial import legendre

from ..errors import InadmissibleMode


@dataclass(frozen=True)
class HarmonicConstants:
    ell: int
    n: int
    lam: float
    m: int
    N4: float
    NV: float


def harmonic_constants(ell: int, n: int) -> HarmonicConstants:
    m = n - 1
    lam = float(ell * (ell + n - 2))
    n4_sq = (m - 1) * lam * (lam - m) / m if m > 0 else 0.0
    nv_sq = 0.5 * (ell - 1) * (ell + n - 1)
    return HarmonicConstants(ell, n, lam, m, math.sqrt(max(n4_sq, 0.0)), math.sqrt(max(nv_sq, 0.0)))


def components(kind: str, ell: int, n: int, htype: str) -> Tuple[str, ...]:
    """Frame components of one (l, type) block of functions / 1-forms / 2-tensors."""
    if kind == "function":
        return ("u",) if htype == "scalar" else ()
    if kind == "1form":
        if htype == "scalar":
            return ("E1", "E2") if ell >= 1 else ("E1",)
        if htype == "vector":
            return ("W1",) if ell >= 1 and n >= 3 else ()
        return ()
    if kind == "2tensor":
        if htype == "scalar":
            names = ["T1"]
            if ell >= 1:
                names.append("T2")
            names.append("T3")
            if ell >= 2 and n >= 3:
                names.append("T4")
            return tuple(names)
        if htype == "vector":
            if ell < 1 or n < 3:
                return ()
            return ("V1", "V2") if ell >= 2 else ("V1",)
        return ("TT",) if ell >= 2 and n >= 4 else ()
    raise ValueError(f"unknown field kind: {kind}")


# ==================== Cartesian harmonics on S^2 ====================

E3 = np.array([0.0, 0.0, 1.0])


class ZonalHarmonics:
    """
    Axisymmetric harmonics of degree l on S^2 in Cartesian components (n = 3).

    Y = N P_l(c) with c = omega . e3 and N = sqrt((2l + 1) / (4 pi)).
    """

    def __init__(self, ell: int):
        self.ell = ell
        self.const = harmonic_constants(ell, 3)
        self.norm = math.sqrt((2 * ell + 1) / (4.0 * math.pi))
        coef = np.zeros(ell + 1)
        coef[ell] = 1.0
        self._p = coef
        self._dp = legendre.legder(coef) if ell >= 1 else np.zeros(1)
        self._ddp = legendre.legder(coef, 2) if ell >= 2 else np.zeros(1)

    def _check(self, need: int, what: str) -> None:
        if self.ell < need:
            raise InadmissibleMode(f"{what} needs l >= {need}, got {self.ell}")

    def Y(self, omega: np.ndarray) -> np.ndarray:
        return self.norm * legendre.legval(omega[..., 2], self._p)

    def grad(self, omega: np.ndarray) -> np.ndarray:
        """Sphere gradient of Y: N P'(c) (e3 - c omega)."""
        c = omega[..., 2]
        return (self.norm * legendre.legval(c, self._dp))[..., None] * (E3 - c[..., None] * omega)

    def vector(self, omega: np.ndarray) -> np.ndarray:
        """X = omega x grad Y / sqrt(lam)."""
        self._check(1, "vector harmonic")
        c = omega[..., 2]
        kappa = np.cross(omega, E3)
        return (self.norm * legendre.legval(c, self._dp) / math.sqrt(self.const.lam))[..., None] * kappa

    def hessian(self, omega: np.ndarray) -> np.ndarray:
        """Sphere Hessian N [P''(c) t t - c P'(c) (I - omega omega)], t = e3 - c omega."""
        c = omega[..., 2]
        t = E3 - c[..., None] * omega
        tangential = np.eye(3) - omega[..., :, None] * omega[..., None, :]
        second = legendre.legval(c, self._ddp)[..., None, None] * t[..., :, None] * t[..., None, :]
        first = (c * legendre.legval(c, self._dp))[..., None, None] * tangential
        return self.norm * (second - first)

    def vector_strain(self, omega: np.ndarray) -> np.ndarray:
        """sym(nabla X) = N P''(c) sym(t, kappa) / sqrt(lam); kappa = omega x e3 is Killing."""
        self._check(2, "vector strain")
        c = omega[..., 2]
        t = E3 - c[..., None] * omega
        kappa = np.cross(omega, E3)
        outer = t[..., :, None] * kappa[..., None, :]
        sym = 0.5 * (outer + np.swapaxes(outer, -1, -2))
        scale = self.norm * legendre.legval(c, self._ddp) / math.sqrt(self.const.lam)
        return scale[..., None, None] * sym
