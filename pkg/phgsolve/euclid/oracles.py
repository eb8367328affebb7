"""
Oracles Module - numerical cross-checks of the mode reduction

用途:
- radial_divergence_oracle: quadrature solution of the radial mode of delta(f dr) = u and a
  log-log slope fit of its decay
- cartesian_apply_oracle: the geometric operator in Cartesian components (n = 3) by centered
  differences on a separated field, projected back onto the mode and compared with the
  mode-reduced b-operator
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, interpolate, special

from ..b_operator import apply_to_expansion
from ..errors import GridTooCoarse, InputError
from ..logs import get_logger
from ..series_core import PhgExpansion, PhgTerm
from ..settings import get_settings
from .harmonics import ZonalHarmonics, harmonic_constants
from .metric import MetricSpec, ModeSpec
from .modes import ModeBlock, mode_block

logger = get_logger("Oracle")

Profile = Callable[[np.ndarray], np.ndarray]


# ==================== radial oracle ====================


@dataclass(frozen=True, eq=False)
class RadialOracleResult:
    grid: np.ndarray  # sample radii
    profile: np.ndarray  # f(r) on grid
    fit_r: np.ndarray  # radii of the slope fit, [10R, 1000R]
    fit_f: np.ndarray
    fitted_exponent: float  # slope of log|f|; -inf for f == 0 beyond the support
    moment: float  # int_0^R u t^{n-1} dt
    integral: float  # int u dx over R^n
    rapid_decay: bool


def sphere_area(n: int) -> float:
    """|S^{n-1}|."""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def sampled_profile(r: Sequence[float], values: Sequence[float]) -> Profile:
    """Linear interpolation of samples, zero outside the sampled range."""
    return interpolate.interp1d(
        np.asarray(r, dtype=float), np.asarray(values, dtype=float), bounds_error=False, fill_value=0.0
    )


def bump(center: float, width: float, height: float = 1.0) -> Profile:
    """Smooth bump supported in |r - center| < width."""

    def u(r: np.ndarray) -> np.ndarray:
        x = (np.asarray(r, dtype=float) - center) / width
        out = np.zeros_like(x)
        inside = np.abs(x) < 1.0
        out[inside] = height * np.exp(-1.0 / (1.0 - x[inside] ** 2))
        return out

    return u


def radial_divergence_oracle(
    n: int,
    u: Profile,
    support: float,
    grid: Optional[Sequence[float]] = None,
) -> RadialOracleResult:
    """
    Radial 1-form f(r) dr with delta(f dr) = u, f(r) = -r^{1-n} int_0^r u(t) t^{n-1} dt.

    Args:
        u: radial profile supported in r <= support
        grid: radii where f is sampled; defaults to the fit window
    """
    if n < 2:
        raise InputError(f"dimension must be at least 2, got {n}")
    if support <= 0:
        raise InputError(f"support radius must be positive, got {support}")
    cfg = get_settings().oracle

    def density(t: float) -> float:
        return float(np.asarray(u(np.array([t])))[0]) * t ** (n - 1)

    def partial_moment(r: float) -> float:
        if r <= 0:
            return 0.0
        if r <= support:
            return integrate.quad(density, 0.0, r, limit=200)[0]
        return integrate.quad(density, 0.0, r, points=[support], limit=200)[0]

    mass = integrate.quad(lambda t: abs(density(t)), 0.0, support, limit=200)[0]
    floor = cfg.moment * max(mass, 1.0)

    def sample(t: float) -> float:
        m = partial_moment(t)
        return 0.0 if abs(m) <= floor else -m * t ** (1.0 - n)

    moment = partial_moment(support)
    if abs(moment) <= floor:
        moment = 0.0

    fit_r = np.logspace(
        math.log10(cfg.fit_inner * support), math.log10(cfg.fit_outer * support), cfg.fit_points
    )
    fit_f = np.array([sample(t) for t in fit_r])
    live = fit_f != 0.0
    if np.count_nonzero(live) < 2:
        slope = -math.inf
    else:
        slope = float(np.polyfit(np.log(fit_r[live]), np.log(np.abs(fit_f[live])), 1)[0])

    r = fit_r if grid is None else np.asarray(grid, dtype=float)
    profile = np.array([sample(t) for t in r])
    rapid = slope < cfg.rapid_decay_slope
    logger.info(f"n={n} R={support:g}: moment={moment:.6g} slope={slope:.4g}{' (rapid decay)' if rapid else ''}")
    return RadialOracleResult(
        grid=r,
        profile=profile,
        fit_r=fit_r,
        fit_f=fit_f,
        fitted_exponent=slope,
        moment=moment,
        integral=moment * sphere_area(n),
        rapid_decay=rapid,
    )


# ==================== Cartesian oracle ====================


@dataclass(frozen=True, eq=False)
class CartesianOracleResult:
    grid: np.ndarray
    rows: Tuple[str, ...]
    cartesian: np.ndarray  # (len(grid), rows), finest step
    mode: np.ndarray  # mode-reduced operator applied to the profile
    rel_error: float
    order: float  # observed convergence order; inf when the differences are at roundoff
    estimate: float  # self-convergence estimate at the finest step, relative


SCALE = {"exterior_d": 1, "div_1form": 1, "div_2tensor": 1, "laplacian_scalar": 2}
OUTPUT_KIND = {"exterior_d": "1form", "laplacian_scalar": "function", "div_1form": "function", "div_2tensor": "1form"}


def power_profile(block: ModeBlock, s: complex, weights: Optional[Dict[str, complex]] = None) -> PhgExpansion:
    """rho^s times a constant vector over the block columns; unit weights by default."""
    coeff = np.array([1.0 if weights is None else weights.get(name, 0.0) for name in block.cols], dtype=complex)
    return PhgExpansion.from_terms([PhgTerm(s, 0, coeff)], len(block.cols), math.inf)


def sphere_quadrature(n_theta: int, n_phi: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in cos(theta) times the uniform rule in phi; exact for zonal products."""
    c, wc = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1.0 - c ** 2)
    omega = np.stack(
        [
            (sin_t[:, None] * np.cos(phi)[None, :]).ravel(),
            (sin_t[:, None] * np.sin(phi)[None, :]).ravel(),
            np.repeat(c, n_phi),
        ],
        axis=-1,
    )
    weights = np.repeat(wc, n_phi) * (2.0 * math.pi / n_phi)
    return omega, weights


class _Geometry:
    """g = A dr^2 + B r^2 g_sphere in Cartesian components, n = 3."""

    def __init__(self, metric: MetricSpec):
        self.metric = metric

    def parts(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        r = np.linalg.norm(x, axis=-1)
        omega = x / r[..., None]
        rho = 1.0 / r
        return r, omega, self.metric.A(rho), self.metric.B(rho)

    def tensors(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        _, omega, A, B = self.parts(x)
        radial = omega[..., :, None] * omega[..., None, :]
        tangential = np.eye(3) - radial
        g = A[..., None, None] * radial + B[..., None, None] * tangential
        ginv = radial / A[..., None, None] + tangential / B[..., None, None]
        return g, ginv, np.sqrt(A) * B

    def g(self, x: np.ndarray) -> np.ndarray:
        return self.tensors(x)[0]


class _SeparatedField:
    """Sum over block components of profile(r) times the frame element of the (l, type) mode."""

    def __init__(self, geometry: _Geometry, ell: int, profiles: Dict[str, Profile]):
        self.geometry = geometry
        self.harmonics = ZonalHarmonics(ell)
        self.const = harmonic_constants(ell, 3)
        self.profiles = profiles

    def frame(self, name: str, x: np.ndarray) -> np.ndarray:
        r, omega, A, B = self.geometry.parts(x)
        Z, k = self.harmonics, self.const
        if name == "u":
            return Z.Y(omega)
        radial = omega[..., :, None] * omega[..., None, :]
        tangential = np.eye(3) - radial
        if name == "E1":
            return (np.sqrt(A) * Z.Y(omega))[..., None] * omega
        if name == "E2":
            return (np.sqrt(B) / math.sqrt(k.lam))[..., None] * Z.grad(omega)
        if name == "W1":
            return np.sqrt(B)[..., None] * Z.vector(omega)
        if name == "T1":
            return (A * Z.Y(omega))[..., None, None] * radial
        if name == "T2":
            return (np.sqrt(2.0 * A * B) / math.sqrt(k.lam))[..., None, None] * _sym(omega, Z.grad(omega))
        if name == "T3":
            return (B * Z.Y(omega) / math.sqrt(k.m))[..., None, None] * tangential
        if name == "T4":
            trace_part = (k.lam / k.m) * Z.Y(omega)[..., None, None] * tangential
            return (B / k.N4)[..., None, None] * (Z.hessian(omega) + trace_part)
        if name == "V1":
            return np.sqrt(2.0 * A * B)[..., None, None] * _sym(omega, Z.vector(omega))
        if name == "V2":
            return (B / k.NV)[..., None, None] * Z.vector_strain(omega)
        raise InputError(f"no Cartesian frame for component {name}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(x, axis=-1)
        total = None
        for name, profile in self.profiles.items():
            frame = self.frame(name, x)
            term = frame * _broadcast(profile(r), frame.ndim - r.ndim)
            total = term if total is None else total + term
        return total


def _sym(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    outer = a[..., :, None] * b[..., None, :]
    return 0.5 * (outer + np.swapaxes(outer, -1, -2))


def _broadcast(values: np.ndarray, extra: int) -> np.ndarray:
    return np.asarray(values).reshape(np.shape(values) + (1,) * extra)


def _partial(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float, i: int) -> np.ndarray:
    e = np.zeros(3)
    e[i] = h
    return (F(x + e) - F(x - e)) / (2.0 * h)


def _gradient(F: Callable[[np.ndarray], np.ndarray], h: float) -> Callable[[np.ndarray], np.ndarray]:
    """Differential of a function, components on the trailing axis."""

    def dF(x: np.ndarray) -> np.ndarray:
        return np.stack([_partial(F, x, h, i) for i in range(3)], axis=-1)

    return dF


def _codifferential(geometry: _Geometry, form: Callable[[np.ndarray], np.ndarray], h: float, x: np.ndarray) -> np.ndarray:
    """delta w = -(1 / sqrt g) d_i (sqrt g g^{ij} w_j)."""

    def flux(y: np.ndarray) -> np.ndarray:
        _, ginv, vol = geometry.tensors(y)
        return vol[..., None] * np.einsum("...ij,...j->...i", ginv, form(y))

    total = sum(_partial(lambda y, i=i: flux(y)[..., i], x, h, i) for i in range(3))
    return -total / geometry.tensors(x)[2]


def _tensor_divergence(geometry: _Geometry, tensor: Callable[[np.ndarray], np.ndarray], h: float, x: np.ndarray) -> np.ndarray:
    """(delta k)_j = -g^{ik} nabla_k k_ij with Christoffel symbols from differenced g."""
    _, ginv, _ = geometry.tensors(x)
    K = tensor(x)
    dK = np.stack([_partial(tensor, x, h, k) for k in range(3)], axis=-3)  # [..., k, i, j]
    dg = np.stack([_partial(geometry.g, x, h, k) for k in range(3)], axis=-3)
    lowered = 0.5 * (dg + np.swapaxes(dg, -3, -1) - np.swapaxes(dg, -3, -2))  # [..., k, m, i] = Gamma_{m k i}
    gamma = np.einsum("...lm,...kmi->...lki", ginv, lowered)
    nabla = (
        dK
        - np.einsum("...lki,...lj->...kij", gamma, K)
        - np.einsum("...lkj,...il->...kij", gamma, K)
    )
    return -np.einsum("...ik,...kij->...j", ginv, nabla)


def _apply_geometric(operator: str, geometry: _Geometry, field: _SeparatedField, h: float, x: np.ndarray) -> np.ndarray:
    if operator == "exterior_d":
        return _gradient(field, h)(x)
    if operator == "div_1form":
        return _codifferential(geometry, field, h, x)
    if operator == "laplacian_scalar":
        return _codifferential(geometry, _gradient(field, h), h, x)
    return _tensor_divergence(geometry, field, h, x)


def _inner(kind: str, a: np.ndarray, b: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    if kind == "function":
        return a * b
    return np.einsum("...i,...ij,...j->...", a, ginv, b)


def _project(
    operator: str,
    block: ModeBlock,
    field: _SeparatedField,
    geometry: _Geometry,
    values: np.ndarray,
    x: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """Mode coefficients of a sampled field: <F, frame> / <frame, frame> over the sphere."""
    kind = OUTPUT_KIND[operator]
    _, ginv, _ = geometry.tensors(x)
    out = np.zeros((x.shape[0], len(block.rows)), dtype=complex)
    for idx, name in enumerate(block.rows):
        frame = field.frame(name, x)
        num = np.sum(weights * _inner(kind, values, frame, ginv), axis=-1)
        den = np.sum(weights * _inner(kind, frame, frame, ginv), axis=-1)
        out[:, idx] = num / den
    return out


def cartesian_apply_oracle(
    metric: MetricSpec,
    mode: ModeSpec,
    profile: PhgExpansion,
    grid: Sequence[float],
    step: Optional[float] = None,
) -> CartesianOracleResult:
    """
    Apply the geometric operator to profile x harmonic in Cartesian components and project back.

    The Cartesian output is multiplied by r (r^2 for the Laplacian) to match the b-operator. The
    step is halved twice; the finest result is returned.

    Raises:
        GridTooCoarse: the difference between the two finest steps exceeds the agreement tolerance
    """
    if metric.n != 3:
        raise InputError(f"the Cartesian oracle is implemented for n = 3, got n = {metric.n}")
    cfg = get_settings().oracle
    h = cfg.fd_step if step is None else float(step)
    block = mode_block(metric, mode)
    if profile.dim != len(block.cols):
        raise InputError(f"profile has {profile.dim} components, the mode block has {len(block.cols)} columns")
    r = np.asarray(grid, dtype=float)
    if np.any(r <= 4 * h):
        raise InputError("grid radii must stay clear of the origin by several steps")

    mode_out = apply_to_expansion(block.operator, profile).evaluate(1.0 / r)
    if not block.rows:
        empty = np.zeros((r.size, 0), dtype=complex)
        return CartesianOracleResult(r, (), empty, empty, 0.0, math.inf, 0.0)

    def component(idx: int) -> Profile:
        return lambda radius: profile.evaluate(1.0 / np.ravel(radius))[:, idx].reshape(np.shape(radius))

    geometry = _Geometry(metric)
    field = _SeparatedField(geometry, mode.ell, {name: component(i) for i, name in enumerate(block.cols)})
    omega, weights = sphere_quadrature(cfg.quad_theta, cfg.quad_phi)
    x = r[:, None, None] * omega[None, :, :]
    scale = r[:, None] ** SCALE[mode.operator]

    levels = []
    for step_h in (h, h / 2.0, h / 4.0):
        values = _apply_geometric(mode.operator, geometry, field, step_h, x)
        levels.append(scale * _project(mode.operator, block, field, geometry, values, x, weights))

    size = float(np.max(np.abs(mode_out)))
    if size <= get_settings().tolerances.zero:
        size = 1.0
    coarse = float(np.max(np.abs(levels[0] - levels[1])))
    fine = float(np.max(np.abs(levels[1] - levels[2])))
    roundoff = 1e3 * np.finfo(float).eps * size
    order = math.inf if fine <= roundoff or coarse <= roundoff else math.log2(coarse / fine)
    estimate = fine / size
    rel_error = float(np.max(np.abs(levels[2] - mode_out))) / size
    logger.info(
        f"{mode.operator} l={mode.ell} {mode.type}: rel error {rel_error:.3e}, order {order:.3g}, estimate {estimate:.3e}"
    )
    if estimate > cfg.agreement:
        raise GridTooCoarse(f"self-convergence estimate {estimate:.3e} exceeds {cfg.agreement:g}", estimate)
    return CartesianOracleResult(r, block.rows, levels[2], mode_out, rel_error, order, estimate)
