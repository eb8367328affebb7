import math

import numpy as np
import pytest
from scipy import integrate

from phgsolve.errors import GridTooCoarse, InputError
from phgsolve.euclid import (
    MetricSpec,
    ModeSpec,
    cartesian_apply_oracle,
    mode_block,
    power_profile,
    radial_divergence_oracle,
)
from phgsolve.euclid.metric import OPERATORS
from phgsolve.euclid.modes import admissible_modes
from phgsolve.euclid.oracles import bump, sampled_profile, sphere_area

EUCLID = MetricSpec(n=3)
PERTURBED = MetricSpec(n=3, a=[0.2, -0.1], b=[0.1])
GRID = [3.0, 4.0, 5.0]


def zero_moment_profile():
    """Two bumps whose r^2-moments cancel."""
    inner, outer = bump(0.3, 0.2), bump(0.7, 0.2)
    m_in = integrate.quad(lambda t: inner(np.array([t]))[0] * t * t, 0.0, 1.0)[0]
    m_out = integrate.quad(lambda t: outer(np.array([t]))[0] * t * t, 0.0, 1.0)[0]
    return lambda r: inner(r) - (m_in / m_out) * outer(r)


# ==================== radial oracle ====================


def test_radial_oracle_bump():
    result = radial_divergence_oracle(3, bump(0.5, 0.4), 1.0)
    assert result.moment > 0
    assert result.fitted_exponent == pytest.approx(-2.0, abs=0.05)
    assert result.integral == pytest.approx(result.moment * 4 * math.pi)
    assert not result.rapid_decay
    assert np.all(result.profile < 0)


def test_radial_oracle_zero_moment():
    r = np.array([0.5, 1.5, 2.0, 10.0])
    result = radial_divergence_oracle(3, zero_moment_profile(), 1.0, grid=r)
    assert result.moment == 0.0
    assert result.fitted_exponent == -math.inf
    assert result.rapid_decay
    assert np.all(result.profile[1:] == 0)
    assert result.profile[0] != 0


def test_radial_oracle_fits_quadrature_samples():
    u = bump(0.5, 0.4)
    result = radial_divergence_oracle(3, u, 1.0)
    for r, f in zip(result.fit_r[::13], result.fit_f[::13]):
        q = integrate.quad(lambda t: u(np.array([t]))[0] * t * t, 0.0, 1.0)[0]
        assert f == pytest.approx(-q / (r * r), rel=1e-8)
    zero = radial_divergence_oracle(3, zero_moment_profile(), 1.0)
    assert np.all(zero.fit_f == 0)


def test_radial_oracle_linear():
    r = np.linspace(0.2, 3.0, 8)
    once = radial_divergence_oracle(3, bump(0.5, 0.4), 1.0, grid=r)
    twice = radial_divergence_oracle(3, bump(0.5, 0.4, height=2.0), 1.0, grid=r)
    assert np.allclose(twice.profile, 2 * once.profile, rtol=1e-10, atol=1e-14)


def test_radial_oracle_other_dimension():
    result = radial_divergence_oracle(4, bump(0.5, 0.4), 1.0)
    assert result.fitted_exponent == pytest.approx(-3.0, abs=0.05)
    assert result.integral == pytest.approx(result.moment * sphere_area(4))


def test_radial_oracle_sampled_profile():
    t = np.linspace(0.0, 1.0, 201)
    result = radial_divergence_oracle(3, sampled_profile(t, np.sin(np.pi * t) ** 2), 1.0)
    assert result.fitted_exponent == pytest.approx(-2.0, abs=0.05)


def test_radial_oracle_rejects_bad_input():
    with pytest.raises(InputError):
        radial_divergence_oracle(1, bump(0.5, 0.4), 1.0)
    with pytest.raises(InputError):
        radial_divergence_oracle(3, bump(0.5, 0.4), 0.0)


# ==================== Cartesian oracle ====================


def test_cartesian_div_1form_radial_mode():
    mode = ModeSpec(operator="div_1form", ell=0)
    result = cartesian_apply_oracle(EUCLID, mode, power_profile(mode_block(EUCLID, mode), 1.0), GRID)
    r = np.asarray(GRID)
    # delta(r^-1 dr) = -r^-2, scaled by r
    assert np.allclose(result.cartesian[:, 0].real, -1.0 / r, rtol=1e-4)
    assert result.rel_error < 1e-4


@pytest.mark.parametrize("s", [2.0, 1.5])
def test_cartesian_laplacian(s):
    mode = ModeSpec(operator="laplacian_scalar", ell=1)
    result = cartesian_apply_oracle(EUCLID, mode, power_profile(mode_block(EUCLID, mode), s), GRID)
    assert result.rel_error < 1e-4
    if s == 2.0:
        # r^-2 Y_1 is harmonic
        assert np.max(np.abs(result.mode)) < 1e-12


@pytest.mark.parametrize(
    "operator, ell, htype, metric",
    [
        ("exterior_d", 1, "scalar", EUCLID),
        ("div_1form", 2, "scalar", EUCLID),
        ("div_2tensor", 1, "scalar", EUCLID),
        ("div_2tensor", 1, "vector", EUCLID),
        ("div_2tensor", 2, "scalar", EUCLID),
        ("div_1form", 1, "scalar", PERTURBED),
        ("div_2tensor", 2, "scalar", PERTURBED),
    ],
)
def test_cartesian_agrees_with_mode_reduction(operator, ell, htype, metric):
    mode = ModeSpec(operator=operator, ell=ell, type=htype)
    block = mode_block(metric, mode)
    weights = {name: 1.0 + 0.25 * i for i, name in enumerate(block.cols)}
    result = cartesian_apply_oracle(metric, mode, power_profile(block, 1.5, weights), GRID)
    assert result.rows == block.rows
    assert result.rel_error < 1e-4
    assert result.estimate <= 1e-4


ADMISSIBLE = [mode for op in OPERATORS for mode in admissible_modes(op, 3, 3)]


@pytest.mark.parametrize("mode", ADMISSIBLE, ids=lambda m: f"{m.operator}-l{m.ell}-{m.type}")
def test_cartesian_second_order_on_admissible_modes(mode):
    block = mode_block(EUCLID, mode)
    weights = {name: 1.0 + 0.25 * i for i, name in enumerate(block.cols)}
    result = cartesian_apply_oracle(EUCLID, mode, power_profile(block, 1.5, weights), GRID)
    assert result.rel_error < 1e-4
    assert result.order >= 1.9 or result.order == math.inf


def test_cartesian_zero_profile():
    mode = ModeSpec(operator="div_2tensor", ell=1, type="vector")
    block = mode_block(EUCLID, mode)
    result = cartesian_apply_oracle(EUCLID, mode, power_profile(block, 1.5, {}), GRID)
    assert result.order == math.inf
    assert result.estimate == 0.0
    assert result.rel_error == 0.0


def test_cartesian_rejects_bad_input():
    mode = ModeSpec(operator="div_1form", ell=0)
    profile = power_profile(mode_block(EUCLID, mode), 1.0)
    with pytest.raises(InputError):
        cartesian_apply_oracle(MetricSpec(n=4), ModeSpec(operator="div_1form", ell=0, n=4), profile, GRID)
    with pytest.raises(InputError):
        cartesian_apply_oracle(EUCLID, mode, profile, [0.03, 1.0])
    with pytest.raises(InputError):
        cartesian_apply_oracle(EUCLID, ModeSpec(operator="div_1form", ell=1), profile, GRID)


def test_cartesian_coarse_step():
    mode = ModeSpec(operator="laplacian_scalar", ell=1)
    with pytest.raises(GridTooCoarse):
        cartesian_apply_oracle(EUCLID, mode, power_profile(mode_block(EUCLID, mode), 1.5), [3.0, 3.5], step=0.7)
