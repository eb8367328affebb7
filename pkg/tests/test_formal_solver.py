import math

import numpy as np
import pytest

from phgsolve.b_operator import BOperator, apply_to_expansion
from phgsolve.errors import InputError, NotUnderdetermined, TaylorDepthExceeded
from phgsolve.formal_solver import (
    DIRECT,
    KERNEL,
    PPSTAR,
    formal_solve,
    kernel_element,
    ppstar_formal_solve,
    select_alpha0,
    sharp_solve,
)
from phgsolve.series_core import PhgExpansion, PhgTerm


def scalar_rhs(*terms, remainder=20.0):
    """terms as (s, k, coeff)."""
    return PhgExpansion.from_terms([PhgTerm(s, k, [c]) for s, k, c in terms], 1, remainder)


def rho_d_plus_rho():
    return BOperator.from_blocks([(1, 0, [[1]]), (0, 1, [[1]])], 1, 8, 1, 1, 0.0, "rhoD+rho")


def underdetermined(with_tail=True):
    """[rho D, 1] (plus rho [1, 1] when with_tail)."""
    blocks = [(1, 0, [[1, 0]]), (0, 0, [[0, 1]])]
    if with_tail:
        blocks.append((0, 1, [[1, 1]]))
    return BOperator.from_blocks(blocks, 1, 8, 1, 2, 0.0)


def assert_residual_contract(report):
    assert all(t.s.real >= report.target - 1e-12 for t in report.residual)
    assert report.diagnostics.defect_below_target < 1e-9
    assert report.realized.issubset(report.predicted)


# ==================== formal solve ====================


def test_rho_d_on_rho():
    report = formal_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)), target=5)
    assert report.route == DIRECT
    assert len(report.solution) == 1
    assert report.solution.coefficient(1, 0)[0] == pytest.approx(1j)
    assert report.residual.is_zero()
    assert_residual_contract(report)


def test_rho_d_on_constant_gives_log():
    report = formal_solve(BOperator.rho_d(), scalar_rhs((0, 0, 1.0)), target=3)
    assert report.solution.coefficient(0, 1)[0] == pytest.approx(1j)
    assert report.solution.term(0, 0) is None
    step = report.diagnostics.steps[0]
    assert step.J == 1
    assert step.log_enlargement == 1
    assert_residual_contract(report)


def test_perturbed_rho_d_corrections():
    report = formal_solve(rho_d_plus_rho(), scalar_rhs((0, 0, 1.0)), target=3)
    assert report.solution.coefficient(0, 1)[0] == pytest.approx(1j)
    assert report.solution.max_magnitude(below=3) > 0
    exponents = sorted({round(t.s.real, 9) for t in report.solution})
    assert exponents == [0.0, 1.0, 2.0]
    assert report.predicted.contains(1, 1)
    assert_residual_contract(report)


def test_default_target_uses_gap():
    report = formal_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)))
    assert report.target == pytest.approx(9.0)


def test_rhs_padded_when_known_to_lower_order():
    f = scalar_rhs((1, 0, 1.0), remainder=2.0)
    report = formal_solve(BOperator.rho_d(), f, target=4)
    assert report.diagnostics.padded


def test_linearity():
    P = rho_d_plus_rho()
    f = scalar_rhs((0, 0, 1.0))
    g = scalar_rhs((0.5, 0, 2.0), (1, 0, 1j))
    both = formal_solve(P, f + g, target=3).solution
    apart = formal_solve(P, f, target=3).solution + formal_solve(P, g, target=3).solution
    assert (both - apart).max_magnitude() <= 1e-9


def test_rhs_dimension_checked():
    with pytest.raises(InputError):
        formal_solve(BOperator.identity(2), scalar_rhs((0, 0, 1.0)))


def test_target_beyond_taylor_depth():
    P = BOperator.rho_d(taylor_depth=2)
    with pytest.raises(TaylorDepthExceeded):
        formal_solve(P, scalar_rhs((0, 0, 1.0)), target=5)


# ==================== sharp solve ====================


def test_select_alpha0():
    assert select_alpha0(2.0, [2.0, 3.0]) == 2.0
    assert select_alpha0(1.5, [3.0, 2.0]) == 2.0
    assert select_alpha0(3.5, [2.0, 3.0]) == math.inf
    assert select_alpha0(0.0, []) == math.inf


def test_sharp_adds_schwartz_correction_at_alpha0():
    report = sharp_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)), alpha_coker=0.0, target=5)
    assert report.diagnostics.alpha0 == 0.0
    assert len(report.diagnostics.corrections) == 1
    assert report.solution.coefficient(0, 0)[0] == pytest.approx(-1j)
    assert report.solution.coefficient(1, 0)[0] == pytest.approx(1j)
    assert_residual_contract(report)


def test_sharp_orthogonal_forcing_has_no_correction():
    report = sharp_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)), alpha_coker=math.inf, target=5)
    assert report.diagnostics.alpha0 == math.inf
    assert report.diagnostics.corrections == []
    assert len(report.solution) == 1
    assert_residual_contract(report)


def test_sharp_probe_scales_correction():
    report = sharp_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)), 0.0, target=5, probe=[2.0])
    assert report.solution.coefficient(0, 0)[0] == pytest.approx(-2j)


def test_sharp_rejects_coker_above_forcing():
    with pytest.raises(InputError):
        sharp_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)), alpha_coker=2.0, target=5)
    with pytest.raises(InputError):
        sharp_solve(BOperator.rho_d(), scalar_rhs((1, 0, 1.0)), alpha_coker=math.nan, target=5)


# ==================== PP* route ====================


def test_ppstar_agrees_with_direct_on_leading_term():
    f = scalar_rhs((1, 0, 1.0))
    pp = ppstar_formal_solve(BOperator.rho_d(), 0.3, f, target=5, compare=False)
    direct = formal_solve(BOperator.rho_d(), f, target=5)
    assert pp.route == PPSTAR
    assert pp.comparison is None
    assert abs(pp.solution.leading_exponent() - direct.solution.leading_exponent()) < 1e-9
    assert pp.solution.coefficient(1, 0)[0] == pytest.approx(direct.solution.coefficient(1, 0)[0])
    assert pp.realized.issubset(pp.predicted)


def test_ppstar_comparison_with_orthogonal_forcing():
    f = scalar_rhs((1, 0, 1.0))
    pp = ppstar_formal_solve(BOperator.rho_d(), 0.3, f, target=5, alpha_coker=math.inf)
    assert pp.comparison is not None
    assert pp.comparison.contained
    assert not pp.comparison.strict


# ==================== kernel elements ====================


def test_kernel_element_leading_term():
    P = underdetermined()
    report = kernel_element(P, 0.0, 0, target=3)
    assert report.route == KERNEL
    assert abs(report.solution.leading_exponent()) < 1e-12
    assert np.linalg.norm(report.solution.coefficient(0, 0)) > 0.1
    image = apply_to_expansion(P, report.solution)
    assert image.max_magnitude(below=3) <= 1e-9
    assert report.realized.issubset(report.predicted)


def test_kernel_element_log_power():
    P = underdetermined()
    report = kernel_element(P, 0.5, 2, target=3)
    at_s0 = [t.k for t in report.solution if abs(t.s - 0.5) < 1e-9]
    assert max(at_s0) == 2
    assert apply_to_expansion(P, report.solution).max_magnitude(below=3) <= 1e-9


def test_kernel_element_without_tail_is_exact():
    P = underdetermined(with_tail=False)
    report = kernel_element(P, 1.0, 0, target=4)
    assert all(abs(t.s - 1.0) < 1e-9 for t in report.solution)


def test_kernel_element_needs_wide_family():
    with pytest.raises(NotUnderdetermined):
        kernel_element(BOperator.rho_d(), 0.0, 0, target=2)
    with pytest.raises(InputError):
        kernel_element(underdetermined(), 0.0, -1, target=2)
