import math

import numpy as np
import pytest

from phgsolve.errors import InputError
from phgsolve.euclid import MetricSpec, divsolve, mode_system, probe_without, radial_divergence_oracle
from phgsolve.euclid.drivers import leading_exponent_of
from phgsolve.euclid.oracles import bump
from phgsolve.formal_solver import ppstar_formal_solve
from phgsolve.series_core import PhgExpansion

EUCLID = MetricSpec(n=3)
SYMMETRIC = MetricSpec(n=3, a=[0.2, -0.1], b=[0.1])
GENERIC = MetricSpec(n=3, a=[0.2, -0.1], b=[0.1], coupling=0.3)


def log_coefficient(report, s, k):
    return float(np.max(np.abs(report.solution.coefficient(s, k))))


# ==================== sharp route ====================


def test_div_1form_schwartz_forcing():
    result = divsolve(EUCLID, "div_1form", 2)
    report = result.report
    assert report.diagnostics.alpha0 == pytest.approx(2.0)
    assert not report.solution.is_zero()
    assert abs(leading_exponent_of(report) - 2) < 1e-9
    assert all(t.k == 0 for t in report.solution)
    assert report.realized.issubset(report.predicted)
    assert report.diagnostics.defect_below_target < 1e-9


def test_div_1form_orthogonal_forcing():
    report = divsolve(EUCLID, "div_1form", 2, alpha_coker=math.inf).report
    assert report.solution.is_zero()
    assert report.diagnostics.corrections == []


def test_div_2tensor_schwartz_forcing_euclidean():
    report = divsolve(EUCLID, "div_2tensor", 2).report
    assert abs(leading_exponent_of(report) - 2) < 1e-9
    assert report.realized.issubset(report.predicted)
    assert log_coefficient(report, 3, 1) <= 1e-9


def test_log_dichotomy():
    generic = divsolve(GENERIC, "div_2tensor", 2).report
    symmetric = divsolve(SYMMETRIC, "div_2tensor", 2).report
    assert generic.predicted.contains(3, 1)
    assert log_coefficient(generic, 3, 1) > 1e-6
    assert log_coefficient(symmetric, 3, 1) <= 1e-9
    for report in (generic, symmetric):
        assert report.realized.issubset(report.predicted)
        assert report.diagnostics.defect_below_target < 1e-9


def test_probe_without_translations():
    system = divsolve(EUCLID, "div_2tensor", 2).system
    probe = probe_without(system, [(0, "scalar"), (1, "scalar"), (2, "scalar"), (2, "vector")])
    rows = system.rows_of(1, "vector").values()
    assert all(probe[i] == 1 for i in rows)
    assert np.count_nonzero(probe) == len(rows)
    # alpha0 = 2 pairs with translations only, which the probe no longer sees
    report = divsolve(EUCLID, "div_2tensor", 2, probe=probe).report
    assert report.diagnostics.alpha0 == pytest.approx(2.0)
    assert report.solution.max_magnitude() <= 1e-12


def test_rotations_enter_above_translations():
    report = divsolve(EUCLID, "div_2tensor", 2, alpha_coker=2.5).report
    assert report.diagnostics.alpha0 == pytest.approx(3.0)
    assert abs(leading_exponent_of(report) - 3) < 1e-9
    assert report.realized.issubset(report.predicted)


def test_divsolve_rejects_other_operators():
    with pytest.raises(InputError):
        divsolve(EUCLID, "laplacian_scalar", 2)
    with pytest.raises(InputError):
        divsolve(EUCLID, "div_1form", 2, route="adjoint")


def test_divsolve_rhs_dimension():
    with pytest.raises(InputError):
        divsolve(EUCLID, "div_1form", 2, rhs=PhgExpansion.empty(7, 5.0))


# ==================== PP* comparison ====================


def test_ppstar_route_is_not_sharp():
    report = divsolve(EUCLID, "div_1form", 2, route="ppstar", alpha=0.0, alpha_coker=math.inf).report
    assert report.route == "ppstar"
    assert log_coefficient(report, 3, 0) > 1e-6
    assert log_coefficient(report, 2, 0) <= 1e-12
    assert not report.realized.contains(2, 0)
    assert report.comparison is not None
    assert len(report.comparison.sharp) == 0
    assert report.comparison.contained
    assert report.comparison.strict
    assert report.realized.issubset(report.predicted)


def test_ppstar_keeps_constant_mode_above_alpha0():
    report = divsolve(EUCLID, "div_1form", 2, route="ppstar", alpha=0.0, alpha_coker=2.0).report
    assert log_coefficient(report, 2, 0) > 1e-6
    assert report.comparison.sharp.contains(2, 0)
    assert report.comparison.contained


def test_ppstar_rejects_nan_cokernel_weight():
    system = mode_system(EUCLID, "div_1form", 1)
    f = PhgExpansion.empty(system.operator.rows, 5.0)
    with pytest.raises(InputError):
        ppstar_formal_solve(system.operator, 0.0, f, target=5.0, alpha_coker=math.nan)


def test_ppstar_with_self_dual_weight():
    report = divsolve(EUCLID, "div_1form", 2, route="ppstar", alpha_coker=math.inf).report
    assert report.comparison.contained


# ==================== oracle agreement ====================


def test_radial_oracle_matches_sharp_exponent():
    oracle = radial_divergence_oracle(3, bump(0.5, 0.4), 1.0)
    report = divsolve(EUCLID, "div_1form", 2).report
    lead = leading_exponent_of(report, components=[0])
    assert abs(oracle.fitted_exponent + lead.real) < 0.05
