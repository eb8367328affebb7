import pytest

from phgsolve.errors import InputError
from phgsolve.euclid import MetricSpec, boundary_spectrum_report
from phgsolve.euclid.spectrum import default_kind, re_strip_to_im

EUCLID = MetricSpec(n=3)


def exponents(report):
    return [round(p.s.real, 7) for p in report.points]


def test_strip_conversion():
    assert re_strip_to_im((0.0, 4.0)) == (-4.0, -0.0)
    assert default_kind("div_2tensor") == "surjective"
    assert default_kind("laplacian_scalar") == "injective"


def test_div_1form_surjective_spectrum():
    report = boundary_spectrum_report(EUCLID, "div_1form", (0, 4), lmax=2)
    assert report.kind == "surjective"
    assert exponents(report) == [2.0]
    point = report.points[0]
    assert abs(point.s - 2) < 1e-7
    assert point.ord == 1
    assert "l=0 scalar" in point.provenance


def test_div_2tensor_surjective_spectrum():
    report = boundary_spectrum_report(EUCLID, "div_2tensor", (0, 4), lmax=2)
    assert exponents(report) == [2.0, 3.0]
    assert all(p.ord == 1 for p in report.points)
    # translations and rotations live in the l = 1 blocks
    assert "l=1 scalar" in report.points[0].provenance
    assert "l=1 vector" in report.points[1].provenance


def test_div_spectra_scale_with_dimension():
    report = boundary_spectrum_report(MetricSpec(n=4), "div_2tensor", (0, 5), lmax=2)
    assert exponents(report) == [3.0, 4.0]


def test_laplacian_injective_spectrum():
    report = boundary_spectrum_report(EUCLID, "laplacian_scalar", (-2, 3), lmax=2)
    assert report.kind == "injective"
    assert exponents(report) == [-1.0, 0.0, 1.0, 2.0]


def test_radial_perturbation_keeps_spectrum():
    metric = MetricSpec(n=3, a=[0.2, -0.1], b=[0.1])
    report = boundary_spectrum_report(metric, "div_2tensor", (0, 4), lmax=2)
    assert exponents(report) == [2.0, 3.0]


def test_lmax_must_reach_two():
    with pytest.raises(InputError):
        boundary_spectrum_report(EUCLID, "div_1form", (0, 4), lmax=1)


def test_unknown_kind():
    with pytest.raises(InputError):
        boundary_spectrum_report(EUCLID, "div_1form", (0, 4), lmax=2, kind="both")


def test_narrow_window_single_point():
    report = boundary_spectrum_report(EUCLID, "div_2tensor", (1.5, 2.5), lmax=3, workers=1)
    assert len(report.points) == 1
    assert sum(report.points[0].quotient_dims) >= 1
