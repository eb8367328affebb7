import json
import math

import numpy as np
import pytest

from phgsolve import jsonio
from phgsolve.b_operator import BOperator, injective_spectrum_of
from phgsolve.errors import InputError
from phgsolve.euclid import MetricSpec
from phgsolve.formal_solver import formal_solve
from phgsolve.mellin_family import MellinFamily
from phgsolve.series_core import IndexEntry, PhgExpansion, PhgTerm, validate_index_set

# ==================== loading ====================


def test_load_operator(examples_dir):
    P = jsonio.load_operator(examples_dir / "rDr_perturbed.json")
    assert (P.rows, P.cols, P.order, P.taylor_depth) == (1, 1, 1, 8)
    assert P.label == "rhoD + i rho"
    assert P.coeffs[0, 1, 0, 0] == pytest.approx(1j)
    assert P.coeffs[1, 0, 0, 0] == pytest.approx(1.0)


def test_load_underdetermined_weight(examples_dir):
    P = jsonio.load_operator(examples_dir / "underdetermined.json")
    assert P.weight == -1.0
    assert P.cols == 2


def test_load_expansion(examples_dir):
    f, probe = jsonio.load_expansion(examples_dir / "rho.json")
    assert probe is None
    assert f.remainder_order == math.inf
    assert f.coefficient(1, 0)[0] == pytest.approx(1.0)


def test_load_metric(examples_dir):
    metric = jsonio.load_metric(examples_dir / "metric_generic.json")
    assert metric == MetricSpec(n=3, a=[0.2, -0.1], b=[0.1], coupling=0.3)


def test_load_profiles(examples_dir):
    radial = jsonio.load_profile(examples_dir / "profile_radial.json")
    assert len(radial.r) == len(radial.u)
    power = jsonio.load_profile(examples_dir / "profile_power.json")
    assert jsonio.as_complex(power.s) == 2
    assert power.grid == [3.0, 4.0, 5.0]


def test_malformed_json_location(examples_dir):
    path = examples_dir.parent / "tests" / "malformed.json"
    with pytest.raises(InputError, match=r"malformed\.json:\d+:\d+"):
        jsonio.load_expansion(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        jsonio.load_operator(tmp_path / "absent.json")


def test_schema_error_names_field():
    with pytest.raises(InputError, match="rows"):
        jsonio.operator_from_data({"order": 1, "rows": 0, "cols": 1}, "op.json")


def test_block_shape_checked():
    data = {"order": 1, "rows": 1, "cols": 2, "blocks": [{"j": 1, "t": 0, "matrix": [[1]]}]}
    with pytest.raises(InputError, match="shape"):
        jsonio.operator_from_data(data)


def test_block_beyond_depth():
    data = {"order": 1, "taylorDepth": 0, "rows": 1, "cols": 1, "blocks": [{"j": 0, "t": 1, "matrix": [[1]]}]}
    with pytest.raises(InputError, match="beyond"):
        jsonio.operator_from_data(data)


def test_term_dimension_checked():
    with pytest.raises(InputError, match="components"):
        jsonio.expansion_from_data({"dim": 2, "terms": [{"re": 0, "coeff": [1]}]})


def test_expansion_with_probe_and_complex_entries():
    data = {
        "dim": 2,
        "remainderOrder": "inf",
        "terms": [{"re": 0.5, "im": 1, "k": 2, "coeff": [{"re": 1, "im": -1}, 3]}],
        "probe": [1, {"re": 0, "im": 1}],
    }
    f, probe = jsonio.expansion_from_data(data)
    assert np.allclose(probe, [1, 1j])
    assert np.allclose(f.coefficient(0.5 + 1j, 2), [1 - 1j, 3])


def test_bad_real():
    with pytest.raises(InputError):
        jsonio.as_real("lots")


def test_family_from_data():
    N = jsonio.family_from_data({"rows": 1, "cols": 1, "coeffs": [[[0]], [[1]]]})
    assert isinstance(N, MellinFamily)
    assert N.evaluate(2.0)[0, 0] == pytest.approx(2.0)
    again = jsonio.family_from_data(json.loads(json.dumps(jsonio.family_to_json(N))))
    assert np.allclose(again.evaluate(1 + 1j), N.evaluate(1 + 1j))


# ==================== serialization ====================


def test_non_finite_reals_are_strings():
    assert jsonio.real_to_json(math.inf) == "inf"
    assert jsonio.real_to_json(-math.inf) == "-inf"
    assert jsonio.real_to_json(math.nan) == "nan"
    assert jsonio.real_to_json(None) is None
    assert jsonio.complex_to_json(complex(math.inf, 1)) == {"re": "inf", "im": 1.0}


def test_index_set_json():
    E = validate_index_set([IndexEntry(0, 1), IndexEntry(1 + 0.5j, 0)], 4.0)
    data = json.loads(jsonio.dumps(jsonio.index_set_to_json(E)))
    assert data["horizon"] == 4.0
    listed = {(e["re"], e["im"], e["k"]) for e in data["entries"]}
    assert {(0.0, 0.0, 1), (0.0, 0.0, 0), (1.0, 0.5, 0)} <= listed
    assert len(listed) == len(E)


def test_expansion_json_with_infinite_remainder():
    u = PhgExpansion.from_terms([PhgTerm(1, 0, [2j])], 1, math.inf)
    data = json.loads(jsonio.dumps(jsonio.expansion_to_json(u)))
    assert data["remainderOrder"] == "inf"
    again, _ = jsonio.expansion_from_data(data)
    assert again == u


def test_solve_report_is_strict_json():
    f = PhgExpansion.from_terms([PhgTerm(0, 0, [1.0])], 1, math.inf)
    report = formal_solve(BOperator.rho_d(), f, target=3)
    text = jsonio.dumps(jsonio.solve_report_to_json(report))
    data = json.loads(text)
    assert data["route"] == report.route
    assert data["solution"]["terms"][0]["k"] == 1
    assert data["diagnostics"]["steps"][0]["logEnlargement"] == 1
    assert data["comparison"] is None


def test_spectrum_json_reports_both_strips():
    report = injective_spectrum_of(BOperator.rho_d(), (-2.0, 1.0))
    data = jsonio.spectrum_report_to_json(report)
    assert data["strip"]["im"] == [-2.0, 1.0]
    assert data["strip"]["re"] == [-1.0, 2.0]
    assert data["points"][0]["ord"] == 1


# ==================== CSV ====================


def test_expansion_csv():
    u = PhgExpansion.from_terms([PhgTerm(0, 1, [3.0]), PhgTerm(1, 0, [-4.0])], 1, 5.0)
    lines = jsonio.expansion_csv(u).splitlines()
    assert lines[0] == "re_s,k,abs_coeff"
    assert lines[1:] == ["0.0,1,3.0", "1.0,0,4.0"]


def test_spectrum_csv_blank_ord():
    report = injective_spectrum_of(BOperator.rho_d(), (-2.0, 1.0))
    lines = jsonio.spectrum_csv(report).splitlines()
    assert lines[0] == "kind,re_s,im_s,ord,det_multiplicity"
    assert lines[1].startswith("injective,")


def test_profile_csv_splits_complex():
    text = jsonio.profile_csv([1.0, 2.0], {"f": [1.0, 2.0], "g": [1j, 2.0]})
    assert text.splitlines()[0] == "r,f,g.re,g.im"
    assert text.splitlines()[1] == "1.0,1.0,0.0,1.0"
