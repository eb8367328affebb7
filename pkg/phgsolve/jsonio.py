"""
JSON I/O Module - input schemas and report serialization

用途:
- Parse operator / expansion / metric / profile files through pydantic models
- Report malformed JSON as path:line:column, schema failures with the field path
- Serialize index sets, expansions, spectra and solve reports to JSON, and CSV for plotting

Complex numbers are {"re": x, "im": y}; plain numbers are accepted on input. Non-finite reals
are written as the strings "inf", "-inf", "nan" so that the output stays strict JSON.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .b_operator import BOperator
from .errors import InputError
from .formal_solver import ExponentStep, RouteComparison, SolveDiagnostics, SolveReport
from .mellin_family import MellinFamily, SpectrumPoint, SpectrumReport
from .normal_solver import SchwartzCorrection
from .series_core import IndexSet, PhgExpansion, PhgTerm
from .euclid.metric import MetricSpec


# ==================== input schemas ====================


class ComplexModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: float
    im: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


ComplexIn = Union[float, ComplexModel]
RealIn = Union[float, str]  # "inf" / "-inf" allowed


def as_complex(v: ComplexIn) -> complex:
    return v.value if isinstance(v, ComplexModel) else complex(v)


def as_real(v: Optional[RealIn], default: float = math.inf) -> float:
    if v is None:
        return default
    try:
        return float(v)
    except ValueError as exc:
        raise InputError(f"not a real number: {v!r}") from exc


class BlockModel(BaseModel):
    j: int = Field(ge=0)  # power of rho D
    t: int = Field(ge=0)  # power of rho
    matrix: List[List[ComplexIn]]


class OperatorFile(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    order: int = Field(ge=0)
    taylor_depth: int = Field(0, ge=0, alias="taylorDepth")
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    weight: float = 0.0  # density weight w
    blocks: List[BlockModel] = []  # missing blocks are zero
    label: str = ""


class TermModel(BaseModel):
    re: float
    im: float = 0.0
    k: int = Field(0, ge=0)
    coeff: List[ComplexIn]


class ExpansionFile(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    dim: int = Field(ge=1)
    remainder_order: Optional[RealIn] = Field(None, alias="remainderOrder")  # null = infinity
    terms: List[TermModel] = []
    probe: Optional[List[ComplexIn]] = None  # cokernel probe vector for Schwartz corrections


class FamilyFile(BaseModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    coeffs: List[List[List[ComplexIn]]]


class ProfileFile(BaseModel):
    """Oracle inputs: samples (r, u) for the radial oracle, or a power profile for the Cartesian one."""

    r: List[float] = []
    u: List[float] = []
    support: Optional[float] = None
    s: Optional[ComplexIn] = None  # profile rho^s
    weights: Dict[str, ComplexIn] = {}  # block column -> coefficient; all ones when empty
    grid: List[float] = []  # sample radii


# ==================== loading ====================


def load_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _validate(model: type, data: Any, path: Union[str, Path]) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InputError(f"{path}: {where}: {first['msg']}") from exc


def _matrix(rows: Sequence[Sequence[ComplexIn]], shape: Tuple[int, int], what: str) -> np.ndarray:
    m = np.array([[as_complex(v) for v in row] for row in rows], dtype=complex)
    if m.shape != shape:
        raise InputError(f"{what} has shape {m.shape}, expected {shape}")
    return m


def operator_from_data(data: Any, path: Union[str, Path] = "<operator>") -> BOperator:
    spec: OperatorFile = _validate(OperatorFile, data, path)
    blocks = []
    for b in spec.blocks:
        if b.j > spec.order or b.t > spec.taylor_depth:
            raise InputError(f"{path}: block (j={b.j}, t={b.t}) beyond order {spec.order} / depth {spec.taylor_depth}")
        blocks.append((b.j, b.t, _matrix(b.matrix, (spec.rows, spec.cols), f"{path}: block (j={b.j}, t={b.t})")))
    return BOperator.from_blocks(blocks, spec.order, spec.taylor_depth, spec.rows, spec.cols, spec.weight, spec.label)


def expansion_from_data(data: Any, path: Union[str, Path] = "<expansion>") -> Tuple[PhgExpansion, Optional[np.ndarray]]:
    """Expansion and the optional cokernel probe."""
    spec: ExpansionFile = _validate(ExpansionFile, data, path)
    terms = []
    for t in spec.terms:
        if len(t.coeff) != spec.dim:
            raise InputError(f"{path}: term at s={t.re}+{t.im}i has {len(t.coeff)} components, expected {spec.dim}")
        terms.append(PhgTerm(complex(t.re, t.im), t.k, [as_complex(c) for c in t.coeff]))
    expansion = PhgExpansion.from_terms(terms, spec.dim, as_real(spec.remainder_order))
    probe = None if spec.probe is None else np.array([as_complex(c) for c in spec.probe], dtype=complex)
    return expansion, probe


def family_from_data(data: Any, path: Union[str, Path] = "<family>") -> MellinFamily:
    spec: FamilyFile = _validate(FamilyFile, data, path)
    return MellinFamily(tuple(_matrix(c, (spec.rows, spec.cols), f"{path}: coefficient") for c in spec.coeffs))


def load_family(path: Union[str, Path]) -> MellinFamily:
    return family_from_data(load_json(path), path)


def load_operator(path: Union[str, Path]) -> BOperator:
    return operator_from_data(load_json(path), path)


def load_expansion(path: Union[str, Path]) -> Tuple[PhgExpansion, Optional[np.ndarray]]:
    return expansion_from_data(load_json(path), path)


def load_metric(path: Union[str, Path]) -> MetricSpec:
    return _validate(MetricSpec, load_json(path), path)


def load_profile(path: Union[str, Path]) -> ProfileFile:
    return _validate(ProfileFile, load_json(path), path)


# ==================== serialization ====================


def real_to_json(x: Optional[float]) -> Union[float, str, None]:
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def complex_to_json(c: complex) -> Dict[str, Any]:
    c = complex(c)
    return {"re": real_to_json(c.real), "im": real_to_json(c.imag)}


def vector_to_json(v: Iterable[complex]) -> List[Dict[str, Any]]:
    return [complex_to_json(c) for c in v]


def index_set_to_json(E: IndexSet) -> Dict[str, Any]:
    return {
        "horizon": real_to_json(E.horizon),
        "entries": [{"re": e.s.real, "im": e.s.imag, "k": e.k} for e in E.entries],
    }


def expansion_to_json(u: PhgExpansion) -> Dict[str, Any]:
    return {
        "dim": u.dim,
        "remainderOrder": real_to_json(u.remainder_order),
        "terms": [
            {"re": t.s.real, "im": t.s.imag, "k": t.k, "coeff": vector_to_json(t.coeff)} for t in u.terms
        ],
    }


def family_to_json(N: MellinFamily) -> Dict[str, Any]:
    return {
        "rows": N.rows,
        "cols": N.cols,
        "coeffs": [[vector_to_json(row) for row in a] for a in N.coeffs],
    }


def spectrum_point_to_json(p: SpectrumPoint) -> Dict[str, Any]:
    return {
        "s": complex_to_json(p.s),
        "z0": complex_to_json(p.z0),
        "detMultiplicity": p.det_multiplicity,
        "ord": p.ord,
        "quotientDims": list(p.quotient_dims),
        "partialMultiplicities": list(p.partial_multiplicities),
        "zeta0": None if p.zeta0 is None else complex_to_json(p.zeta0),
        "provenance": list(p.provenance),
    }


def spectrum_report_to_json(report: SpectrumReport) -> Dict[str, Any]:
    lo, hi = report.strip
    return {
        "kind": report.kind,
        "strip": {"im": [real_to_json(lo), real_to_json(hi)], "re": [real_to_json(-hi), real_to_json(-lo)]},
        "points": [spectrum_point_to_json(p) for p in report.points],
    }


def _step_to_json(step: ExponentStep) -> Dict[str, Any]:
    return {
        "s": complex_to_json(step.s),
        "rhsLog": step.rhs_log,
        "solutionLog": step.solution_log,
        "J": step.J,
        "logEnlargement": step.log_enlargement,
        "stages": [{"j": st.j, "pairingNorm": real_to_json(st.pairing_norm), "rank": st.rank} for st in step.stages],
    }


def _correction_to_json(c: SchwartzCorrection) -> Dict[str, Any]:
    return {
        "s": complex_to_json(c.s),
        "J": c.J,
        "functional": vector_to_json(c.functional),
        "coefficients": vector_to_json(c.coefficients),
        "rank": c.rank,
        "mismatch": real_to_json(c.mismatch),
        "terms": [{"re": t.s.real, "im": t.s.imag, "k": t.k, "coeff": vector_to_json(t.coeff)} for t in c.terms],
    }


def diagnostics_to_json(d: SolveDiagnostics) -> Dict[str, Any]:
    return {
        "alpha0": real_to_json(d.alpha0),
        "steps": [_step_to_json(s) for s in d.steps],
        "corrections": [_correction_to_json(c) for c in d.corrections],
        "defectBelowTarget": real_to_json(d.defect_below_target),
        "padded": d.padded,
    }


def comparison_to_json(c: Optional[RouteComparison]) -> Optional[Dict[str, Any]]:
    if c is None:
        return None
    return {
        "sharp": index_set_to_json(c.sharp),
        "ppstar": index_set_to_json(c.ppstar),
        "contained": c.contained,
        "strict": c.strict,
    }


def solve_report_to_json(report: SolveReport) -> Dict[str, Any]:
    return {
        "route": report.route,
        "target": real_to_json(report.target),
        "solution": expansion_to_json(report.solution),
        "predicted": index_set_to_json(report.predicted),
        "realized": index_set_to_json(report.realized),
        "residual": expansion_to_json(report.residual),
        "diagnostics": diagnostics_to_json(report.diagnostics),
        "comparison": comparison_to_json(report.comparison),
    }


def dumps(payload: Any) -> str:
    """Deterministic JSON text."""
    return json.dumps(payload, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


# ==================== CSV ====================


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def expansion_csv(u: PhgExpansion) -> str:
    """(Re s, k, |coeff|) per term, |coeff| the max norm."""
    return _csv_text(["re_s", "k", "abs_coeff"], ((t.s.real, t.k, t.magnitude) for t in u.terms))


def spectrum_csv(*reports: SpectrumReport) -> str:
    rows = [
        (r.kind, p.s.real, p.s.imag, _blank(p.ord), _blank(p.det_multiplicity))
        for r in reports
        for p in r.points
    ]
    return _csv_text(["kind", "re_s", "im_s", "ord", "det_multiplicity"], rows)


def _blank(v: Optional[int]) -> Any:
    return "" if v is None else v


def profile_csv(r: Sequence[float], columns: Dict[str, Sequence[complex]]) -> str:
    """(r, value) columns; complex columns split into .re / .im."""
    header = ["r"]
    data: List[np.ndarray] = []
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            header += [f"{name}.re", f"{name}.im"]
            data += [arr.real, arr.imag]
        else:
            header.append(name)
            data.append(arr.astype(float))
    rows = [[float(x)] + [float(col[i]) for col in data] for i, x in enumerate(r)]
    return _csv_text(header, rows)
