"""
Spectrum Module - boundary spectra aggregated over modes

Divergences report the surjective spectrum; exterior_d and the Laplacian report the injective one.
Reports carry the strip as Im z, like single-operator reports. Points of different modes at one
exponent merge: ord is the maximum, chain dimensions add, provenance lists the modes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from ..b_operator import injective_spectrum_of, surjective_spectrum_of
from ..errors import InputError
from ..logs import get_logger
from ..mellin_family import SpectrumPoint, SpectrumReport
from ..series_core import exponent_key, same_exponent
from ..settings import get_settings
from .metric import MetricSpec
from .modes import ModeBlock, admissible_modes, mode_block

logger = get_logger("Spectrum")

SURJECTIVE_OPERATORS = ("div_1form", "div_2tensor")


def default_kind(operator: str) -> str:
    return "surjective" if operator in SURJECTIVE_OPERATORS else "injective"


def re_strip_to_im(strip: Tuple[float, float]) -> Tuple[float, float]:
    """Re s in (lo, hi) <-> Im z in (-hi, -lo)."""
    lo, hi = strip
    return (-hi, -lo)


def _mode_points(block: ModeBlock, strip_im: Tuple[float, float], kind: str, jmax: Optional[int]) -> List[SpectrumPoint]:
    op = block.operator
    if op.rows == 0:
        return []
    if kind == "surjective":
        report = surjective_spectrum_of(op, strip_im, jmax)
    else:
        report = injective_spectrum_of(op, strip_im, jmax)
    return [
        SpectrumPoint(
            z0=p.z0,
            s=p.s,
            det_multiplicity=p.det_multiplicity,
            ord=p.ord,
            quotient_dims=p.quotient_dims,
            partial_multiplicities=p.partial_multiplicities,
            zeta0=p.zeta0,
            provenance=(block.tag,),
        )
        for p in report.points
    ]


def _add_dims(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    size = max(len(a), len(b))
    return tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(size))


def _merge(p: SpectrumPoint, q: SpectrumPoint) -> SpectrumPoint:
    mult = None if p.det_multiplicity is None or q.det_multiplicity is None else p.det_multiplicity + q.det_multiplicity
    orders = [o for o in (p.ord, q.ord) if o is not None]
    return SpectrumPoint(
        z0=p.z0,
        s=p.s,
        det_multiplicity=mult,
        ord=max(orders) if len(orders) == 2 else None,
        quotient_dims=_add_dims(p.quotient_dims, q.quotient_dims),
        partial_multiplicities=_add_dims(p.partial_multiplicities, q.partial_multiplicities),
        zeta0=p.zeta0,
        provenance=p.provenance + q.provenance,
    )


def boundary_spectrum_report(
    metric: MetricSpec,
    operator: str,
    strip: Tuple[float, float],
    lmax: int,
    kind: Optional[str] = None,
    jmax: Optional[int] = None,
    workers: Optional[int] = None,
) -> SpectrumReport:
    """
    Spectrum of the mode-reduced operator over all modes l <= lmax.

    Args:
        strip: (lo, hi) window in Re s, open
        kind: "surjective" or "injective"; defaults by operator
    """
    if lmax < 2:
        raise InputError(f"lmax must be at least 2, got {lmax}")
    kind = default_kind(operator) if kind is None else kind
    if kind not in ("surjective", "injective"):
        raise InputError(f"unknown spectrum kind: {kind}")
    workers = get_settings().cli.workers if workers is None else workers
    blocks = [mode_block(metric, mode) for mode in admissible_modes(operator, metric.n, lmax)]
    strip_im = re_strip_to_im(strip)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        per_mode = list(pool.map(lambda b: _mode_points(b, strip_im, kind, jmax), blocks))

    merged: List[SpectrumPoint] = []
    for points in per_mode:
        for p in points:
            idx = next((i for i, q in enumerate(merged) if same_exponent(q.s, p.s)), None)
            if idx is None:
                merged.append(p)
            else:
                merged[idx] = _merge(merged[idx], p)
    merged.sort(key=lambda p: exponent_key(p.s))
    logger.info(f"{operator} ({kind}, n={metric.n}, l<={lmax}): {[f'{p.s.real:.6g}' for p in merged]}")
    return SpectrumReport(tuple(merged), strip_im, kind)
