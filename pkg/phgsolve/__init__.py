"""Polyhomogeneous formal solutions of b-differential systems"""

from .b_operator import BOperator, apply_to_expansion
from .errors import PhgSolveError
from .formal_solver import SolveReport, formal_solve, kernel_element, ppstar_formal_solve, sharp_solve
from .mellin_family import MellinFamily
from .series_core import IndexEntry, IndexSet, PhgExpansion, PhgTerm

__all__ = [
    "BOperator",
    "apply_to_expansion",
    "PhgSolveError",
    "SolveReport",
    "formal_solve",
    "kernel_element",
    "ppstar_formal_solve",
    "sharp_solve",
    "MellinFamily",
    "IndexEntry",
    "IndexSet",
    "PhgExpansion",
    "PhgTerm",
]
