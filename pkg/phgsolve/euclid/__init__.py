"""Divergence-type operators on asymptotically Euclidean space"""

from .metric import MetricSpec, ModeSpec, check_admissible
from .modes import ModeBlock, ModeSystem, mode_block, mode_reduce, mode_system
from .spectrum import boundary_spectrum_report
from .drivers import DivSolveResult, divsolve, probe_without
from .oracles import cartesian_apply_oracle, power_profile, radial_divergence_oracle

__all__ = [
    "MetricSpec",
    "ModeSpec",
    "check_admissible",
    "ModeBlock",
    "ModeSystem",
    "mode_block",
    "mode_reduce",
    "mode_system",
    "boundary_spectrum_report",
    "DivSolveResult",
    "divsolve",
    "probe_without",
    "cartesian_apply_oracle",
    "power_profile",
    "radial_divergence_oracle",
]
