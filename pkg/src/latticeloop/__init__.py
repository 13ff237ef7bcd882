"""Exact large-N lattice Yang-Mills Wilson loop expectations as sums over planar embedded maps."""

from .assignments import PlaquetteAssignment, enumerate_balanced_assignments, is_ell_connected
from .enumerator import BudgetExceeded, enumerate_class, enumerate_gluings, surface_sum, verify_pps
from .lattice import OrientedEdge, OrientedPlaquette, plaquettes_containing
from .loops import Loop, LoopParseError, StringOfLoops, canonicalize, erase_backtracks
from .maps import EmbeddedMap, blue_weight, is_non_separable, weight_infinity
from .solver import BetaSeries, MemoTable, Solver, phi_eval, phi_K, phi_K_string, phi_series, verify_mle

__all__ = [
    "BetaSeries",
    "BudgetExceeded",
    "EmbeddedMap",
    "Loop",
    "LoopParseError",
    "MemoTable",
    "OrientedEdge",
    "OrientedPlaquette",
    "PlaquetteAssignment",
    "Solver",
    "StringOfLoops",
    "blue_weight",
    "canonicalize",
    "enumerate_balanced_assignments",
    "enumerate_class",
    "enumerate_gluings",
    "erase_backtracks",
    "is_ell_connected",
    "is_non_separable",
    "phi_K",
    "phi_K_string",
    "phi_eval",
    "phi_series",
    "plaquettes_containing",
    "surface_sum",
    "verify_mle",
    "verify_pps",
    "weight_infinity",
]
