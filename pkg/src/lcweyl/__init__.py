"""Exact computations with local cohomology of monomial ideals as Weyl-algebra modules."""

from .cech import LCQuery, MonomialIdeal, assemble_window_module, component_dim, parse_ideal, top_lc_oracle, zdegree_status
from .gradedmod import WindowModule, check_generalized_eulerian, koszul_d, koszul_x, shift, torsion
from .theorems import Verdict, default_suite, run_suite
from .weyl import WeylElement, euler, fourier, parse_weyl

__version__ = "0.1.0"

__all__ = [
    "LCQuery",
    "MonomialIdeal",
    "Verdict",
    "WeylElement",
    "WindowModule",
    "assemble_window_module",
    "check_generalized_eulerian",
    "component_dim",
    "default_suite",
    "euler",
    "fourier",
    "koszul_d",
    "koszul_x",
    "parse_ideal",
    "parse_weyl",
    "run_suite",
    "shift",
    "top_lc_oracle",
    "torsion",
    "zdegree_status",
]
