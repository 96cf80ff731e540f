"""Bifurcation analysis of the FitzHugh-Nagumo canonical system."""

from .vectorfield import (FhnParams, PlanarField, Stage, FieldSample,
                          rotation_determinant, nullclines)
from .odeint import Section, Trajectory, integrate, next_crossing
from .cycles import (LimitCycle, DisplacementSample, Stability, displacement,
                     find_cycles, complete_cycle, cycle_multiplier,
                     parameter_sensitivity, multiplicity, section_through)
from .equilibria import (Equilibrium, EquilibriumKind, EquilibriumLabel,
                         InfiniteSingularity, IndexBalance, finite_equilibria,
                         poincare_index, infinite_singularities, index_balance,
                         hopf_scan)
from .continuation import (Branch, continue_branch, trace_fold_surface,
                           search_cusp, classify_termination, FoldSurfaceSample)
from .separatrix import (SeparatrixBranchSet, LoopDetection, LoopKind,
                         separatrices, splitting_function, find_homoclinic)
from .sweep import SweepConfig, SweepReport, run_sweep
from .search import search_two_cycles, TwoCycleSearchResult

__version__ = "0.1.0"

__all__ = [
    "FhnParams", "PlanarField", "Stage", "FieldSample",
    "rotation_determinant", "nullclines",
    "Section", "Trajectory", "integrate", "next_crossing",
    "LimitCycle", "DisplacementSample", "Stability", "displacement",
    "find_cycles", "complete_cycle", "cycle_multiplier",
    "parameter_sensitivity", "multiplicity", "section_through",
    "Equilibrium", "EquilibriumKind", "EquilibriumLabel",
    "InfiniteSingularity", "IndexBalance", "finite_equilibria",
    "poincare_index", "infinite_singularities", "index_balance", "hopf_scan",
    "Branch", "continue_branch", "trace_fold_surface", "search_cusp",
    "classify_termination", "FoldSurfaceSample",
    "SeparatrixBranchSet", "LoopDetection", "LoopKind", "separatrices",
    "splitting_function", "find_homoclinic",
    "SweepConfig", "SweepReport", "run_sweep",
    "search_two_cycles", "TwoCycleSearchResult",
]
