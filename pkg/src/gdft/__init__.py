"""Fourier transforms over finite groups with subgroup reductions and operation counting."""
from .dft import BlockDiagonal, GroupAlgebraElement, OpCounter, convolve, inverse_dft, naive_dft
from .groups import (FiniteGroup, Subgroup, all_subgroups, find_triple, group_from_generators,
                     group_from_named_family, translate_cover)
from .io import group_from_spec
from .planner import PlanConfig, estimate_cost, execute_plan, make_plan
from .reps import IrrepSet, compute_irreps, restriction_plan

__all__ = [
    "BlockDiagonal", "GroupAlgebraElement", "OpCounter", "convolve", "inverse_dft", "naive_dft",
    "FiniteGroup", "Subgroup", "all_subgroups", "find_triple", "group_from_generators", "group_from_named_family",
    "translate_cover", "group_from_spec", "PlanConfig", "estimate_cost", "execute_plan", "make_plan", "IrrepSet",
    "compute_irreps", "restriction_plan",
]
