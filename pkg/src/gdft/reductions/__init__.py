from .basic import (PrimeIndexReduction, SingleSubgroupReduction, prime_index_dft, single_subgroup_dft,
                    supported_dft_to_full)
from .labeling import Labeling, LabelingError, ParentMatrix, TargetFormat, build_labeling, build_target_format
from .triple import (IntermediateRep, LiftPlan, SupportError, TripleReduction, build_lift_plan, intermediate_rep,
                     lift_to_g_dft, reconstruct_from_rewrite, sparse_rewrite, triple_subgroup_dft)

__all__ = [
    "PrimeIndexReduction", "SingleSubgroupReduction", "prime_index_dft", "single_subgroup_dft",
    "supported_dft_to_full", "Labeling", "LabelingError", "ParentMatrix", "TargetFormat", "build_labeling",
    "build_target_format", "IntermediateRep", "LiftPlan", "SupportError", "TripleReduction", "build_lift_plan",
    "intermediate_rep", "lift_to_g_dft", "reconstruct_from_rewrite", "sparse_rewrite", "triple_subgroup_dft",
]
