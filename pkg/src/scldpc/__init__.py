"""Girth-conditioned spatially coupled QC-LDPC construction.

Builds quasi-cyclic spatially coupled LDPC codes whose short cycles are
removed by resampling (a constructive Lovász local lemma argument), with
exact activation probabilities, feasibility thresholds, and an experiment
harness that measures how far the resampler's output distribution drifts
from independent sampling.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (Assignment, BaseCode, CodeInstance, CouplingScheme,
                    SparseBinaryMatrix, assemble_protograph, assemble_qc)
from .alist import export_alist, parse_alist
from .serialize import export_instance_json, import_instance_json
from .walks import (CandidateSet, WalkCandidate, dependency_degree,
                    dependency_pairs, enumerate_cycles, harmful_weight,
                    is_active_lift, is_active_partition)
from .graphs import classify_absorbing_set, girth, tanner_has_4cycle
from .probability import (ActivationProbability, HarmfulStructure,
                          joint_prob, lift_prob_bound, lift_prob_exact,
                          mc_structure_prob, probability_report,
                          spreading_prob_c4_uniform, spreading_prob_exact,
                          structure_joint_prob)
from .bounds import (COROLLARY4_CAP, BoundReport, CliqueCover,
                     Corollary1Report, Corollary4Bound, Lemma2Report,
                     SymmetricShiftBound, Thresholds,
                     build_base_edge_cover, build_pairwise_cover,
                     c4_block_dims, corollary1_check, corollary1_min_m,
                     corollary1_min_z, corollary4_bound, lemma2_evaluate,
                     formula_delta_c4, shift_bound_asymmetric,
                     shift_bound_symmetric, theorem1_feasibility,
                     theorem1_thresholds, theorem2_resample_bound,
                     threshold_branch_i, threshold_branch_ii, verify_cover)
from .moser_tardos import (AdmissionError, MTTrace, TwoStageReport,
                           construct_two_stage, default_cap,
                           derive_child_seeds, run_joint,
                           run_stage_lift, run_stage_partition)
from .experiments import (Z95, Z99_ONE_SIDED, BaselineReport,
                          ExperimentConfig, ExperimentStats, StructureSpec,
                          Theorem2Report, estimate_baseline,
                          estimate_mt_shift, sweep, verify_theorem2,
                          wilson_interval)

__all__ = [
    "__version__",
    "Assignment", "BaseCode", "CodeInstance", "CouplingScheme",
    "SparseBinaryMatrix", "assemble_protograph", "assemble_qc",
    "export_alist", "parse_alist",
    "export_instance_json", "import_instance_json",
    "CandidateSet", "WalkCandidate", "dependency_degree",
    "dependency_pairs", "enumerate_cycles", "harmful_weight",
    "is_active_lift", "is_active_partition",
    "classify_absorbing_set", "girth", "tanner_has_4cycle",
    "ActivationProbability", "HarmfulStructure", "joint_prob",
    "lift_prob_bound", "lift_prob_exact", "mc_structure_prob",
    "probability_report", "spreading_prob_c4_uniform",
    "spreading_prob_exact", "structure_joint_prob",
    "COROLLARY4_CAP", "BoundReport", "CliqueCover", "Corollary1Report",
    "Corollary4Bound", "Lemma2Report", "SymmetricShiftBound", "Thresholds",
    "build_base_edge_cover", "build_pairwise_cover", "c4_block_dims",
    "corollary1_check", "corollary1_min_m", "corollary1_min_z",
    "corollary4_bound", "lemma2_evaluate", "formula_delta_c4",
    "shift_bound_asymmetric", "shift_bound_symmetric",
    "theorem1_feasibility", "theorem1_thresholds",
    "theorem2_resample_bound", "threshold_branch_i", "threshold_branch_ii",
    "verify_cover",
    "AdmissionError", "MTTrace", "TwoStageReport", "construct_two_stage",
    "default_cap", "derive_child_seeds", "run_joint", "run_stage_lift",
    "run_stage_partition",
    "BaselineReport", "ExperimentConfig", "ExperimentStats",
    "StructureSpec", "Theorem2Report", "estimate_baseline",
    "estimate_mt_shift", "sweep", "verify_theorem2", "wilson_interval",
    "Z95", "Z99_ONE_SIDED",
]
