"""Correspondence-free alignment of two sets of 3D rotations.

Each rotation set is split into three point sets on the unit sphere (the
rows of the rotation matrices, "TBVs").  A global rotation between the sets
shows up as one common rotation of all three point patterns, which sphere
matchers recover without knowing which sample pairs with which.
"""

from ._accel import BACKEND, USING_NUMBA
from .align import (
    AlignmentConfig,
    GlobalAlignment,
    align,
    align_axis_consistent,
    align_pasi,
    alignment_objective,
    apply_alignment,
    fuse,
    procrustes_refine,
)
from .errors import (
    AllHypothesesDegenerate,
    DegenerateMatrix,
    DegenerateMean,
    EmptyFile,
    EmptyPairing,
    EmptySet,
    InvalidMapping,
    MismatchedBins,
    MissingTimestamps,
    NonConvergent,
    NonUnitQuaternion,
    ParseError,
    So3AlignError,
)
from .evaluation import ErrorReport, ScalingReport, error_report, pair_by_timestamp, scaling_benchmark
from .io import export_pose_csv, ingest_pose_csv, load_alignment
from .matchers import MatchResult, MatcherConfig, frs, match, spmc, spmc_frs
from .permutations import SignedPermutation, enumerate_signed_permutations, from_mapping, to_mapping
from .rotation import RotationSet, geodesic_angle, mean_rotation, project_to_so3
from .synthesis import CorruptionSpec, ScenarioSpec, corrupt, generate_scenario, plant_global, scenario
from .tbv import TbvTriple, tbvs_from_so3

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "USING_NUMBA",
    "AlignmentConfig",
    "GlobalAlignment",
    "align",
    "align_axis_consistent",
    "align_pasi",
    "alignment_objective",
    "apply_alignment",
    "fuse",
    "procrustes_refine",
    "AllHypothesesDegenerate",
    "DegenerateMatrix",
    "DegenerateMean",
    "EmptyFile",
    "EmptyPairing",
    "EmptySet",
    "InvalidMapping",
    "MismatchedBins",
    "MissingTimestamps",
    "NonConvergent",
    "NonUnitQuaternion",
    "ParseError",
    "So3AlignError",
    "ErrorReport",
    "ScalingReport",
    "error_report",
    "pair_by_timestamp",
    "scaling_benchmark",
    "export_pose_csv",
    "ingest_pose_csv",
    "load_alignment",
    "MatchResult",
    "MatcherConfig",
    "frs",
    "match",
    "spmc",
    "spmc_frs",
    "SignedPermutation",
    "enumerate_signed_permutations",
    "from_mapping",
    "to_mapping",
    "RotationSet",
    "geodesic_angle",
    "mean_rotation",
    "project_to_so3",
    "CorruptionSpec",
    "ScenarioSpec",
    "corrupt",
    "generate_scenario",
    "plant_global",
    "scenario",
    "TbvTriple",
    "tbvs_from_so3",
]
