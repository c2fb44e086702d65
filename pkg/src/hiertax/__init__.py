"""Hierarchical clustering of sparse count data by Bayesian marginal likelihood.

Two-stage pipeline: a hard-assignment EM fits a flat multinomial mixture
(with the number of clusters chosen by marginal likelihood), then an
agglomerative pass merges clusters bottom-up, choosing per merge the
feature subset the new subtree models with a single shared distribution.
The same objective scores both stages, so no held-out data is needed.

Numeric hot spots run on a compiled extension when built, with a numpy
fallback selected automatically at import (see ``hiertax.kernel_backend``).
"""
from ._kernels import backend as kernel_backend
from .errors import InputError, InternalError
from .evaluate import Labeling, cut, nmi, node_labels
from .flat import FlatClustering, em_run, init_assignments, root_noise_search, select_k
from .likelihood import (
    flat_log_ml,
    hierarchy_log_ml,
    log_dirichlet_multinomial,
    merge_delta,
)
from .merge import MergeProposal, best_merge, build_hierarchy, eligible_noise, greedy_noise_selection
from .synth import STRUCTURE_1, STRUCTURE_2, GroundTruth, StructureSpec, gen_params, sample
from .types import (
    ClusterStats,
    Dendrogram,
    FeaturePartition,
    HierarchyNode,
    Lexicon,
    MergeRecord,
    ModelConfig,
    SparseDocMatrix,
    add_stats,
    project,
    stats_from_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterStats",
    "Dendrogram",
    "FeaturePartition",
    "FlatClustering",
    "GroundTruth",
    "HierarchyNode",
    "InputError",
    "InternalError",
    "Labeling",
    "Lexicon",
    "MergeProposal",
    "MergeRecord",
    "ModelConfig",
    "STRUCTURE_1",
    "STRUCTURE_2",
    "SparseDocMatrix",
    "StructureSpec",
    "add_stats",
    "best_merge",
    "build_hierarchy",
    "cut",
    "eligible_noise",
    "em_run",
    "flat_log_ml",
    "gen_params",
    "greedy_noise_selection",
    "hierarchy_log_ml",
    "init_assignments",
    "kernel_backend",
    "log_dirichlet_multinomial",
    "merge_delta",
    "nmi",
    "node_labels",
    "project",
    "root_noise_search",
    "sample",
    "select_k",
    "stats_from_assignment",
]
