"""Deterministic prototype-memory mining on a synthetic two-domain benchmark.

The package keeps a per-class memory bank whose rows are blended under a
cosine-gated momentum rule, mines likely-novel samples from unlabeled
pools with a shell-contrast score, assigns labels to unlabeled target
features from auxiliary prototype pairs, and trains a linear softmax
probe on the results. A small simulator provides labeled geometry for
experiments, and the metrics module grades open-set predictions.
"""

from .assignment import (
    AssignmentScores,
    build_assignment_scores,
    filter_foreground,
    update_prototypes_from_target,
)
from .bank import (
    MemoryBank,
    init_bank,
    load_snapshot,
    momentum_blend,
    novel_slot_consistent,
    refresh_novel_from_base,
    snapshot,
    update_base_class,
)
from .clustering import Clustering, cluster_of_point, kmeans
from .errors import ProtomineError
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    MetricRow,
    SimulatorParams,
    compute_baseline,
    config_from_json,
    config_to_json,
    derive_seed,
    rows_to_csv,
    run_experiment,
)
from .metrics import MetricReport, collapse_novel, confusion, evaluate, selection_metrics
from .numerics import cosine_similarity, euclidean_distance, mean_vector, std_vector
from .probe import ProbeClassifier, batch_loss, init_probe, predict_labels, sgd_step
from .selection import (
    CandidateScores,
    Selection,
    build_candidate_scores,
    farthest_partner,
    select_topk,
    shell_contrast,
    update_novel_memory,
)
from .simulator import SOURCE, TARGET, DomainSpec, LabeledBatch, make_spec, sample_batch

__version__ = "0.1.0"

__all__ = [
    "AssignmentScores",
    "CandidateScores",
    "Clustering",
    "DomainSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "LabeledBatch",
    "MemoryBank",
    "MetricReport",
    "MetricRow",
    "ProbeClassifier",
    "ProtomineError",
    "SOURCE",
    "Selection",
    "SimulatorParams",
    "TARGET",
    "build_assignment_scores",
    "build_candidate_scores",
    "batch_loss",
    "cluster_of_point",
    "collapse_novel",
    "compute_baseline",
    "config_from_json",
    "config_to_json",
    "confusion",
    "cosine_similarity",
    "derive_seed",
    "euclidean_distance",
    "evaluate",
    "farthest_partner",
    "filter_foreground",
    "init_bank",
    "init_probe",
    "kmeans",
    "load_snapshot",
    "make_spec",
    "mean_vector",
    "momentum_blend",
    "novel_slot_consistent",
    "predict_labels",
    "refresh_novel_from_base",
    "rows_to_csv",
    "run_experiment",
    "sample_batch",
    "select_topk",
    "selection_metrics",
    "sgd_step",
    "shell_contrast",
    "snapshot",
    "std_vector",
    "update_base_class",
    "update_novel_memory",
    "update_prototypes_from_target",
    "__version__",
]
