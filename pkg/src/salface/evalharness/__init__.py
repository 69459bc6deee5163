"""Manifests, subject-exclusive folds, metrics, and pipeline experiments."""

from .augmentation import augment
from .experiment import (
    AblationReport,
    ExperimentConfig,
    PipelineConfig,
    Report,
    evaluate,
    run_experiment,
    run_ratio_ablation,
    write_ablation_report,
    write_report,
)
from .folds import FoldPlan, make_folds
from .manifest import TASK_CLASSES, ManifestRecord, load_manifest
from .metrics import (
    accuracy_from_confusion,
    class_weights,
    class_weights_from_counts,
    confusion_matrix,
)
from . import reference, synthetic

__all__ = [
    "TASK_CLASSES",
    "ManifestRecord",
    "load_manifest",
    "FoldPlan",
    "make_folds",
    "augment",
    "confusion_matrix",
    "accuracy_from_confusion",
    "class_weights",
    "class_weights_from_counts",
    "PipelineConfig",
    "ExperimentConfig",
    "Report",
    "AblationReport",
    "evaluate",
    "run_experiment",
    "run_ratio_ablation",
    "write_report",
    "write_ablation_report",
    "reference",
    "synthetic",
]
