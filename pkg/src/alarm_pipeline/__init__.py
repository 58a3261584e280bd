"""Detector-agnostic alarm pipeline for per-stack fall-classifier scores.

The package turns a stream of per-stack No-Fall probabilities into alarm
events via a trailing gate filter and a threshold, matches those alarms
against annotated fall intervals, reports stack- and alarm-level metrics,
tunes the filter width and threshold under clinical constraints, and can
generate synthetic corpora whose ground truth is known by construction.
"""

from .corpus import (
    FoldAssignment,
    PredictionStream,
    StackConfig,
    StackLabel,
    VideoAnnotation,
    assign_folds,
    label_stack,
    load_annotations,
    load_predictions,
    save_annotations,
    save_predictions,
    stack_label_masks,
    stack_labels,
)
from .errors import (
    CorpusFormatError,
    GenerationError,
    InfeasibleError,
    PipelineError,
)
from .metrics import (
    DEFAULT_BETAS,
    AlarmCounts,
    ConfusionCounts,
    LossParams,
    MetricReport,
    alarm_precision,
    alarm_sensitivity,
    f_beta,
    macro_average,
    precision,
    sensitivity,
    specificity,
    weighted_bce,
)
from .synth import PlantedEvent, SynthCorpus, SynthSpec, generate
from .temporal import (
    AlarmEvent,
    AlarmKind,
    FilterConfig,
    FpOffsetRecord,
    OffsetSummary,
    VideoEvaluation,
    combine,
    evaluate,
    evaluate_video,
    extract_alarms,
    gate_filter,
    identity_filter,
    match_alarms,
    offset_histogram,
    threshold_labels,
    width_to_frames,
)
from .tuning import (
    OptimumResult,
    SweepGrid,
    TuningConstraints,
    TuningResult,
    average_optima,
    baseline_sensitivities,
    default_t_values,
    default_w_values,
    per_database_argmax,
    snap_to_grid,
    sweep,
    tune,
)

__version__ = "0.1.0"

__all__ = [
    "AlarmCounts",
    "AlarmEvent",
    "AlarmKind",
    "ConfusionCounts",
    "CorpusFormatError",
    "DEFAULT_BETAS",
    "FilterConfig",
    "FoldAssignment",
    "FpOffsetRecord",
    "GenerationError",
    "InfeasibleError",
    "LossParams",
    "MetricReport",
    "OffsetSummary",
    "OptimumResult",
    "PipelineError",
    "PlantedEvent",
    "PredictionStream",
    "StackConfig",
    "StackLabel",
    "SweepGrid",
    "SynthCorpus",
    "SynthSpec",
    "TuningConstraints",
    "TuningResult",
    "VideoAnnotation",
    "VideoEvaluation",
    "alarm_precision",
    "alarm_sensitivity",
    "assign_folds",
    "average_optima",
    "baseline_sensitivities",
    "combine",
    "default_t_values",
    "default_w_values",
    "evaluate",
    "evaluate_video",
    "extract_alarms",
    "f_beta",
    "gate_filter",
    "generate",
    "identity_filter",
    "label_stack",
    "load_annotations",
    "load_predictions",
    "macro_average",
    "match_alarms",
    "offset_histogram",
    "per_database_argmax",
    "precision",
    "save_annotations",
    "save_predictions",
    "sensitivity",
    "snap_to_grid",
    "specificity",
    "stack_label_masks",
    "stack_labels",
    "sweep",
    "threshold_labels",
    "tune",
    "weighted_bce",
    "width_to_frames",
]
