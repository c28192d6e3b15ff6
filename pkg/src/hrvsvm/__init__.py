"""Time-domain HRV features and a Gaussian-kernel SVM for stress/influenza screening."""

from ._accel import backend_name
from .ingest import (
    HrSeries,
    RrSeries,
    SessionRecord,
    parse_hr_file,
    parse_rr_file,
    parse_session_manifest,
)
from .metrics import (
    HrvMetrics,
    compute_metrics,
    filter_ectopic,
    hr_from_ibi,
    ibi_from_beats,
    ibi_from_hr,
)
from .pipeline import (
    INFLUENZA,
    STRESS,
    EvaluationReport,
    Task,
    TrainConfig,
    evaluate,
    extract_features,
    label_for,
    load_model,
    save_model,
    train,
)
from .svm import (
    DualSolution,
    KernelSpec,
    Model,
    TrainingSet,
    classify,
    compute_bias,
    decision_value,
    gram_matrix,
    kernel_eval,
    linear_margin,
    solve_dual,
)

__version__ = "0.1.0"
