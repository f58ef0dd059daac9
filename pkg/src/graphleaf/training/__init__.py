"""Training loop, evaluation and metrics."""

from .batching import make_batches
from .metrics import (
    AVERAGING_MODES,
    ClassMetrics,
    ConfusionMatrix,
    MetricBundle,
    metrics_from_confusion,
)
from .reports import CurveRow, curves_to_csv, read_curves, write_curves
from .evaluation import (
    EvalReport,
    Prediction,
    evaluate_model,
    predict_graph,
    predict_graphs,
    predict_image,
)
from .trainer import TrainResult, checkpoint_metadata, train_model

__all__ = [
    "make_batches",
    "AVERAGING_MODES",
    "ClassMetrics",
    "ConfusionMatrix",
    "MetricBundle",
    "metrics_from_confusion",
    "CurveRow",
    "curves_to_csv",
    "read_curves",
    "write_curves",
    "EvalReport",
    "Prediction",
    "evaluate_model",
    "predict_graph",
    "predict_graphs",
    "predict_image",
    "TrainResult",
    "checkpoint_metadata",
    "train_model",
]
