"""Evaluation-mode inference: reports and single-image prediction."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import PreprocessConfig
from ..exceptions import InputError
from ..graphs.cache import GraphDataset
from ..graphs.pipeline import image_to_graph
from ..graphs.rag import RegionGraph
from ..models.config import ModelConfig
from ..models.gnn import check_params, model_forward
from ..nn.functional import cross_entropy_per_sample, softmax
from ..nn.optim import ParamSet
from ..nn.tensor import no_grad
from .batching import make_batches
from .metrics import ClassMetrics, ConfusionMatrix, metrics_from_confusion


def predict_graphs(params: ParamSet, cfg: ModelConfig, graphs: Sequence[RegionGraph],
                   batch_size: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """Float64 logits (G, C) and argmax predictions, augmentation off."""
    check_params(params, cfg)
    chunks = []
    with no_grad():
        for batch in make_batches(graphs, batch_size):
            chunks.append(model_forward(batch, params, cfg, training=False).data)
    logits = np.concatenate(chunks, axis=0).astype(np.float64)
    return logits, np.argmax(logits, axis=1)


@dataclass
class EvalReport:
    """Support-weighted metrics, the confusion matrix and the mean test loss."""
    accuracy: float
    precision: float
    recall: float
    f1: float
    average_loss: float
    confusion: ConfusionMatrix
    per_class: List[ClassMetrics]
    macro: Dict[str, float]
    weighted: Dict[str, float]
    averaging: str = 'weighted'
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def num_samples(self) -> int:
        return self.confusion.total

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "average_loss": self.average_loss,
            "averaging": self.averaging,
            "num_samples": self.num_samples,
            "weighted": dict(self.weighted),
            "macro": dict(self.macro),
            "per_class": [
                {"class": c.name, "precision": c.precision, "recall": c.recall,
                 "f1": c.f1, "support": c.support, "undefined": list(c.undefined)}
                for c in self.per_class
            ],
            "confusion_matrix": {
                "class_names": list(self.confusion.class_names),
                "counts": self.confusion.counts.tolist(),
            },
        }
        data.update(self.extras)
        return data


def evaluate_model(params: ParamSet, cfg: ModelConfig, test: GraphDataset,
                   batch_size: int = 32, averaging: str = 'weighted') -> EvalReport:
    """Evaluate without augmentation; ``average_loss`` is the mean per-graph cross-entropy."""
    if len(test) == 0:
        raise InputError("cannot evaluate on an empty test set")
    if cfg.num_classes != test.num_classes:
        raise InputError(f"model predicts {cfg.num_classes} classes but the dataset "
                         f"has {test.num_classes}")
    logits, predicted = predict_graphs(params, cfg, test.graphs, batch_size)
    labels = test.labels
    losses = cross_entropy_per_sample(logits, labels)
    cm = ConfusionMatrix.from_labels(labels, predicted, test.class_names)
    metrics = metrics_from_confusion(cm, averaging)
    return EvalReport(
        accuracy=metrics.accuracy,
        precision=metrics.precision,
        recall=metrics.recall,
        f1=metrics.f1,
        average_loss=float(losses.mean()),
        confusion=cm,
        per_class=metrics.per_class,
        macro=metrics.macro,
        weighted=metrics.weighted,
        averaging=averaging,
    )


@dataclass
class Prediction:
    class_index: int
    class_name: str
    probabilities: List[float]

    def to_dict(self, class_names: Sequence[str]) -> Dict[str, Any]:
        return {
            "class": self.class_name,
            "class_index": self.class_index,
            "probabilities": {name: p for name, p in zip(class_names, self.probabilities)},
        }


def predict_graph(params: ParamSet, cfg: ModelConfig, graph: RegionGraph,
                  class_names: Sequence[str]) -> Prediction:
    if len(class_names) != cfg.num_classes:
        raise InputError(f"{len(class_names)} class names for a {cfg.num_classes}-class model")
    logits, predicted = predict_graphs(params, cfg, [graph])
    probabilities = softmax(logits)[0]
    index = int(predicted[0])
    return Prediction(index, class_names[index], [float(p) for p in probabilities])


def predict_image(path: Union[str, Path], params: ParamSet, cfg: ModelConfig,
                  class_names: Sequence[str],
                  preprocess: Optional[PreprocessConfig] = None) -> Prediction:
    """Class name and probability vector for one image file."""
    graph = image_to_graph(path, 0, preprocess)
    return predict_graph(params, cfg, graph, class_names)
