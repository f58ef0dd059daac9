"""Confusion matrices and one-vs-rest classification metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from ..exceptions import InputError
from ..utils.validation import validate_choice

AVERAGING_MODES = ('weighted', 'macro')


@dataclass(eq=False)
class ConfusionMatrix:
    """C x C counts; rows are the true class, columns the predicted class."""

    counts: np.ndarray
    class_names: List[str]

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InputError(f"confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] != len(self.class_names):
            raise InputError(f"{counts.shape[0]} rows but {len(self.class_names)} class names")
        if np.any(counts < 0):
            raise InputError("confusion counts must be non-negative")
        self.counts = counts.astype(np.int64)

    @classmethod
    def from_labels(cls, true: Sequence[int], predicted: Sequence[int],
                    class_names: Sequence[str]) -> "ConfusionMatrix":
        true = np.asarray(true, dtype=np.int64)
        predicted = np.asarray(predicted, dtype=np.int64)
        if true.shape != predicted.shape:
            raise InputError("true and predicted label lists differ in length")
        c = len(class_names)
        for labels in (true, predicted):
            if labels.size and (labels.min() < 0 or labels.max() >= c):
                raise InputError(f"label out of range for {c} classes")
        counts = np.bincount(true * c + predicted, minlength=c * c).reshape(c, c)
        return cls(counts, list(class_names))

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        """Header row of predicted class names; each row starts with the true class."""
        lines = [",".join(["true\\predicted"] + list(self.class_names))]
        for name, row in zip(self.class_names, self.counts):
            lines.append(",".join([name] + [str(int(v)) for v in row]))
        return "\n".join(lines) + "\n"


@dataclass
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f1: float
    support: int
    # Metrics whose denominator was zero and were reported as 0.
    undefined: List[str] = field(default_factory=list)


@dataclass
class MetricBundle:
    """Accuracy plus precision/recall/F1 averaged as ``averaging`` says.

    Both the support-weighted and the macro averages are kept.
    """
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str
    weighted: Dict[str, float]
    macro: Dict[str, float]
    per_class: List[ClassMetrics]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _ratio(num: float, den: float):
    return (num / den, False) if den > 0 else (0.0, True)


def metrics_from_confusion(cm: ConfusionMatrix, averaging: str = 'weighted') -> MetricBundle:
    """Per-class precision, recall and F1 with weighted and macro averages.

    A zero denominator yields 0 and is listed in ``ClassMetrics.undefined``.
    """
    validate_choice(averaging, AVERAGING_MODES, "averaging")
    total = cm.total
    if total <= 0:
        raise InputError("confusion matrix is empty")

    counts = cm.counts
    tp = np.diag(counts).astype(np.float64)
    support = counts.sum(axis=1).astype(np.float64)
    predicted = counts.sum(axis=0).astype(np.float64)

    per_class = []
    for i, name in enumerate(cm.class_names):
        precision, p_undef = _ratio(tp[i], predicted[i])
        recall, r_undef = _ratio(tp[i], support[i])
        f1, f_undef = _ratio(2.0 * precision * recall, precision + recall)
        undefined = [m for m, flag in (('precision', p_undef), ('recall', r_undef),
                                       ('f1', f_undef)) if flag]
        per_class.append(ClassMetrics(name, precision, recall, f1, int(support[i]), undefined))

    weights = support / total
    weighted = {m: float(sum(w * getattr(c, m) for w, c in zip(weights, per_class)))
                for m in ('precision', 'recall', 'f1')}
    macro = {m: float(np.mean([getattr(c, m) for c in per_class]))
             for m in ('precision', 'recall', 'f1')}
    chosen = weighted if averaging == 'weighted' else macro
    return MetricBundle(
        accuracy=float(tp.sum() / total),
        precision=chosen['precision'],
        recall=chosen['recall'],
        f1=chosen['f1'],
        averaging=averaging,
        weighted=weighted,
        macro=macro,
        per_class=per_class,
    )
