"""Curve, report and confusion-matrix files."""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

from ..utils.file_utils import atomic_write_text
from .metrics import ConfusionMatrix

CURVE_HEADER = ("epoch", "train_loss", "train_acc", "test_loss", "test_acc")


@dataclass(frozen=True)
class CurveRow:
    epoch: int
    train_loss: float
    train_acc: float
    test_loss: float
    test_acc: float


def _format_value(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.8f}"


def curves_to_csv(rows: Sequence[CurveRow]) -> str:
    lines = [",".join(CURVE_HEADER)]
    for row in rows:
        lines.append(",".join([str(row.epoch)] + [
            _format_value(v) for v in (row.train_loss, row.train_acc,
                                       row.test_loss, row.test_acc)]))
    return "\n".join(lines) + "\n"


def write_curves(rows: Sequence[CurveRow], path: Union[str, Path]) -> None:
    atomic_write_text(path, curves_to_csv(rows))


def read_curves(path: Union[str, Path]) -> List[CurveRow]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = []
    for line in lines[1:]:
        epoch, *values = line.split(",")
        rows.append(CurveRow(int(epoch), *(float(v) for v in values)))
    return rows


def write_report(report: Dict[str, Any], path: Union[str, Path]) -> None:
    atomic_write_text(path, json.dumps(report, indent=2, sort_keys=True) + "\n")


def write_confusion(cm: ConfusionMatrix, path: Union[str, Path]) -> None:
    atomic_write_text(path, cm.to_csv())
