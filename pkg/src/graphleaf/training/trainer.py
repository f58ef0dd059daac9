"""The training loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..config import ConfigManager, RunConfig
from ..exceptions import InputError, NumericError
from ..graphs.cache import GraphDataset
from ..models.gnn import init_params, model_forward
from ..nn.checkpoint import save_checkpoint
from ..nn.functional import cross_entropy_per_sample, softmax_cross_entropy
from ..nn.optim import Adam, ParamSet
from ..utils.output_manager import OutputManager
from ..utils.performance import Timer
from ..utils.random_streams import AUGMENT, INIT, SHUFFLE, SeedStreams
from .batching import make_batches
from .evaluation import evaluate_model, predict_graphs
from .reports import CurveRow, write_confusion, write_curves, write_report

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    """Final and best-test-accuracy parameters with the per-epoch curves."""
    params: ParamSet
    best_params: ParamSet
    curves: List[CurveRow] = field(default_factory=list)
    best_epoch: int = 0
    wall_time: float = 0.0


def checkpoint_metadata(cfg: RunConfig, class_names: List[str], epoch: int,
                        kind: str) -> dict:
    return {
        "kind": kind,
        "epoch": epoch,
        "seed": cfg.seed,
        "class_names": list(class_names),
        "model": cfg.model.to_dict(),
        "preprocess": cfg.preprocess,
    }


def _test_curve(params: ParamSet, cfg: RunConfig, test: GraphDataset):
    if len(test) == 0:
        return math.nan, math.nan
    logits, predicted = predict_graphs(params, cfg.model, test.graphs, cfg.batch_size)
    labels = test.labels
    return (float(cross_entropy_per_sample(logits, labels).mean()),
            float(np.mean(predicted == labels)))


def train_model(cfg: RunConfig, train: GraphDataset, test: GraphDataset,
                output: Optional[OutputManager] = None) -> TrainResult:
    """Train ``cfg.model`` on ``train``, tracking test loss/accuracy every epoch.

    Randomness comes from named substreams of ``cfg.seed`` (init, shuffle,
    augment). When ``output`` is given, the run directory receives the
    effective config, the curves, the final and best checkpoints and the
    final model's test report.
    """
    cfg.validate()
    if list(train.class_names) != list(test.class_names):
        raise InputError("train and test datasets have different class names")
    if cfg.model.num_classes != train.num_classes:
        raise InputError(f"model has {cfg.model.num_classes} classes but the dataset "
                         f"has {train.num_classes}")
    if len(train) == 0:
        raise InputError("training set is empty")

    if output is not None:
        output.initialize_output_structure()
        ConfigManager.save_config(cfg, output.config_path)

    streams = SeedStreams(cfg.seed)
    params = init_params(cfg.model, streams.generator(INIT))
    shuffle_rng = streams.generator(SHUFFLE)
    augment_rng = streams.generator(AUGMENT)
    optimizer = Adam(params, lr=cfg.lr)

    curves: List[CurveRow] = []
    best_params = params.copy()
    best_epoch, best_score = 0, -math.inf

    with Timer() as run_timer:
        for epoch in range(1, cfg.epochs + 1):
            with Timer() as epoch_timer:
                loss_sum, correct, seen = 0.0, 0, 0
                for b, batch in enumerate(make_batches(train.graphs, cfg.batch_size,
                                                       shuffle=True, seed=shuffle_rng)):
                    optimizer.zero_grad()
                    logits = model_forward(batch, params, cfg.model, True, augment_rng)
                    loss = softmax_cross_entropy(logits, batch.labels)
                    value = loss.item()
                    if not math.isfinite(value):
                        raise NumericError(f"non-finite loss {value} at epoch {epoch}, batch {b}")
                    loss.backward()
                    optimizer.step()
                    loss_sum += value * batch.num_graphs
                    correct += int(np.sum(np.argmax(logits.data, axis=1) == batch.labels))
                    seen += batch.num_graphs

                row = CurveRow(epoch, loss_sum / seen, correct / seen,
                               *_test_curve(params, cfg, test))
                curves.append(row)

            score = row.test_acc if len(test) else row.train_acc
            if score > best_score:
                best_score, best_epoch = score, epoch
                best_params = params.copy()

            logger.info(f"epoch {epoch}/{cfg.epochs}: train_loss={row.train_loss:.4f} "
                        f"train_acc={row.train_acc:.4f} test_loss={row.test_loss:.4f} "
                        f"test_acc={row.test_acc:.4f} ({epoch_timer.get_elapsed():.2f}s)")

    result = TrainResult(params, best_params, curves, best_epoch, run_timer.get_elapsed())
    logger.info(f"Training finished in {result.wall_time:.1f}s; best epoch {best_epoch}")

    if output is not None:
        _write_run_outputs(cfg, train, test, result, output)
    return result


def _write_run_outputs(cfg: RunConfig, train: GraphDataset, test: GraphDataset,
                       result: TrainResult, output: OutputManager) -> None:
    write_curves(result.curves, output.curves_path)
    save_checkpoint(output.final_checkpoint_path, result.params,
                    checkpoint_metadata(cfg, train.class_names, cfg.epochs, "final"))
    save_checkpoint(output.best_checkpoint_path, result.best_params,
                    checkpoint_metadata(cfg, train.class_names, result.best_epoch, "best"))
    if len(test):
        report = evaluate_model(result.params, cfg.model, test, cfg.batch_size)
        report.extras.update({
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "wall_time": result.wall_time,
            "best_epoch": result.best_epoch,
        })
        write_report(report.to_dict(), output.report_path)
        write_confusion(report.confusion, output.confusion_path)
    logger.info(f"Run outputs written to {output.base_output_dir}")
