"""Unit tests for batching, the training loop and evaluation."""

import json
import math

import numpy as np
import pytest

from graphleaf.config import RunConfig
from graphleaf.data.synthetic import synthetic_graphs
from graphleaf.exceptions import InputError
from graphleaf.graphs.cache import GraphDataset
from graphleaf.models.config import ModelConfig
from graphleaf.models.gnn import init_params
from graphleaf.nn.checkpoint import load_checkpoint
from graphleaf.training.batching import make_batches
from graphleaf.training.evaluation import evaluate_model, predict_graph, predict_graphs
from graphleaf.training.reports import CurveRow, curves_to_csv, read_curves
from graphleaf.training.trainer import train_model
from graphleaf.utils.output_manager import OutputManager
from graphleaf.utils.random_streams import INIT, SeedStreams

CLASSES = ["healthy", "blight"]


def _datasets(train_size=16, test_size=8, dominance=0.9):
    graphs = synthetic_graphs(train_size + test_size, seed=7, dominance=dominance)
    return (GraphDataset(graphs[:train_size], CLASSES, "train"),
            GraphDataset(graphs[train_size:], CLASSES, "test"))


def _run_config(epochs=3, lr=0.01, edge_aug_p=0.5, seed=0, variant='hybrid', hidden_dim=8):
    model = ModelConfig(variant=variant, num_classes=2, hidden_dim=hidden_dim, heads=2,
                        edge_aug_p=edge_aug_p)
    return RunConfig(model=model, epochs=epochs, batch_size=4, lr=lr, seed=seed)


class TestMakeBatches:
    def test_last_batch_is_short(self):
        batches = make_batches(synthetic_graphs(70), batch_size=32)
        assert [b.num_graphs for b in batches] == [32, 32, 6]

    def test_unshuffled_order(self):
        graphs = synthetic_graphs(5, num_classes=3)
        batches = make_batches(graphs, batch_size=2)
        labels = np.concatenate([b.labels for b in batches])
        np.testing.assert_array_equal(labels, [g.label for g in graphs])
        assert batches[1].node_offsets[1] == graphs[2].num_nodes

    def test_same_seed_same_batches(self):
        graphs = synthetic_graphs(20, num_classes=4)
        a = make_batches(graphs, 6, shuffle=True, seed=3)
        b = make_batches(graphs, 6, shuffle=True, seed=3)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.node_features, y.node_features)
            np.testing.assert_array_equal(x.edges, y.edges)

    def test_shuffle_covers_every_graph_once(self):
        graphs = synthetic_graphs(20)
        batches = make_batches(graphs, 6, shuffle=True, seed=np.random.default_rng(0))
        assert sum(b.num_graphs for b in batches) == 20
        total_nodes = sum(b.num_nodes for b in batches)
        assert total_nodes == sum(g.num_nodes for g in graphs)

    def test_empty(self):
        assert make_batches([], 8) == []

    def test_invalid_batch_size(self):
        with pytest.raises(InputError):
            make_batches(synthetic_graphs(2), 0)


class TestTrainModel:
    """The epoch loop, its randomness and its outputs."""

    def test_zero_learning_rate_keeps_initial_parameters(self):
        train, test = _datasets()
        cfg = _run_config(epochs=2, lr=0.0)
        result = train_model(cfg, train, test)
        initial = init_params(cfg.model, SeedStreams(cfg.seed).generator(INIT))
        for name, tensor in initial.items():
            np.testing.assert_array_equal(result.params[name].data, tensor.data)

    def test_overfits_small_training_set(self):
        train, _ = _datasets(train_size=16, test_size=4)
        empty = GraphDataset([], CLASSES, "test")
        cfg = _run_config(epochs=100, lr=0.005, hidden_dim=64)
        result = train_model(cfg, train, empty)
        _, predicted = predict_graphs(result.params, cfg.model, train.graphs)
        assert np.mean(predicted == train.labels) == 1.0

    def test_same_seed_same_run(self):
        train, test = _datasets()
        a = train_model(_run_config(seed=5), train, test)
        b = train_model(_run_config(seed=5), train, test)
        assert a.curves == b.curves
        assert a.params.state_equal(b.params)

    def test_different_seed_different_run(self):
        train, test = _datasets()
        a = train_model(_run_config(seed=1), train, test)
        b = train_model(_run_config(seed=2), train, test)
        assert not a.params.state_equal(b.params)

    def test_loss_decreases_without_augmentation(self):
        train, test = _datasets()
        result = train_model(_run_config(epochs=10, lr=0.001, edge_aug_p=0.0, hidden_dim=64),
                             train, test)
        assert result.curves[-1].train_loss < result.curves[0].train_loss

    @pytest.mark.parametrize("variant", ["gcn", "gat"])
    def test_other_variants_train(self, variant):
        train, test = _datasets()
        result = train_model(_run_config(epochs=2, variant=variant), train, test)
        assert all(math.isfinite(row.train_loss) for row in result.curves)

    def test_without_test_set(self):
        train, _ = _datasets()
        result = train_model(_run_config(epochs=2), train, GraphDataset([], CLASSES, "test"))
        assert all(math.isnan(row.test_acc) for row in result.curves)
        assert result.best_epoch in (1, 2)

    def test_class_count_mismatch(self):
        train, test = _datasets()
        cfg = _run_config()
        cfg.model.num_classes = 3
        with pytest.raises(InputError):
            train_model(cfg, train, test)

    def test_class_names_must_agree(self):
        train, test = _datasets()
        other = GraphDataset(test.graphs, ["healthy", "rust"], "test")
        with pytest.raises(InputError):
            train_model(_run_config(), train, other)

    def test_empty_training_set(self):
        _, test = _datasets()
        with pytest.raises(InputError):
            train_model(_run_config(), GraphDataset([], CLASSES, "train"), test)

    def test_run_directory(self, tmp_path):
        train, test = _datasets()
        output = OutputManager(tmp_path / "run")
        result = train_model(_run_config(epochs=3), train, test, output)

        rows = read_curves(output.curves_path)
        assert [row.epoch for row in rows] == [1, 2, 3]
        assert rows[-1].test_acc == pytest.approx(result.curves[-1].test_acc, abs=1e-8)

        params, metadata = load_checkpoint(output.final_checkpoint_path)
        assert params.state_equal(result.params)
        assert metadata["kind"] == "final"
        assert metadata["class_names"] == CLASSES
        _, best_metadata = load_checkpoint(output.best_checkpoint_path)
        assert best_metadata["epoch"] == result.best_epoch

        report = json.loads(output.report_path.read_text())
        assert report["num_samples"] == len(test)
        assert report["config"]["epochs"] == 3
        assert report["accuracy"] == pytest.approx(result.curves[-1].test_acc)
        assert output.confusion_path.read_text().startswith("true\\predicted,healthy,blight")
        assert json.loads(output.config_path.read_text())["model"]["variant"] == "hybrid"


class TestEvaluation:
    @pytest.fixture
    def trained(self):
        train, test = _datasets()
        cfg = _run_config(epochs=3)
        return train_model(cfg, train, test).params, cfg.model, test

    def test_average_loss_is_mean_cross_entropy(self, trained):
        params, model_cfg, test = trained
        report = evaluate_model(params, model_cfg, test)
        logits, _ = predict_graphs(params, model_cfg, test.graphs)
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        expected = -log_probs[np.arange(len(test)), test.labels].mean()
        assert report.average_loss == pytest.approx(expected, rel=1e-9)

    def test_confusion_counts_every_graph(self, trained):
        params, model_cfg, test = trained
        report = evaluate_model(params, model_cfg, test, batch_size=3)
        assert report.confusion.total == len(test)
        np.testing.assert_array_equal(report.confusion.counts.sum(axis=1),
                                      np.bincount(test.labels, minlength=2))

    def test_batch_size_does_not_change_results(self, trained):
        params, model_cfg, test = trained
        a = evaluate_model(params, model_cfg, test, batch_size=1)
        b = evaluate_model(params, model_cfg, test, batch_size=32)
        np.testing.assert_array_equal(a.confusion.counts, b.confusion.counts)
        assert a.average_loss == pytest.approx(b.average_loss, rel=1e-5)

    def test_report_dict(self, trained):
        params, model_cfg, test = trained
        data = evaluate_model(params, model_cfg, test).to_dict()
        assert set(data) >= {"accuracy", "precision", "recall", "f1", "average_loss",
                             "confusion_matrix", "per_class", "macro", "weighted"}
        assert json.loads(json.dumps(data)) == data

    def test_empty_test_set(self, trained):
        params, model_cfg, _ = trained
        with pytest.raises(InputError):
            evaluate_model(params, model_cfg, GraphDataset([], CLASSES, "test"))

    def test_single_graph_prediction(self, trained):
        params, model_cfg, test = trained
        prediction = predict_graph(params, model_cfg, test.graphs[0], CLASSES)
        assert sum(prediction.probabilities) == pytest.approx(1.0)
        assert prediction.class_name == CLASSES[prediction.class_index]
        data = prediction.to_dict(CLASSES)
        assert set(data["probabilities"]) == set(CLASSES)


class TestCurves:
    def test_csv_layout(self):
        text = curves_to_csv([CurveRow(1, 0.5, 0.75, math.nan, math.nan),
                              CurveRow(2, 0.25, 1.0, 0.125, 0.5)])
        assert text == ("epoch,train_loss,train_acc,test_loss,test_acc\n"
                        "1,0.50000000,0.75000000,nan,nan\n"
                        "2,0.25000000,1.00000000,0.12500000,0.50000000\n")
