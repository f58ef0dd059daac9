"""Integration tests for the CLI."""

import json

import numpy as np
import pytest

from graphleaf.cli import GraphLeafCLI, cache_pair
from graphleaf.data.synthetic import generate_synthetic_corpus
from graphleaf.exceptions import NumericError
from graphleaf.graphs.cache import read_cache
from graphleaf.models.config import ModelConfig
from graphleaf.models.gnn import init_params
from graphleaf.nn.checkpoint import load_checkpoint, save_checkpoint
from graphleaf.training.evaluation import Prediction, evaluate_model
from graphleaf.utils.random_streams import INIT, SeedStreams

TRAIN_FLAGS = ['--epochs', '3', '--batch', '4', '--hidden-dim', '8', '--heads', '2']


class TestCLIIntegration:
    """Preprocess, train, evaluate, predict and inspect through ``GraphLeafCLI.run``."""

    @pytest.fixture
    def cli(self):
        """Create CLI instance."""
        return GraphLeafCLI()

    @pytest.fixture
    def prefix(self, cli, tmp_path, monkeypatch):
        """Cache prefix of a preprocessed two-class corpus of 12 small images."""
        monkeypatch.setenv("GRAPHLEAF_THREADS", "2")
        corpus = generate_synthetic_corpus(tmp_path / "corpus", num_classes=2, per_class=6,
                                           size=32, seed=0)
        prefix = tmp_path / "cache" / "leaves"
        code = cli.run(['preprocess', '--data', str(corpus), '--out', str(prefix),
                        '--split', '0.5', '--segments', '10', '--image-size', '32'])
        assert code == 0
        return prefix

    @pytest.fixture
    def run_dir(self, cli, prefix, tmp_path):
        out = tmp_path / "run"
        assert cli.run(['train', '--cache', str(prefix), '--out', str(out)] + TRAIN_FLAGS) == 0
        return out

    def test_no_command_prints_help(self, cli, capsys):
        assert cli.run([]) == 0
        assert "preprocess" in capsys.readouterr().out

    @pytest.mark.parametrize("command, reads_config", [
        ('preprocess', True),
        ('train', True),
        ('evaluate', False),
        ('predict', False),
        ('inspect', False),
    ])
    def test_help(self, cli, command, reads_config, capsys):
        assert cli.run([command, '--help']) == 0
        assert ("--config" in capsys.readouterr().out) == reads_config

    def test_config_flag_only_where_read(self, cli, tmp_path, capsys):
        code = cli.run(['evaluate', '--checkpoint', 'c.glwt', '--cache', 'c.ragc',
                        '--config', str(tmp_path / "settings.json")])
        assert code == 1
        assert "error: usage:" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, cli, capsys):
        assert cli.run(['train', '--dropout', '0.5']) == 1
        assert "error: usage:" in capsys.readouterr().err

    def test_missing_required_values(self, cli):
        assert cli.run(['preprocess', '--data', 'somewhere']) == 1
        assert cli.run(['evaluate', '--cache', 'x.ragc']) == 1

    def test_preprocess_outputs(self, prefix, capsys):
        train_path, test_path = cache_pair(prefix)
        train, test = read_cache(train_path), read_cache(test_path)
        assert (len(train), len(test)) == (6, 6)
        assert train.split_tag == "train" and test.split_tag == "test"
        assert train.class_names == ["class_0", "class_1"]
        for suffix in ("manifest.json", "train.manifest.json", "test.manifest.json"):
            assert prefix.with_name(f"leaves.{suffix}").exists()
        settings = json.loads(prefix.with_name("leaves.preprocess.json").read_text())
        assert settings == {"segments": 10, "compactness": 10.0, "max_iter": 10, "image_size": 32}

    def test_preprocess_missing_corpus(self, cli, tmp_path, capsys):
        code = cli.run(['preprocess', '--data', str(tmp_path / "nowhere"),
                        '--out', str(tmp_path / "p")])
        assert code == 2

    def test_preprocess_bad_split(self, cli, tmp_path):
        code = cli.run(['preprocess', '--data', str(tmp_path), '--out', str(tmp_path / "p"),
                        '--split', '1.0'])
        assert code == 1

    def test_train_writes_run_directory(self, capsys, run_dir):
        for relative in ("config.json", "curves.csv", "checkpoints/final.glwt",
                         "checkpoints/best.glwt", "reports/report.json", "reports/confusion.csv"):
            assert (run_dir / relative).exists()
        lines = (run_dir / "curves.csv").read_text().splitlines()
        assert lines[0] == "epoch,train_loss,train_acc,test_loss,test_acc"
        assert len(lines) == 4
        assert "final test accuracy" in capsys.readouterr().out

    def test_train_is_reproducible(self, cli, prefix, tmp_path):
        for name in ("a", "b"):
            args = ['train', '--cache', str(prefix), '--out', str(tmp_path / name),
                    '--seed', '4'] + TRAIN_FLAGS
            assert cli.run(args) == 0
        assert (tmp_path / "a" / "curves.csv").read_bytes() == \
            (tmp_path / "b" / "curves.csv").read_bytes()
        assert (tmp_path / "a" / "checkpoints" / "final.glwt").read_bytes() == \
            (tmp_path / "b" / "checkpoints" / "final.glwt").read_bytes()

    def test_train_from_config_file(self, cli, prefix, tmp_path):
        config = tmp_path / "train.json"
        config.write_text(json.dumps({"cache": str(prefix), "out": str(tmp_path / "cfg_run"),
                                      "epochs": 2, "batch": 4, "hidden-dim": 8,
                                      "model": "gcn"}))
        assert cli.run(['train', '--config', str(config), '--epochs', '1']) == 0
        saved = json.loads((tmp_path / "cfg_run" / "config.json").read_text())
        assert saved["epochs"] == 1
        assert saved["model"]["variant"] == "gcn"

    def test_zero_learning_rate_keeps_best_and_final_equal(self, cli, prefix, tmp_path):
        out = tmp_path / "frozen"
        assert cli.run(['train', '--cache', str(prefix), '--out', str(out),
                        '--lr', '0'] + TRAIN_FLAGS) == 0
        final, _ = load_checkpoint(out / "checkpoints" / "final.glwt")
        best, _ = load_checkpoint(out / "checkpoints" / "best.glwt")
        for name, tensor in final.items():
            np.testing.assert_array_equal(tensor.data, best[name].data)

    def test_zero_learning_rate_evaluates_like_initial_weights(self, cli, prefix, tmp_path,
                                                              capsys):
        out = tmp_path / "one_epoch"
        assert cli.run(['train', '--cache', str(prefix), '--out', str(out), '--epochs', '1',
                        '--lr', '0', '--hidden-dim', '8', '--batch', '4']) == 0
        capsys.readouterr()
        test_path = cache_pair(prefix)[1]
        assert cli.run(['evaluate', '--checkpoint', str(out / "checkpoints" / "final.glwt"),
                        '--cache', str(test_path)]) == 0
        report = json.loads(capsys.readouterr().out)

        model_cfg = ModelConfig(num_classes=2, hidden_dim=8)
        initial = init_params(model_cfg, SeedStreams(0).generator(INIT))
        expected = evaluate_model(initial, model_cfg, read_cache(test_path))
        assert report["accuracy"] == expected.accuracy
        assert report["average_loss"] == pytest.approx(expected.average_loss, rel=1e-9)
        assert report["confusion_matrix"]["counts"] == expected.confusion.counts.tolist()

    def test_train_missing_cache(self, cli, tmp_path, capsys):
        code = cli.run(['train', '--cache', str(tmp_path / "absent"),
                        '--out', str(tmp_path / "run")])
        assert code == 2
        assert capsys.readouterr().err.startswith("error: ")

    def test_train_without_out(self, cli, prefix):
        assert cli.run(['train', '--cache', str(prefix)]) == 1

    def test_numeric_failure_exit_code(self, cli, prefix, tmp_path, monkeypatch, capsys):
        def explode(*args, **kwargs):
            raise NumericError("non-finite loss nan at epoch 1, batch 0")

        monkeypatch.setattr("graphleaf.cli.train_model", explode)
        code = cli.run(['train', '--cache', str(prefix), '--out', str(tmp_path / "run")])
        assert code == 3
        assert "numeric" in capsys.readouterr().err

    def test_evaluate(self, cli, prefix, run_dir, capsys):
        checkpoint = run_dir / "checkpoints" / "final.glwt"
        capsys.readouterr()
        assert cli.run(['evaluate', '--checkpoint', str(checkpoint),
                        '--cache', str(cache_pair(prefix)[1])]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["num_samples"] == 6
        assert 0.0 <= report["accuracy"] <= 1.0
        assert report["epoch"] == 3
        written = json.loads((run_dir / "checkpoints" / "final.report.json").read_text())
        assert written == report
        training_report = json.loads((run_dir / "reports" / "report.json").read_text())
        assert report["accuracy"] == training_report["accuracy"]

    def test_evaluate_class_mismatch(self, cli, run_dir, tmp_path):
        other = generate_synthetic_corpus(tmp_path / "other", num_classes=3, per_class=2,
                                          size=32, seed=1)
        prefix = tmp_path / "other_cache"
        assert cli.run(['preprocess', '--data', str(other), '--out', str(prefix),
                        '--split', '0.5', '--segments', '10', '--image-size', '32']) == 0
        code = cli.run(['evaluate', '--checkpoint', str(run_dir / "checkpoints" / "final.glwt"),
                        '--cache', str(cache_pair(prefix)[1])])
        assert code == 2

    def test_evaluate_corrupt_checkpoint(self, cli, prefix, tmp_path):
        bad = tmp_path / "bad.glwt"
        bad.write_bytes(b"GLWT\x01\x00garbage")
        code = cli.run(['evaluate', '--checkpoint', str(bad),
                        '--cache', str(cache_pair(prefix)[1])])
        assert code == 2

    def test_predict_black_image(self, cli, run_dir, tmp_path, write_image, capsys):
        image = write_image(tmp_path / "black.png", np.zeros((40, 40, 3), dtype=np.uint8))
        capsys.readouterr()
        code = cli.run(['predict', '--checkpoint', str(run_dir / "checkpoints" / "best.glwt"),
                        '--image', str(image), '--segments', '10'])
        assert code == 0
        prediction = json.loads(capsys.readouterr().out)
        assert prediction["class"] in ("class_0", "class_1")
        assert sum(prediction["probabilities"].values()) == pytest.approx(1.0, abs=1e-6)

    def test_predict_undecodable_image(self, cli, run_dir, tmp_path):
        image = tmp_path / "broken.jpg"
        image.write_bytes(b"not an image")
        code = cli.run(['predict', '--checkpoint', str(run_dir / "checkpoints" / "best.glwt"),
                        '--image', str(image)])
        assert code == 2

    def test_checkpoint_records_graph_settings(self, run_dir):
        _, metadata = load_checkpoint(run_dir / "checkpoints" / "best.glwt")
        assert metadata["preprocess"] == {"segments": 10, "compactness": 10.0,
                                          "max_iter": 10, "image_size": 32}

    @pytest.mark.parametrize("flags, expected", [
        ([], (10, 10.0, 10, 32)),
        (['--max-iter', '3'], (10, 10.0, 3, 32)),
        (['--segments', '20', '--image-size', '40'], (20, 10.0, 10, 40)),
    ])
    def test_predict_repeats_cache_settings(self, cli, run_dir, tmp_path, write_image,
                                            monkeypatch, flags, expected):
        seen = []

        def fake_predict(path, params, cfg, class_names, preprocess):
            seen.append(preprocess)
            return Prediction(0, class_names[0], [1.0, 0.0])

        monkeypatch.setattr("graphleaf.cli.predict_image", fake_predict)
        image = write_image(tmp_path / "leaf.png", np.zeros((40, 40, 3), dtype=np.uint8))
        code = cli.run(['predict', '--checkpoint', str(run_dir / "checkpoints" / "best.glwt"),
                        '--image', str(image)] + flags)
        assert code == 0
        cfg = seen[0]
        assert (cfg.segments, cfg.compactness, cfg.max_iter, cfg.image_size) == expected

    def test_predict_invalid_setting(self, cli, run_dir, tmp_path, write_image):
        image = write_image(tmp_path / "leaf.png", np.zeros((40, 40, 3), dtype=np.uint8))
        code = cli.run(['predict', '--checkpoint', str(run_dir / "checkpoints" / "best.glwt"),
                        '--image', str(image), '--max-iter', '0'])
        assert code == 1

    def test_checkpoint_without_model_metadata(self, cli, prefix, tmp_path):
        model_cfg = ModelConfig(num_classes=2, hidden_dim=8)
        bare = tmp_path / "bare.glwt"
        save_checkpoint(bare, init_params(model_cfg, np.random.default_rng(0)), {"epoch": 1})
        code = cli.run(['evaluate', '--checkpoint', str(bare),
                        '--cache', str(cache_pair(prefix)[1])])
        assert code == 2

    def test_inspect_text(self, cli, prefix, capsys):
        capsys.readouterr()
        assert cli.run(['inspect', '--cache', str(cache_pair(prefix)[0])]) == 0
        out = capsys.readouterr().out
        assert "Split: train" in out
        assert "Graphs: 6 in 2 classes" in out

    def test_inspect_json_and_export(self, cli, prefix, tmp_path, capsys):
        export = tmp_path / "train.json"
        capsys.readouterr()
        assert cli.run(['inspect', '--cache', str(cache_pair(prefix)[0]), '-f', 'json',
                        '--export', str(export)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["class_histogram"] == {"class_0": 3, "class_1": 3}
        assert len(json.loads(export.read_text())["graphs"]) == 6


@pytest.mark.parametrize("prefix, expected", [
    ("cache/potato", ("cache/potato.train.ragc", "cache/potato.test.ragc")),
    ("cache/potato.train.ragc", ("cache/potato.train.ragc", "cache/potato.test.ragc")),
    ("cache/potato.test.ragc", ("cache/potato.train.ragc", "cache/potato.test.ragc")),
])
def test_cache_pair(prefix, expected):
    assert tuple(str(p) for p in cache_pair(prefix)) == expected
