"""Full pipeline runs on a synthetic four-class corpus.

These take minutes; select them with ``pytest -m slow``.
"""

import math

import pytest

from graphleaf.config import PreprocessConfig, RunConfig
from graphleaf.data.dataset import scan_dataset, stratified_split
from graphleaf.data.synthetic import generate_synthetic_corpus
from graphleaf.graphs.pipeline import build_graph_dataset
from graphleaf.models.config import ModelConfig
from graphleaf.training.evaluation import evaluate_model
from graphleaf.training.trainer import train_model
from graphleaf.utils.random_streams import SPLIT, SeedStreams

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def datasets(tmp_path_factory):
    """200 images in 4 classes, split 80/20 and turned into 50-segment graphs."""
    root = generate_synthetic_corpus(tmp_path_factory.mktemp("corpus"), num_classes=4,
                                     per_class=50, size=128, seed=0)
    cfg = PreprocessConfig(data=str(root), segments=50, image_size=128)
    train_manifest, test_manifest = stratified_split(scan_dataset(root), 0.8,
                                                     SeedStreams(0).fresh(SPLIT))
    return (build_graph_dataset(train_manifest, 'train', cfg, workers=4),
            build_graph_dataset(test_manifest, 'test', cfg, workers=4))


def test_split_sizes(datasets):
    train, test = datasets
    assert (len(train), len(test)) == (160, 40)


def test_hybrid_reaches_high_accuracy(datasets):
    train, test = datasets
    cfg = RunConfig(model=ModelConfig(variant='hybrid', num_classes=4), epochs=50, seed=0)
    result = train_model(cfg, train, test)
    assert max(row.test_acc for row in result.curves) >= 0.95
    report = evaluate_model(result.best_params, cfg.model, test)
    assert report.accuracy >= 0.95


@pytest.mark.parametrize("variant", ['gcn', 'gat'])
def test_baselines_train_cleanly(datasets, variant):
    train, test = datasets
    cfg = RunConfig(model=ModelConfig(variant=variant, num_classes=4), epochs=10, seed=0)
    result = train_model(cfg, train, test)
    assert all(math.isfinite(row.train_loss) and math.isfinite(row.test_loss)
               for row in result.curves)
    assert result.curves[-1].train_loss < result.curves[0].train_loss
