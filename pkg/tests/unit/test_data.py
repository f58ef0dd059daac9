"""Unit tests for corpus discovery, splitting and image preprocessing."""

from pathlib import Path

import numpy as np
import pytest

from graphleaf.data.dataset import (
    DatasetManifest,
    Sample,
    scan_dataset,
    stratified_split,
    train_count,
)
from graphleaf.data.preprocessing import NormalizedImage, preprocess_image
from graphleaf.exceptions import DecodeError, InputError


def _constant(value, size=8):
    return np.full((size, size, 3), value, dtype=np.uint8)


def _manifest(counts):
    classes = [f"class_{i}" for i in range(len(counts))]
    samples = [Sample(Path(f"{c}/{j}.png"), i)
               for i, (c, n) in enumerate(zip(classes, counts)) for j in range(n)]
    return DatasetManifest(classes, samples, Path("."))


class TestPreprocessImage:
    """Decode, resize and normalise."""

    def test_white_image(self, tmp_path, write_image):
        path = write_image(tmp_path / "white.png", _constant(255, 64))
        image = preprocess_image(path)
        assert image.shape == (128, 128, 3)
        np.testing.assert_array_equal(image.pixels, 1.0)

    def test_gray_image(self, tmp_path, write_image):
        path = write_image(tmp_path / "gray.png", _constant(128, 64))
        image = preprocess_image(path)
        np.testing.assert_allclose(image.pixels, (128 / 255 - 0.5) / 0.5, atol=1e-6)
        assert image.pixels[0, 0, 0] == pytest.approx(0.00392, abs=1e-5)

    def test_black_image(self, tmp_path, write_image):
        path = write_image(tmp_path / "black.png", _constant(0, 200))
        np.testing.assert_array_equal(preprocess_image(path).pixels, -1.0)

    def test_grayscale_file_is_replicated(self, tmp_path):
        from PIL import Image
        path = tmp_path / "mono.png"
        Image.fromarray(np.full((16, 16), 255, dtype=np.uint8)).save(path)
        image = preprocess_image(path, size=16)
        assert image.shape == (16, 16, 3)
        np.testing.assert_array_equal(image.pixels, 1.0)

    def test_values_within_range(self, tmp_path, write_image):
        rng = np.random.default_rng(0)
        path = write_image(tmp_path / "noise.png", rng.integers(0, 256, size=(50, 70, 3)))
        pixels = preprocess_image(path).pixels
        assert pixels.dtype == np.float32
        assert pixels.min() >= -1.0 and pixels.max() <= 1.0

    def test_undecodable_file(self, tmp_path):
        path = tmp_path / "broken.png"
        path.write_bytes(b"definitely not a png")
        with pytest.raises(DecodeError):
            preprocess_image(path)

    def test_normalized_image_validates_range(self):
        with pytest.raises(InputError):
            NormalizedImage(np.full((2, 2, 3), 1.5, dtype=np.float32))

    def test_unit_range_round_trip(self):
        image = NormalizedImage.from_uint8(_constant(255, 2))
        np.testing.assert_allclose(image.to_unit_range(), 1.0)


class TestScanDataset:
    """Class-per-directory discovery."""

    def test_two_classes(self, tmp_path, write_image):
        for i in range(3):
            write_image(tmp_path / "healthy" / f"{i}.png", _constant(10 * i))
        for i in range(2):
            write_image(tmp_path / "rust" / f"{i}.jpg", _constant(100 + i))
        manifest = scan_dataset(tmp_path)
        assert manifest.classes == ["healthy", "rust"]
        assert len(manifest) == 5
        assert manifest.class_counts() == {"healthy": 3, "rust": 2}
        assert len({s.path for s in manifest.samples}) == 5

    def test_class_order_is_lexicographic(self, tmp_path, write_image):
        for name in ("zeta", "alpha", "Mid"):
            write_image(tmp_path / name / "a.png", _constant(1))
        assert scan_dataset(tmp_path).classes == sorted(["zeta", "alpha", "Mid"])

    def test_missing_root(self, tmp_path):
        with pytest.raises(InputError):
            scan_dataset(tmp_path / "nowhere")

    def test_no_class_directories(self, tmp_path):
        with pytest.raises(InputError):
            scan_dataset(tmp_path)

    def test_empty_class_is_named(self, tmp_path, write_image):
        write_image(tmp_path / "healthy" / "a.png", _constant(1))
        (tmp_path / "blight").mkdir()
        with pytest.raises(InputError, match="blight"):
            scan_dataset(tmp_path)

    def test_unreadable_file_is_skipped(self, tmp_path, write_image):
        write_image(tmp_path / "healthy" / "a.png", _constant(1))
        (tmp_path / "healthy" / "b.png").write_bytes(b"garbage")
        manifest = scan_dataset(tmp_path)
        assert len(manifest) == 1
        assert [p.name for p in manifest.skipped] == ["b.png"]

    def test_manifest_round_trip(self, tmp_path, write_image):
        write_image(tmp_path / "data" / "a" / "x.png", _constant(1))
        manifest = scan_dataset(tmp_path / "data")
        manifest.save(tmp_path / "m.json")
        loaded = DatasetManifest.load(tmp_path / "m.json")
        assert loaded.classes == manifest.classes
        assert loaded.samples == manifest.samples


class TestStratifiedSplit:
    """Per-class train/test splitting."""

    @pytest.mark.parametrize("n, fraction, expected", [
        (522, 0.8, 417),
        (400, 0.75, 300),
        (100, 0.29, 29),
        (2, 0.1, 1),
    ])
    def test_train_count(self, n, fraction, expected):
        assert train_count(n, fraction) == expected

    def test_potato_layout(self):
        train, test = stratified_split(_manifest([400, 400, 400]), 0.75, seed=1)
        assert len(train) == 900 and len(test) == 300
        assert train.class_counts() == {"class_0": 300, "class_1": 300, "class_2": 300}

    def test_partition(self):
        manifest = _manifest([10, 7])
        train, test = stratified_split(manifest, 0.5, seed=3)
        paths = [s.path for s in train.samples] + [s.path for s in test.samples]
        assert sorted(paths) == sorted(s.path for s in manifest.samples)
        assert train.classes == test.classes == manifest.classes

    def test_same_seed_same_split(self):
        manifest = _manifest([30, 20])
        a, _ = stratified_split(manifest, 0.8, seed=11)
        b, _ = stratified_split(manifest, 0.8, seed=11)
        assert a.samples == b.samples

    def test_order_follows_manifest(self):
        manifest = _manifest([20])
        train, _ = stratified_split(manifest, 0.5, seed=0)
        order = [manifest.samples.index(s) for s in train.samples]
        assert order == sorted(order)

    def test_too_small_class(self):
        with pytest.raises(InputError):
            stratified_split(_manifest([5, 1]), 0.8, seed=0)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, 1.5])
    def test_fraction_must_be_open(self, fraction):
        with pytest.raises(InputError):
            stratified_split(_manifest([5]), fraction, seed=0)
