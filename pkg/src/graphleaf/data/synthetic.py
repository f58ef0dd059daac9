"""Synthetic leaf-like corpora for tests and demos.

Images are smooth low-saturation colour fields with elliptical patches; the
class is the hue of the dominant patches. Graphs are small random connected
graphs whose class is the dominant node colour.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from PIL import Image
from skimage.color import hsv2rgb

from ..graphs.rag import RegionGraph
from ..utils.file_utils import ensure_directory_exists

CLASS_HUES = (0.0, 0.33, 0.6, 0.15, 0.8, 0.48)


def _ellipse_mask(size: int, cy: float, cx: float, ry: float, rx: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def synthetic_image(class_index: int, rng: np.random.Generator, size: int = 128,
                    hues: Sequence[float] = CLASS_HUES) -> np.ndarray:
    """One 8-bit RGB image (size, size, 3) whose dominant patch hue is the class."""
    yy, xx = np.mgrid[0:size, 0:size] / float(size)

    # Smooth background: a muted base colour plus a planar gradient per channel.
    base = rng.uniform(0.25, 0.55, size=3)
    slopes = rng.uniform(-0.15, 0.15, size=(2, 3))
    rgb = base + yy[..., None] * slopes[0] + xx[..., None] * slopes[1]

    def paint(hue: float, radius_range) -> None:
        cy, cx = rng.uniform(0.15 * size, 0.85 * size, size=2)
        ry, rx = rng.uniform(*radius_range, size=2)
        hsv = np.array([hue % 1.0, rng.uniform(0.7, 1.0), rng.uniform(0.6, 1.0)])
        rgb[_ellipse_mask(size, cy, cx, ry, rx)] = hsv2rgb(hsv[None, None, :])[0, 0]

    class_hue = hues[class_index % len(hues)]
    for _ in range(int(rng.integers(0, 3))):
        other = hues[int(rng.integers(0, len(hues)))]
        paint(other + rng.normal(0, 0.02), (0.04 * size, 0.09 * size))
    for _ in range(int(rng.integers(3, 6))):
        paint(class_hue + rng.normal(0, 0.02), (0.10 * size, 0.22 * size))

    rgb = rgb + rng.normal(0.0, 0.01, size=rgb.shape)
    return (np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def generate_synthetic_corpus(root: Union[str, Path], num_classes: int = 4,
                              per_class: int = 50, size: int = 128,
                              seed: int = 0) -> Path:
    """Write ``root/class_<i>/img_<j>.png`` for every class and return ``root``."""
    root = ensure_directory_exists(root)
    rng = np.random.default_rng(seed)
    for class_index in range(num_classes):
        class_dir = ensure_directory_exists(root / f"class_{class_index}")
        for j in range(per_class):
            pixels = synthetic_image(class_index, rng, size)
            Image.fromarray(pixels).save(class_dir / f"img_{j:04d}.png")
    return root


def synthetic_graphs(num_graphs: int, seed: int = 0, num_classes: int = 2,
                     min_nodes: int = 5, max_nodes: int = 12,
                     dominance: float = 0.75,
                     colors: Optional[np.ndarray] = None) -> List[RegionGraph]:
    """Random connected graphs; most nodes carry the class colour plus noise."""
    rng = np.random.default_rng(seed)
    if colors is None:
        colors = np.array([[0.8, -0.8, -0.8], [-0.8, 0.8, -0.8], [-0.8, -0.8, 0.8],
                           [0.8, 0.8, -0.8]])[:num_classes]
    graphs = []
    for g in range(num_graphs):
        label = g % num_classes
        n = int(rng.integers(min_nodes, max_nodes + 1))
        picks = np.where(rng.random(n) < dominance, label,
                         rng.integers(0, num_classes, size=n))
        features = colors[picks] + rng.normal(0.0, 0.05, size=(n, 3))
        features = np.clip(features, -1.0, 1.0).astype(np.float32)

        # A random spanning tree plus a few chords.
        edges = {(int(rng.integers(0, v)), v) for v in range(1, n)}
        for _ in range(n // 2):
            u, v = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
            edges.add((u, v))
        edge_array = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
        graphs.append(RegionGraph(features, edge_array, label))
    return graphs
