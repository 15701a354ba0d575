"""Writes the preprocessing fixtures and their expected tensors.

The expected tensors come from a dense-matrix numpy formulation of the same
resampling rule, independent of the C++ separable loop. Run from the repo root:

    python3 tests/python/make_preprocess_golden.py
"""

from pathlib import Path

import numpy as np
from PIL import Image

OUT = Path(__file__).resolve().parents[1] / "data" / "preprocess"
MEAN = np.array([0.485, 0.456, 0.406])
STD = np.array([0.229, 0.224, 0.225])


def cubic(x):
    a = -0.5
    x = np.abs(x)
    return np.where(
        x < 1,
        ((a + 2) * x - (a + 3)) * x * x + 1,
        np.where(x < 2, ((a * x - 5 * a) * x + 8 * a) * x - 4 * a, 0.0),
    )


def resample_matrix(n_in, n_out):
    """Row i holds the weights of every source index, edges folded onto 0 and n_in-1."""
    scale = n_in / n_out
    stretch = max(scale, 1.0)
    m = np.zeros((n_out, n_in))
    for i in range(n_out):
        center = (i + 0.5) * scale
        js = np.arange(int(np.floor(center - 2 * stretch)), int(np.ceil(center + 2 * stretch)) + 1)
        w = cubic((js + 0.5 - center) / stretch)
        w = w / w.sum()
        np.add.at(m[i], np.clip(js, 0, n_in - 1), w)
    return m


def resized_dims(w, h):
    if w <= h:
        return 256, int(np.floor(h * 256 / w + 0.5))
    return int(np.floor(w * 256 / h + 0.5)), 256


def preprocess(rgb):
    h, w, _ = rgb.shape
    x = (rgb.astype(np.float32) / np.float32(255)).astype(np.float64)
    ow, oh = resized_dims(w, h)
    my, mx = resample_matrix(h, oh), resample_matrix(w, ow)
    chans = []
    for c in range(3):
        r = (my @ x[:, :, c] @ mx.T).astype(np.float32).astype(np.float64)
        y0, x0 = (oh - 224) // 2, (ow - 224) // 2
        crop = r[y0 : y0 + 224, x0 : x0 + 224]
        chans.append(((crop - MEAN[c]) / STD[c]).astype(np.float32))
    return np.stack(chans)


def fixture(seed, w, h):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    base = np.stack(
        [
            127 + 100 * np.sin(xx / (7 + seed)),
            127 + 100 * np.cos(yy / (11 + seed)),
            255 * ((xx // 16 + yy // 16) % 2),
        ],
        axis=-1,
    )
    noisy = base + rng.normal(0, 20, base.shape)
    return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, seed, w, h in [("square224", 1, 224, 224), ("wide300x260", 2, 300, 260), ("tall384x512", 3, 384, 512)]:
        rgb = fixture(seed, w, h)
        Image.fromarray(rgb, "RGB").save(OUT / f"{name}.png")
        preprocess(rgb).astype("<f4").tofile(OUT / f"{name}.f32")


if __name__ == "__main__":
    main()
