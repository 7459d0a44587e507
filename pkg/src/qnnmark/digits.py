"""Deterministic rendered-digit corpus for hermetic experiments.

Real handwritten-digit scans must be supplied as local IDX files; nothing
is downloaded. When no files are given, this module synthesizes a stand-in
corpus by rendering digit glyphs with jittered font, size, position and
rotation, plus blur and pixel noise, and writes it in the same IDX format
so the rest of the pipeline is identical either way.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont

from .data import IMAGE_SIDE, write_idx_images, write_idx_labels

_FONT_DIRS = (
    "/usr/share/fonts/truetype/dejavu",
    "/usr/share/fonts/TTF",
    "/usr/share/fonts/dejavu",
)
_FONT_NAMES = (
    "DejaVuSans.ttf",
    "DejaVuSans-Bold.ttf",
    "DejaVuSans-Oblique.ttf",
    "DejaVuSerif.ttf",
    "DejaVuSerif-Bold.ttf",
    "DejaVuSansMono.ttf",
)

DEFAULT_PER_CLASS = 400
DEFAULT_SEED = 77003


def _font_paths() -> list[str]:
    found = []
    for d in _FONT_DIRS:
        for name in _FONT_NAMES:
            p = os.path.join(d, name)
            if os.path.exists(p):
                found.append(p)
    if not found:
        try:
            import matplotlib

            ttf = Path(matplotlib.get_data_path()) / "fonts" / "ttf"
            found = [str(ttf / n) for n in _FONT_NAMES if (ttf / n).exists()]
        except ImportError:
            pass
    if not found:
        raise RuntimeError("no usable TTF fonts found for the rendered corpus")
    return found


def render_digit(digit: int, rng: np.random.Generator, fonts: list[str]) -> np.ndarray:
    """One 28x28 uint8 glyph image with randomized nuisance factors:
    font face, size, position, rotation, shear, stroke intensity, blur."""
    font_path = fonts[rng.integers(0, len(fonts))]
    size = int(rng.integers(20, 28))
    font = ImageFont.truetype(font_path, size)
    canvas = Image.new("L", (IMAGE_SIDE, IMAGE_SIDE), 0)
    draw = ImageDraw.Draw(canvas)
    dx = float(rng.uniform(-2.0, 2.0))
    dy = float(rng.uniform(-2.0, 2.0))
    intensity = int(rng.integers(180, 256))
    draw.text(
        (IMAGE_SIDE / 2 + dx, IMAGE_SIDE / 2 + dy),
        str(digit),
        fill=intensity,
        font=font,
        anchor="mm",
    )
    shear = float(rng.uniform(-0.15, 0.15))
    canvas = canvas.transform(
        (IMAGE_SIDE, IMAGE_SIDE),
        Image.AFFINE,
        (1.0, shear, -shear * IMAGE_SIDE / 2, 0.0, 1.0, 0.0),
        resample=Image.BILINEAR,
        fillcolor=0,
    )
    angle = float(rng.uniform(-15.0, 15.0))
    canvas = canvas.rotate(angle, resample=Image.BILINEAR, fillcolor=0)
    blur = float(rng.uniform(0.0, 0.8))
    if blur > 0.05:
        canvas = canvas.filter(ImageFilter.GaussianBlur(blur))
    return np.asarray(canvas, dtype=np.uint8).copy()


def make_corpus(
    n_per_class: int = DEFAULT_PER_CLASS, seed: int = DEFAULT_SEED
) -> tuple[np.ndarray, np.ndarray]:
    """Images (N, 28, 28) and labels (N,), classes interleaved 0..9."""
    fonts = _font_paths()
    rng = np.random.default_rng(seed)
    images = np.empty((10 * n_per_class, IMAGE_SIDE, IMAGE_SIDE), dtype=np.uint8)
    labels = np.empty(10 * n_per_class, dtype=np.uint8)
    i = 0
    for _ in range(n_per_class):
        for digit in range(10):
            images[i] = render_digit(digit, rng, fonts)
            labels[i] = digit
            i += 1
    return images, labels


def ensure_idx_corpus(
    directory, n_per_class: int = DEFAULT_PER_CLASS, seed: int = DEFAULT_SEED
) -> tuple[str, str]:
    """Write (once) and return paths of the rendered corpus as IDX files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"rendered-digits-n{n_per_class}-s{seed}"
    images_path = directory / f"{stem}-images-idx3-ubyte"
    labels_path = directory / f"{stem}-labels-idx1-ubyte"
    if not (images_path.exists() and labels_path.exists()):
        images, labels = make_corpus(n_per_class, seed)
        write_idx_images(images_path, images)
        write_idx_labels(labels_path, labels)
    return str(images_path), str(labels_path)
