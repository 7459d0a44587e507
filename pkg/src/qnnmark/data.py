"""Image ingestion, binary-subset selection, and trigger-sample synthesis.

Samples are 28x28 grayscale images kept as raw bytes (0-255); the
normalized view divides by 255. IDX files follow the classic big-endian
layout: magic 2051 for images (count, rows, cols header) and 2049 for
labels (count header), then raw bytes.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
IMAGE_SIDE = 28
IMAGE_PIXELS = IMAGE_SIDE * IMAGE_SIDE


class IdxParseError(ValueError):
    """Base class for IDX file problems."""


class IdxMagicError(IdxParseError):
    """Magic number does not match the expected IDX type."""


class IdxTruncatedError(IdxParseError):
    """Payload shorter or longer than the header declares."""


class IdxCountMismatchError(IdxParseError):
    """Image and label files disagree on the sample count."""


class InsufficientSamplesError(ValueError):
    """A selection asked for more samples than a class can provide."""


class TriggerLabelError(ValueError):
    """Trigger stamped onto a sample whose label is not the source label."""


@dataclass(frozen=True, eq=False)
class ImageSample:
    pixels: np.ndarray  # uint8, shape (784,)
    label: int
    provenance: str = "clean"  # "clean" | "trigger"
    source_index: int = -1

    def __post_init__(self):
        if self.pixels.shape != (IMAGE_PIXELS,) or self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be a uint8 array of 784 values")

    def normalized(self) -> np.ndarray:
        return self.pixels.astype(np.float64) / 255.0

    def image2d(self) -> np.ndarray:
        return self.pixels.reshape(IMAGE_SIDE, IMAGE_SIDE)


@dataclass(frozen=True)
class TriggerSpec:
    block_height: int = 7
    block_width: int = 7
    pixel_value: int = 255
    origin_row: int = 0
    origin_col: int = 0
    source_label: int = 0
    target_label: int = 1

    def __post_init__(self):
        if not (0 < self.block_height and 0 < self.block_width):
            raise ValueError("trigger block must be non-empty")
        if (
            self.origin_row < 0
            or self.origin_col < 0
            or self.origin_row + self.block_height > IMAGE_SIDE
            or self.origin_col + self.block_width > IMAGE_SIDE
        ):
            raise ValueError("trigger block must fit inside the 28x28 image")
        if not 0 <= self.pixel_value <= 255:
            raise ValueError("trigger pixel value must be a byte")
        if self.target_label == self.source_label:
            raise ValueError("trigger target label must differ from the source label")


def read_idx_images(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16:
        raise IdxTruncatedError(f"{path}: too short for an image header")
    magic, count, rows, cols = struct.unpack_from(">IIII", blob, 0)
    if magic != IMAGE_MAGIC:
        raise IdxMagicError(f"{path}: magic {magic} != {IMAGE_MAGIC}")
    expected = 16 + count * rows * cols
    if len(blob) != expected:
        raise IdxTruncatedError(
            f"{path}: payload is {len(blob)} bytes, header implies {expected}"
        )
    return np.frombuffer(blob, dtype=np.uint8, offset=16).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8:
        raise IdxTruncatedError(f"{path}: too short for a label header")
    magic, count = struct.unpack_from(">II", blob, 0)
    if magic != LABEL_MAGIC:
        raise IdxMagicError(f"{path}: magic {magic} != {LABEL_MAGIC}")
    if len(blob) != 8 + count:
        raise IdxTruncatedError(
            f"{path}: payload is {len(blob)} bytes, header implies {8 + count}"
        )
    return np.frombuffer(blob, dtype=np.uint8, offset=8)


def write_idx_images(path, images: np.ndarray) -> None:
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("images must have shape (count, rows, cols)")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.size))
        fh.write(labels.tobytes())


def load_idx(images_path, labels_path) -> list[ImageSample]:
    """Zip an IDX image file with its label file into samples."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxCountMismatchError(
            f"{images.shape[0]} images vs {labels.shape[0]} labels"
        )
    if images.shape[1] * images.shape[2] != IMAGE_PIXELS:
        raise IdxParseError(
            f"expected {IMAGE_SIDE}x{IMAGE_SIDE} images, got "
            f"{images.shape[1]}x{images.shape[2]}"
        )
    return [
        ImageSample(pixels=images[i].reshape(-1).copy(), label=int(labels[i]),
                    source_index=i)
        for i in range(images.shape[0])
    ]


def select_binary_subset(
    samples, class_a: int, class_b: int, per_class_count: int, seed: int
) -> tuple[list[ImageSample], list[ImageSample]]:
    """Seeded draw of disjoint train/test pools, labels remapped a->0, b->1.

    Each pool gets ``per_class_count`` samples of each class, drawn without
    replacement.
    """
    rng = np.random.default_rng(seed)
    train: list[ImageSample] = []
    test: list[ImageSample] = []
    for cls, new_label in ((class_a, 0), (class_b, 1)):
        members = [s for s in samples if s.label == cls]
        needed = 2 * per_class_count
        if len(members) < needed:
            raise InsufficientSamplesError(
                f"class {cls}: need {needed} samples, have {len(members)}"
            )
        order = rng.permutation(len(members))
        chosen = [members[i] for i in order[:needed]]
        remapped = [replace(s, label=new_label) for s in chosen]
        train.extend(remapped[:per_class_count])
        test.extend(remapped[per_class_count:])
    return train, test


def apply_trigger(sample: ImageSample, spec: TriggerSpec) -> ImageSample:
    """Stamp the block onto a copy of the sample and flip its label."""
    if sample.label != spec.source_label:
        raise TriggerLabelError(
            f"trigger expects source label {spec.source_label}, "
            f"sample has {sample.label}"
        )
    img = sample.image2d().copy()
    img[
        spec.origin_row : spec.origin_row + spec.block_height,
        spec.origin_col : spec.origin_col + spec.block_width,
    ] = spec.pixel_value
    return ImageSample(
        pixels=img.reshape(-1),
        label=spec.target_label,
        provenance="trigger",
        source_index=sample.source_index,
    )


def build_trigger_sets(
    train_pool,
    test_pool,
    spec: TriggerSpec,
    n_embed: int,
    n_verify: int,
    seed: int,
) -> tuple[list[tuple[ImageSample, ImageSample]], list[ImageSample]]:
    """Embedding pairs from the train pool, verification triggers from the
    test pool (held-out sources only). The two draws use independent seeded
    streams, so the verification set does not depend on the embed count."""

    def draw(pool, count, what, stream):
        sources = [s for s in pool if s.label == spec.source_label]
        if len(sources) < count:
            raise InsufficientSamplesError(
                f"{what}: need {count} label-{spec.source_label} sources, "
                f"have {len(sources)}"
            )
        order = np.random.default_rng([seed, stream]).permutation(len(sources))
        return [sources[i] for i in order[:count]]

    embed_sources = draw(train_pool, n_embed, "embedding pairs", 0)
    verify_sources = draw(test_pool, n_verify, "verification set", 1)
    overlap = {s.source_index for s in embed_sources} & {
        s.source_index for s in verify_sources
    }
    if overlap:
        raise ValueError(f"embed/verify source overlap: {sorted(overlap)[:5]}")
    pairs = [(s, apply_trigger(s, spec)) for s in embed_sources]
    verification = [apply_trigger(s, spec) for s in verify_sources]
    return pairs, verification
