"""IDX dataset ingestion and deterministic stratified subsetting.

IDX byte layout (big endian):

    images  i32 magic = 0x00000803
            i32 count, i32 rows, i32 cols
            u8[count * rows * cols] pixels, row-major
    labels  i32 magic = 0x00000801
            i32 count
            u8[count] class ids

Files ending in .gz are decompressed transparently. The library never fetches
anything over the network; scripts/prepare_mnist.py documents how to place
the files.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from snnfault.errors import DataError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
N_CLASSES = 10


@dataclass
class LabeledImageSet:
    """Flat images (count x pixels, uint8) with class labels 0..9."""

    images: np.ndarray
    labels: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=np.uint8)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.images.ndim != 2:
            raise DataError(f"images must be 2-D, got shape {self.images.shape}")
        if self.images.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )
        if self.labels.size and self.labels.max() >= N_CLASSES:
            raise DataError(f"labels must be < {N_CLASSES}")

    @property
    def count(self) -> int:
        return self.images.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.images.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=N_CLASSES)


def _open_maybe_gz(path: str | Path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(f, n: int, path, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataError(
            f"{path}: truncated {what}: expected {n} bytes, got {len(data)}"
        )
    return data


def _read_be32(f, path, what: str) -> int:
    return struct.unpack(">i", _read_exact(f, 4, path, what))[0]


def load_idx(
    images_path: str | Path, labels_path: str | Path, source: str = ""
) -> LabeledImageSet:
    """Parse an IDX image/label file pair into a LabeledImageSet."""
    images_path, labels_path = Path(images_path), Path(labels_path)
    for p in (images_path, labels_path):
        if not p.exists():
            raise DataError(f"dataset file not found: {p}")

    with _open_maybe_gz(images_path) as f:
        magic = _read_be32(f, images_path, "header")
        if magic != IMAGE_MAGIC:
            raise DataError(
                f"{images_path}: bad magic 0x{magic & 0xFFFFFFFF:08x}, "
                f"expected image magic 0x{IMAGE_MAGIC:08x}"
            )
        count = _read_be32(f, images_path, "header")
        rows = _read_be32(f, images_path, "header")
        cols = _read_be32(f, images_path, "header")
        pixels = _read_exact(f, count * rows * cols, images_path, "pixel data")
        images = np.frombuffer(pixels, dtype=np.uint8).reshape(count, rows * cols)

    with _open_maybe_gz(labels_path) as f:
        magic = _read_be32(f, labels_path, "header")
        if magic != LABEL_MAGIC:
            raise DataError(
                f"{labels_path}: bad magic 0x{magic & 0xFFFFFFFF:08x}, "
                f"expected label magic 0x{LABEL_MAGIC:08x}"
            )
        label_count = _read_be32(f, labels_path, "header")
        labels = np.frombuffer(
            _read_exact(f, label_count, labels_path, "label data"), dtype=np.uint8
        )

    if count != label_count:
        raise DataError(
            f"count mismatch: {count} images in {images_path} but "
            f"{label_count} labels in {labels_path}"
        )
    return LabeledImageSet(images=images.copy(), labels=labels.copy(), source=source)


def write_idx(
    images: np.ndarray, labels: np.ndarray, images_path: str | Path, labels_path: str | Path
) -> None:
    """Write an image/label pair in IDX format (images as count x 28 x 28 or
    count x pixels with a square pixel count)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    if images.ndim == 2:
        side = int(round(images.shape[1] ** 0.5))
        if side * side != images.shape[1]:
            raise DataError("flat images must have a square pixel count")
        images = images.reshape(images.shape[0], side, side)
    if images.ndim != 3:
        raise DataError(f"images must be 2-D or 3-D, got shape {images.shape}")
    count, rows, cols = images.shape
    if labels.shape != (count,):
        raise DataError("labels must match image count")
    with open(images_path, "wb") as f:
        f.write(struct.pack(">iiii", IMAGE_MAGIC, count, rows, cols))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">ii", LABEL_MAGIC, count))
        f.write(labels.tobytes())


def subset(
    dataset: LabeledImageSet, n: int, seed: int | Sequence[int]
) -> LabeledImageSet:
    """Class-stratified deterministic sample of size n, in stable index order.

    Each class contributes n // 10 samples, with the remainder going to the
    lowest class ids, so per-class counts stay within one of n / 10.
    """
    if n > dataset.count:
        raise DataError(f"requested {n} samples but the set has {dataset.count}")
    if n == dataset.count:
        return LabeledImageSet(
            dataset.images.copy(), dataset.labels.copy(), dataset.source
        )
    rng = np.random.default_rng(seed)
    want = [n // N_CLASSES + (1 if c < n % N_CLASSES else 0) for c in range(N_CLASSES)]
    picked = []
    for cls in range(N_CLASSES):
        members = np.flatnonzero(dataset.labels == cls)
        if want[cls] > members.size:
            raise DataError(
                f"class {cls} has {members.size} samples, need {want[cls]} "
                f"for a stratified subset of {n}"
            )
        picked.append(rng.choice(members, size=want[cls], replace=False))
    idx = np.sort(np.concatenate(picked))
    return LabeledImageSet(dataset.images[idx], dataset.labels[idx], dataset.source)


def split_train_test(
    dataset: LabeledImageSet, n_train: int, n_test: int, seed: int
) -> tuple[LabeledImageSet, LabeledImageSet]:
    """Disjoint stratified train/test subsets drawn from one set."""
    if n_train + n_test > dataset.count:
        raise DataError(
            f"cannot split {dataset.count} samples into {n_train} + {n_test}"
        )
    rng = np.random.default_rng([seed, 0])
    train_want = [
        n_train // N_CLASSES + (1 if c < n_train % N_CLASSES else 0)
        for c in range(N_CLASSES)
    ]
    train_idx = []
    remaining = []
    for cls in range(N_CLASSES):
        members = np.flatnonzero(dataset.labels == cls)
        if train_want[cls] > members.size:
            raise DataError(
                f"class {cls} has {members.size} samples, need {train_want[cls]}"
            )
        chosen = rng.choice(members, size=train_want[cls], replace=False)
        train_idx.append(chosen)
        remaining.append(np.setdiff1d(members, chosen))
    train_ids = np.sort(np.concatenate(train_idx))
    rest_ids = np.sort(np.concatenate(remaining))
    rest = LabeledImageSet(
        dataset.images[rest_ids], dataset.labels[rest_ids], dataset.source
    )
    test = subset(rest, n_test, [seed, 1])
    train = LabeledImageSet(
        dataset.images[train_ids], dataset.labels[train_ids], dataset.source
    )
    return train, test
