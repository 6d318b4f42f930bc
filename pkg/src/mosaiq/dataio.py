"""IDX dataset loading and PGM image export.

Only uncompressed IDX files are read; gunzip the MNIST/Fashion-MNIST
downloads first.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, MismatchError, ShapeError, TruncationError

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
SIDE = 28
N_PIXELS = SIDE * SIDE
PGM_HEADER = b"P5\n28 28\n255\n"


@dataclass(frozen=True)
class ImageSet:
    """Flattened images with pixels in [0, 1] and their class labels."""

    images: np.ndarray  # (N, 784) float64
    labels: np.ndarray  # (N,) int64

    def __post_init__(self):
        if self.images.ndim != 2 or len(self.images) != len(self.labels):
            raise ShapeError("images must be (N, d) with one label per image")

    def __len__(self) -> int:
        return len(self.labels)


def _read_idx(path, magic: int) -> tuple[tuple[int, ...], bytes]:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 4:
        raise TruncationError(f"{path}: file shorter than the IDX magic")
    (got,) = struct.unpack(">i", data[:4])
    if got != magic:
        raise FormatError(f"{path}: magic {got}, expected {magic}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(data) < header:
        raise TruncationError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndim}I", data[4:header])
    need = int(np.prod(dims, dtype=np.int64))
    payload = data[header:]
    if len(payload) < need:
        raise TruncationError(f"{path}: payload has {len(payload)} bytes, header promises {need}")
    return dims, payload[:need]


def load_idx(images_path, labels_path) -> ImageSet:
    """Load an IDX image file and its label file; pixels are divided by 255."""
    idims, ipix = _read_idx(images_path, IMAGE_MAGIC)
    (n_labels,), lab = _read_idx(labels_path, LABEL_MAGIC)
    n, rows, cols = idims
    if n != n_labels:
        raise MismatchError(f"{n} images but {n_labels} labels")
    pixels = np.frombuffer(ipix, dtype=np.uint8).reshape(n, rows * cols)
    labels = np.frombuffer(lab, dtype=np.uint8).astype(np.int64)
    return ImageSet(pixels.astype(np.float64) / 255.0, labels)


def write_idx(images_path, labels_path, pixels, labels) -> None:
    """Write uint8 images (N, 28, 28) or (N, 784) and labels as IDX files."""
    pixels = np.asarray(pixels, dtype=np.uint8).reshape(len(pixels), SIDE, SIDE)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">iIII", IMAGE_MAGIC, len(pixels), SIDE, SIDE))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">iI", LABEL_MAGIC, len(labels)))
        f.write(labels.tobytes())


def filter_class(data: ImageSet, class_id: int) -> ImageSet:
    if not 0 <= class_id <= 9:
        raise ValueError(f"class_id must be in 0..9, got {class_id}")
    keep = data.labels == class_id
    return ImageSet(data.images[keep], data.labels[keep])


def to_bytes(image) -> np.ndarray:
    """Clamp to [0, 1] and round half away from zero onto 0..255."""
    v = np.asarray(image, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("image has non-finite values")
    scaled = np.clip(v, 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def export_pgm(image, path) -> None:
    """Write one 784-pixel image as a binary 28x28 PGM."""
    b = to_bytes(image)
    if b.size != N_PIXELS:
        raise ShapeError(f"expected {N_PIXELS} pixels, got {b.size}")
    with open(path, "wb") as f:
        f.write(PGM_HEADER)
        f.write(b.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary 28x28, maxval 255 PGM back into a [0, 1] vector."""
    with open(path, "rb") as f:
        data = f.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5" or tokens[1:] != [b"28", b"28", b"255"]:
        raise FormatError(f"{path}: expected a P5 28x28 maxval-255 PGM")
    payload = data[pos + 1:pos + 1 + N_PIXELS]
    if len(payload) != N_PIXELS:
        raise TruncationError(f"{path}: PGM payload too short")
    return np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0


def load_pgm_dir(directory) -> np.ndarray:
    """All ``*.pgm`` files in a directory, sorted by name, as an (N, 784) array."""
    paths = sorted(Path(directory).glob("*.pgm"))
    if not paths:
        return np.zeros((0, N_PIXELS))
    return np.stack([read_pgm(p) for p in paths])


def export_pgm_batch(images, directory, pattern: str = "img_{:04d}.pgm") -> list[str]:
    os.makedirs(directory, exist_ok=True)
    out = []
    for i, img in enumerate(images):
        path = os.path.join(directory, pattern.format(i))
        export_pgm(img, path)
        out.append(path)
    return out
