"""Write the 5000-image MNIST subset bundled with mlxtend as IDX files.

    python scripts/mnist_subset_to_idx.py data/

produces data/mnist5k-images-idx3-ubyte and data/mnist5k-labels-idx1-ubyte
(500 images per digit).  Use the real MNIST training files instead when
they are available; the loader reads both the same way.
"""
import gzip
import importlib.resources
import sys
from pathlib import Path

import numpy as np

from mosaiq.dataio import write_idx


def load_subset():
    path = importlib.resources.files("mlxtend") / "data" / "data" / "mnist_5k.csv.gz"
    with gzip.open(path) as f:
        table = np.loadtxt(f, delimiter=",", dtype=np.int64)
    return table[:, :-1].astype(np.uint8), table[:, -1].astype(np.uint8)


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pixels, labels = load_subset()
    images_path = out / "mnist5k-images-idx3-ubyte"
    labels_path = out / "mnist5k-labels-idx1-ubyte"
    write_idx(images_path, labels_path, pixels, labels)
    print(images_path)
    print(labels_path)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
