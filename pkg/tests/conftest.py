import gzip
import importlib.resources
import os
from pathlib import Path

import numpy as np
import pytest

from mosaiq import dataio

FULL_MNIST_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")


def _mlxtend_subset():
    try:
        path = importlib.resources.files("mlxtend") / "data" / "data" / "mnist_5k.csv.gz"
    except ModuleNotFoundError:
        return None
    if not path.is_file():
        return None
    with gzip.open(path) as f:
        table = np.loadtxt(f, delimiter=",", dtype=np.int64)
    return table[:, :-1].astype(np.uint8), table[:, -1].astype(np.uint8)


@pytest.fixture(scope="session")
def mnist_paths(tmp_path_factory):
    """(images, labels, description) IDX paths for real MNIST data.

    Set MOSAIQ_MNIST_DIR to a directory holding the uncompressed MNIST
    training files to use the full set; otherwise the 5000-image subset
    shipped with mlxtend (500 per digit) is written out as IDX.
    """
    full = os.environ.get("MOSAIQ_MNIST_DIR")
    if full:
        images, labels = (Path(full) / name for name in FULL_MNIST_FILES)
        return str(images), str(labels), f"MNIST training set ({full})"
    subset = _mlxtend_subset()
    if subset is None:
        pytest.skip("no MNIST data: install mlxtend or set MOSAIQ_MNIST_DIR")
    out = tmp_path_factory.mktemp("mnist")
    images, labels = out / "images-idx3-ubyte", out / "labels-idx1-ubyte"
    dataio.write_idx(images, labels, *subset)
    return str(images), str(labels), "mlxtend 5k MNIST subset"


@pytest.fixture(scope="session")
def mnist(mnist_paths):
    return dataio.load_idx(*mnist_paths[:2])


@pytest.fixture(scope="session")
def digit0(mnist):
    return dataio.filter_class(mnist, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def emit(number, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
