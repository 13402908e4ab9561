import gzip

import numpy as np
import pytest

from fpl._runtime import tune_allocator
from fpl.datasets import write_idx

tune_allocator()


@pytest.fixture(scope="session")
def mnist_idx(tmp_path_factory):
    """The 5000-image MNIST sample shipped with mlxtend, written as IDX files."""
    mlx = pytest.importorskip("mlxtend.data")
    X, y = mlx.mnist_data()
    root = tmp_path_factory.mktemp("mnist")
    images = root / "images-idx3-ubyte"
    labels = root / "labels-idx1-ubyte.gz"
    write_idx(images, X.reshape(-1, 28, 28).astype(np.uint8))
    raw = root / "labels.raw"
    write_idx(raw, y.astype(np.uint8))
    labels.write_bytes(gzip.compress(raw.read_bytes()))
    return images, labels


ACCEPTANCE_LINES: list[str] = []


def report(number: int, title: str, passed: bool, detail: str) -> None:
    """Record and print one acceptance verdict line."""
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
