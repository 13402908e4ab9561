"""Dataset generators and file loaders.

Every dataset records a provenance tag and can be fingerprinted with
:func:`digest` (SHA-256 of the canonical little-endian float64 bytes of
inputs then labels).
"""

from __future__ import annotations

import gzip
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class LabeledDataset:
    inputs: np.ndarray
    labels: np.ndarray
    classes: np.ndarray | None = None
    provenance: str = ""
    train_mask: np.ndarray | None = None

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.labels.ndim != 2:
            raise ValueError("inputs and labels must be 2-d (n x d, n x c)")
        if self.inputs.shape[0] < 1 or self.inputs.shape[0] != self.labels.shape[0]:
            raise ValueError("inputs and labels need the same, positive, length")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    def subset(self, mask_or_index) -> "LabeledDataset":
        idx = np.asarray(mask_or_index)
        return LabeledDataset(
            self.inputs[idx], self.labels[idx],
            None if self.classes is None else self.classes[idx],
            self.provenance,
            None if self.train_mask is None else self.train_mask[idx],
        )


def digest(dataset: LabeledDataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(dataset.inputs, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(dataset.labels, dtype="<f8").tobytes())
    return h.hexdigest()


# --------------------------------------------------------------------------
# synthetic 1-d targets


@dataclass(frozen=True)
class Synth1D:
    """Sum of sines ``sum_j A_j sin(w_j x)`` sampled on an even grid."""

    amplitudes: tuple[float, ...]
    frequencies: tuple[float, ...]
    interval: tuple[float, float]
    n: int

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.sin(np.multiply.outer(x, self.frequencies)) @ np.asarray(self.amplitudes)


SYNTH_PRESETS = {
    "appA": Synth1D((1.0, 1.0, 1.0), (1.0, 3.0, 5.0), (-3.14, 3.14), 201),
    "intro": Synth1D((1.0, 1.0), (1.0, 2.0), (-3.14, 3.14), 201),
}


def synth_1d(preset="appA") -> LabeledDataset:
    spec = SYNTH_PRESETS[preset] if isinstance(preset, str) else preset
    if spec.n < 2:
        raise ValueError("need at least two samples")
    x = np.linspace(spec.interval[0], spec.interval[1], spec.n)
    tag = preset if isinstance(preset, str) else "custom"
    return LabeledDataset(x[:, None], spec(x)[:, None], provenance=f"synth1d:{tag}")


# --------------------------------------------------------------------------
# parity


@dataclass(frozen=True)
class ParitySpec:
    dim: int
    size: int | None = None  # None -> the whole hypercube
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.dim <= 24:
            raise ValueError("parity dimension must be between 1 and 24")
        if self.size is not None and not 1 <= self.size <= 2 ** self.dim:
            raise ValueError(f"subset size must be between 1 and 2^{self.dim}")


def _corners(indices, d):
    bits = (np.asarray(indices)[:, None] >> np.arange(d)[None, :]) & 1
    return 1.0 - 2.0 * bits


def parity_dataset(spec: ParitySpec) -> LabeledDataset:
    """Points of ``{-1, 1}^d`` labelled by the product of their coordinates."""
    total = 2 ** spec.dim
    if spec.size is None:
        idx = np.arange(total)
    else:
        idx = np.sort(np.random.default_rng(spec.seed).choice(total, spec.size, replace=False))
    x = _corners(idx, spec.dim)
    y = np.prod(x, axis=1)
    tag = f"parity:d={spec.dim}," + ("full" if spec.size is None else f"s={spec.size},seed={spec.seed}")
    return LabeledDataset(x, y[:, None], provenance=tag)


def parity_exact_ft(d: int, k) -> complex:
    """``(-i)^d prod_j sin(2 pi k_j)``: transform of parity over the full cube."""
    k = np.broadcast_to(np.asarray(k, dtype=np.float64), (d,))
    return complex((-1j) ** d * np.prod(np.sin(2 * np.pi * k)))


# --------------------------------------------------------------------------
# IDX (MNIST)


def _open(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def read_idx(path, expected_magic: int | None = None) -> np.ndarray:
    """Unsigned-byte IDX array (big-endian header)."""
    raw = _open(path)
    if len(raw) < 4:
        raise ValueError(f"{path}: truncated header")
    magic = int.from_bytes(raw[:4], "big")
    if raw[:2] != b"\x00\x00" or raw[2] != 0x08:
        raise ValueError(f"{path}: bad magic 0x{magic:08x}")
    if expected_magic is not None and magic != expected_magic:
        raise ValueError(f"{path}: bad magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = raw[3]
    head = 4 + 4 * ndim
    if len(raw) < head:
        raise ValueError(f"{path}: truncated header")
    dims = tuple(int(v) for v in np.frombuffer(raw[4:head], dtype=">u4"))
    count = int(np.prod(dims))
    if len(raw) - head < count:
        raise ValueError(f"{path}: truncated payload ({len(raw) - head} of {count} bytes)")
    return np.frombuffer(raw[head:head + count], dtype=np.uint8).reshape(dims)


def write_idx(path, array) -> None:
    arr = np.ascontiguousarray(array, dtype=np.uint8)
    header = bytes([0, 0, 0x08, arr.ndim]) + np.asarray(arr.shape, dtype=">u4").tobytes()
    Path(path).write_bytes(header + arr.tobytes())


def load_idx(images_path, labels_path, subset: int | None = None, seed: int = 0) -> LabeledDataset:
    """MNIST-style image/label pair: pixels scaled to [0, 1], one-hot labels.

    ``subset`` draws that many samples without replacement (sorted, seeded).
    """
    images = read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise ValueError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    x = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    classes = labels.astype(np.int64)
    if subset is not None:
        if subset > x.shape[0]:
            raise ValueError("subset larger than the file")
        idx = np.sort(np.random.default_rng(seed).choice(x.shape[0], subset, replace=False))
        x, classes = x[idx], classes[idx]
    onehot = np.zeros((x.shape[0], 10))
    onehot[np.arange(x.shape[0]), classes] = 1.0
    return LabeledDataset(x, onehot, classes, provenance=f"idx:{Path(images_path).name}")


# --------------------------------------------------------------------------
# PGM images


def _pgm_tokens(raw):
    """Header tokens of a PGM file and the offset just past the last one."""
    tokens, i = [], 2
    while len(tokens) < 3:
        while i < len(raw) and raw[i:i + 1].isspace():
            i += 1
        if i < len(raw) and raw[i:i + 1] == b"#":
            while i < len(raw) and raw[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < len(raw) and not raw[i:i + 1].isspace() and raw[i:i + 1] != b"#":
            i += 1
        if start == i:
            raise ValueError("malformed PGM header")
        tokens.append(raw[start:i])
    return tokens, i


def read_pgm(path) -> np.ndarray:
    """Gray levels of a P2 (ASCII) or P5 (binary) PGM as a float array."""
    raw = Path(path).read_bytes()
    kind = raw[:2]
    if kind not in (b"P2", b"P5"):
        raise ValueError("malformed PGM header: expected P2 or P5")
    try:
        width, height, maxval = (int(t) for t in _pgm_tokens(raw)[0])
        end = _pgm_tokens(raw)[1]
    except ValueError as exc:
        raise ValueError("malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval <= 65535:
        raise ValueError("malformed PGM header")
    count = width * height
    if kind == b"P2":
        values = np.array(raw[end:].split(), dtype=np.float64)
    else:
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        body = raw[end + 1:]
        values = np.frombuffer(body, dtype=dtype, count=min(count, len(body) // np.dtype(dtype).itemsize))
        values = values.astype(np.float64)
    if values.size < count:
        raise ValueError("PGM payload is truncated")
    return values[:count].reshape(height, width)


def write_pgm(path, image, maxval: int = 255) -> None:
    img = np.asarray(image)
    h, w = img.shape
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    Path(path).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode()
                           + np.clip(img, 0, maxval).astype(dtype).tobytes())


def image_dataset(image, provenance: str = "image") -> LabeledDataset:
    """Pixels as ``((x, y) in [0, 1]^2, gray)`` samples.

    Gray levels are mean-centred then divided by their maximal absolute
    value.  ``train_mask`` marks pixels whose column index is odd.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    rows, cols = np.mgrid[0:h, 0:w]
    xs = cols.ravel() / max(w - 1, 1)
    ys = rows.ravel() / max(h - 1, 1)
    vals = img.ravel() - img.mean()
    peak = np.abs(vals).max()
    if peak > 0:
        vals = vals / peak
    return LabeledDataset(np.column_stack([xs, ys]), vals[:, None],
                          provenance=provenance, train_mask=(cols.ravel() % 2 == 1))


def load_pgm(path) -> LabeledDataset:
    return image_dataset(read_pgm(path), provenance=f"pgm:{Path(path).name}")


def synthetic_image(size: int = 64) -> np.ndarray:
    """Smooth 8-bit test picture: two blobs, a ramp and a finer ripple."""
    t = np.linspace(0.0, 1.0, size)
    X, Y = np.meshgrid(t, t)
    img = (np.exp(-((X - 0.3) ** 2 + (Y - 0.35) ** 2) / 0.02)
           + 0.7 * np.exp(-((X - 0.7) ** 2 + (Y - 0.6) ** 2) / 0.01)
           + 0.3 * X + 0.15 * np.sin(12 * np.pi * X) * np.cos(6 * np.pi * Y))
    img = (img - img.min()) / (img.max() - img.min())
    return np.round(255 * img)
