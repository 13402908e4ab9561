"""Fourier-domain diagnostics of a fit.

Conventions
-----------
* ``dft_1d`` and ``nonuniform_ft`` use ``yhat_k = (1/n) sum_i y_i exp(-2 pi i k x_i)``;
  for ``dft_1d`` the sample positions are ``x_i = i/n`` and ``k`` is an index.
* Frequencies on a projected coordinate are in cycles per unit of that
  coordinate.
* The Gaussian filter width ``delta`` is a *variance*:
  ``G(r) = exp(-|r|^2 / (2 delta))``.  It is not a standard deviation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

UNDEFINED_TOL = 1e-12


class UndefinedFrequencyError(ValueError):
    """Relative error requested where the target coefficient vanishes."""


# --------------------------------------------------------------------------
# transforms


def dft_1d(samples, ks=None, block: int = 256) -> np.ndarray:
    """Direct O(n^2) DFT, normalized by ``1/n``; coefficient 0 is the mean.

    ``ks`` restricts the output to selected (possibly non-integer) indices.
    """
    y = np.asarray(samples)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("dft_1d needs a non-empty 1-d signal")
    n = y.size
    ks = np.arange(n) if ks is None else np.asarray(ks, dtype=np.float64)
    pos = np.arange(n) / n
    return _direct_sum(pos, y, ks, block)


def _direct_sum(pos, y, ks, block=256):
    n = pos.size
    out = np.empty(ks.shape, dtype=np.complex128)
    flat_k = ks.ravel()
    flat_out = out.ravel()
    for start in range(0, flat_k.size, block):
        kb = flat_k[start:start + block]
        phase = np.exp(-2j * np.pi * np.outer(kb, pos))
        flat_out[start:start + block] = phase @ y / n
    return out


@dataclass(frozen=True)
class PrincipalDirection:
    vector: np.ndarray
    eigenvalue: float


def principal_direction(inputs, tol: float = 1e-14, max_iter: int = 100_000,
                        seed: int = 0) -> PrincipalDirection:
    """Top eigenvector of the centred input covariance by power iteration.

    The sign is fixed so that the largest-magnitude entry is positive.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("need at least two input points")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / x.shape[0]
    scale = np.abs(cov).max()
    if scale == 0.0:
        raise ValueError("inputs have zero covariance")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(cov.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = cov @ v
        w /= np.linalg.norm(w)
        if w @ v < 0:
            w = -w
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    i = np.argmax(np.abs(v))
    if v[i] < 0:
        v = -v
    v = v / np.linalg.norm(v)
    return PrincipalDirection(v, float(v @ cov @ v))


def project(inputs, direction) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    p = np.asarray(getattr(direction, "vector", direction), dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if abs(np.linalg.norm(p) - 1.0) > 1e-9:
        raise ValueError("projection direction must be a unit vector")
    return x @ p


def nonuniform_ft(inputs, labels, direction, ks) -> np.ndarray:
    """Exact non-uniform FT of scalar labels along a unit direction."""
    proj = project(inputs, direction)
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValueError("labels must be scalar per sample; pick one output component")
    ks = np.asarray(ks, dtype=np.float64)
    if proj.size == 0 or ks.size == 0:
        raise ValueError("empty dataset or frequency grid")
    if y.shape[0] != proj.shape[0]:
        raise ValueError("labels and inputs differ in length")
    return _direct_sum(proj, y, ks)


def frequency_grid(projected, count: int) -> np.ndarray:
    """``k in {0, 1/L, 2/L, ...}`` where ``L`` is the range of the projections."""
    span = float(np.ptp(np.asarray(projected)))
    if span <= 0:
        raise ValueError("projected inputs have zero range")
    return np.arange(count) / span


def delta_f(yhat, hhat, missing: str = "raise", tol: float = UNDEFINED_TOL):
    """Relative spectral error ``|hhat - yhat| / |yhat|``.

    Where ``|yhat| <= tol`` the value is undefined: ``missing="raise"``
    raises :class:`UndefinedFrequencyError`, ``missing="nan"`` reports NaN.
    """
    yhat = np.asarray(yhat, dtype=np.complex128)
    hhat = np.asarray(hhat, dtype=np.complex128)
    mag = np.abs(yhat)
    bad = mag <= tol
    if np.any(bad) and missing == "raise":
        raise UndefinedFrequencyError("target coefficient is below tolerance")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(bad, np.nan, np.abs(hhat - yhat) / np.where(bad, 1.0, mag))
    return float(out) if out.ndim == 0 else out


def select_peak_frequencies(spectrum, count: int, ks=None) -> list:
    """The ``count`` largest strict local maxima of ``|spectrum|``.

    End points count as maxima when they exceed their single neighbour.
    Ties in height go to the lower index.  The result is sorted by
    frequency; it always contains the global maximum.
    """
    amp = np.abs(np.asarray(spectrum))
    if amp.size == 0:
        raise ValueError("empty spectrum")
    n = amp.size
    if n == 1:
        peaks = [0]
    else:
        left = np.concatenate(([-np.inf], amp[:-1]))
        right = np.concatenate((amp[1:], [-np.inf]))
        peaks = np.flatnonzero((amp > left) & (amp > right)).tolist()
    if count > len(peaks):
        raise ValueError(f"requested {count} peaks but only {len(peaks)} local maxima exist")
    # stable sort keeps lower indices first among equal heights
    chosen = sorted(sorted(peaks, key=lambda i: -amp[i])[:count])
    if ks is None:
        return chosen
    ks = np.asarray(ks)
    return [ks[i].item() for i in chosen]


# --------------------------------------------------------------------------
# Gaussian filtering


@dataclass(frozen=True)
class FilteredDataset:
    inputs: np.ndarray
    labels: np.ndarray
    delta: float
    low: np.ndarray
    high: np.ndarray
    norms: np.ndarray


class GaussianFilter:
    """Row-normalized Gaussian kernel on a fixed input set.

    The kernel matrix is built once so that targets and every recorded
    network output are split with exactly the same weights.  The self
    term ``j = i`` is included, hence every normalization is at least 1.
    """

    def __init__(self, inputs, delta: float, block: int = 1024):
        if not delta > 0:
            raise ValueError("filter width delta must be positive")
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        self.inputs = x
        self.delta = float(delta)
        n = x.shape[0]
        sq = np.einsum("ij,ij->i", x, x)
        kernel = np.empty((n, n))
        for start in range(0, n, block):
            rows = slice(start, start + block)
            d2 = sq[rows, None] + sq[None, :] - 2.0 * x[rows] @ x.T
            np.maximum(d2, 0.0, out=d2)
            # exact zero on the diagonal regardless of cancellation
            idx = np.arange(start, min(start + block, n))
            d2[idx - start, idx] = 0.0
            kernel[rows] = np.exp(-d2 / (2.0 * self.delta))
        self.norms = kernel.sum(axis=1)
        kernel /= self.norms[:, None]
        self.weights = kernel

    def low(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        return self.weights @ v

    def split(self, labels) -> FilteredDataset:
        y = np.asarray(labels, dtype=np.float64)
        low = self.low(y)
        return FilteredDataset(self.inputs, y, self.delta, low, y - low, self.norms)


def gaussian_low_high_split(inputs, labels, delta: float) -> FilteredDataset:
    """Split labels into Gaussian-smoothed and residual parts."""
    return GaussianFilter(inputs, delta).split(labels)


def e_low_e_high(targets: FilteredDataset, outputs: FilteredDataset) -> tuple[float, float]:
    """Relative L2 errors of the low and high parts of the outputs."""
    if targets.delta != outputs.delta:
        raise ValueError("targets and outputs were filtered with different widths")
    num_low = np.sum((targets.low - outputs.low) ** 2)
    num_high = np.sum((targets.high - outputs.high) ** 2)
    den_low = np.sum(targets.low ** 2)
    den_high = np.sum(targets.high ** 2)
    if den_low == 0 or den_high == 0:
        raise ZeroDivisionError("target low or high part is identically zero")
    return float(np.sqrt(num_low / den_low)), float(np.sqrt(num_high / den_high))


def distance_and_turning_epoch(epochs, outputs, filtered_labels):
    """Mean squared distance of each recorded output to the filtered labels.

    Returns ``(distances, turning_epoch)`` where the turning epoch attains
    the global minimum (earliest epoch on ties).
    """
    epochs = list(epochs)
    if not epochs:
        raise ValueError("empty trace")
    target = np.asarray(filtered_labels, dtype=np.float64)
    dist = np.array([
        np.mean((np.asarray(h, dtype=np.float64).reshape(target.shape) - target) ** 2)
        for h in outputs
    ])
    if dist.size != len(epochs):
        raise ValueError("need one output per epoch")
    return dist, epochs[int(np.argmin(dist))]


# --------------------------------------------------------------------------
# traces


@dataclass
class SpectrumTrace:
    """Per-epoch coefficients of the fit at a fixed set of frequencies."""

    ks: np.ndarray
    yhat: np.ndarray
    epochs: list = field(default_factory=list)
    hhat: list = field(default_factory=list)

    def add(self, epoch: int, hhat) -> None:
        if self.epochs and epoch <= self.epochs[-1]:
            raise ValueError("epochs must be strictly increasing")
        self.epochs.append(int(epoch))
        self.hhat.append(np.asarray(hhat, dtype=np.complex128))

    @property
    def delta(self) -> np.ndarray:
        """Array of shape (epochs, frequencies); NaN where undefined."""
        if not self.hhat:
            return np.empty((0, len(self.ks)))
        return delta_f(self.yhat[None, :], np.vstack(self.hhat), missing="nan")

    def rows(self):
        d = self.delta
        for e_i, epoch in enumerate(self.epochs):
            for k_i, k in enumerate(self.ks):
                yield {
                    "epoch": epoch,
                    "k": float(k),
                    "re_yhat": self.yhat[k_i].real,
                    "im_yhat": self.yhat[k_i].imag,
                    "re_hhat": self.hhat[e_i][k_i].real,
                    "im_hhat": self.hhat[e_i][k_i].imag,
                    "delta_F": d[e_i, k_i],
                }

    def to_csv(self, path) -> None:
        write_csv(path, SPECTRUM_COLUMNS, self.rows())


SPECTRUM_COLUMNS = ("epoch", "k", "re_yhat", "im_yhat", "re_hhat", "im_hhat", "delta_F")
FILTER_COLUMNS = ("epoch", "delta", "e_low", "e_high", "dist")


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return ""
        return repr(v)
    return str(v)


def write_csv(path, columns, rows) -> None:
    """Write rows (mappings) with a header; NaN becomes an empty cell."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row[c]) for c in columns])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
