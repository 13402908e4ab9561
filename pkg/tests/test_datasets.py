import gzip
import itertools
import math

import numpy as np
import pytest

from fpl import datasets, spectral


# synthetic 1-d

def test_appendix_preset():
    ds = datasets.synth_1d("appA")
    assert ds.n == 201 and datasets.SYNTH_PRESETS["appA"](0.0) == 0.0
    assert abs(ds.labels[100, 0]) < 1e-14  # linspace midpoint is zero up to rounding
    assert ds.inputs[0, 0] == -3.14 and ds.inputs[-1, 0] == 3.14


def test_intro_preset():
    spec = datasets.SYNTH_PRESETS["intro"]
    assert spec(math.pi / 2) == pytest.approx(1.0, abs=1e-15)


def test_appendix_labels_have_three_peak_pairs():
    y = datasets.synth_1d("appA").labels[:, 0]
    mag = np.abs(spectral.dft_1d(y))
    top = set(np.argsort(mag)[::-1][:6])
    assert top == {1, 3, 5, 200, 198, 196}


def test_synth_needs_two_samples():
    with pytest.raises(ValueError):
        datasets.synth_1d(datasets.Synth1D((1.0,), (1.0,), (0.0, 1.0), 1))


def test_synth_is_deterministic():
    assert datasets.digest(datasets.synth_1d()) == datasets.digest(datasets.synth_1d())


# parity

def test_two_dimensional_labels():
    ds = datasets.parity_dataset(datasets.ParitySpec(2))
    table = {tuple(x): y for x, y in zip(ds.inputs, ds.labels[:, 0])}
    assert table == {(1, 1): 1, (1, -1): -1, (-1, 1): -1, (-1, -1): 1}


@pytest.mark.parametrize("d", [1, 3, 8])
def test_full_cube_is_balanced(d):
    ds = datasets.parity_dataset(datasets.ParitySpec(d))
    assert ds.n == 2 ** d and ds.labels.sum() == 0
    assert len({tuple(x) for x in ds.inputs}) == 2 ** d


def test_subset_is_reproducible():
    a = datasets.parity_dataset(datasets.ParitySpec(10, 200, 0))
    b = datasets.parity_dataset(datasets.ParitySpec(10, 200, 0))
    c = datasets.parity_dataset(datasets.ParitySpec(10, 200, 1))
    assert a.n == 200 and np.array_equal(a.inputs, b.inputs)
    assert not np.array_equal(a.inputs, c.inputs)
    assert len({tuple(x) for x in a.inputs}) == 200


def test_subset_larger_than_cube_rejected():
    with pytest.raises(ValueError):
        datasets.ParitySpec(3, 9)


def test_exact_ft_examples():
    assert datasets.parity_exact_ft(10, 0.0) == 0
    assert abs(datasets.parity_exact_ft(10, 0.25)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("d", range(1, 7))
def test_exact_ft_matches_exhaustive_sum(d):
    rng = np.random.default_rng(d)
    corners = np.array(list(itertools.product([-1.0, 1.0], repeat=d)))
    labels = np.prod(corners, axis=1)
    for _ in range(5):
        k = rng.uniform(-1, 1, d)
        brute = np.mean(labels * np.exp(-2j * np.pi * corners @ k))
        assert abs(datasets.parity_exact_ft(d, k) - brute) < 1e-12


@pytest.mark.parametrize("d", [2, 4, 6])
def test_exact_ft_matches_projected_transform(d):
    ds = datasets.parity_dataset(datasets.ParitySpec(d))
    for axis in range(d):
        e = np.zeros(d)
        e[axis] = 1.0
        ks = np.array([0.1, 0.25, 0.4])
        got = spectral.nonuniform_ft(ds.inputs, ds.labels[:, 0], e, ks)
        want = [datasets.parity_exact_ft(d, k * e) for k in ks]
        assert np.max(np.abs(got - want)) < 1e-12


# IDX

def make_idx(tmp_path, n=12, seed=0, gz=False):
    rng = np.random.default_rng(seed)
    images = rng.integers(0, 256, size=(n, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, size=n, dtype=np.uint8)
    ip, lp = tmp_path / "img.idx", tmp_path / "lab.idx"
    datasets.write_idx(ip, images)
    datasets.write_idx(lp, labels)
    if gz:
        lp.write_bytes(gzip.compress(lp.read_bytes()))
    return ip, lp, images, labels


def test_idx_header_constants(tmp_path):
    ip, lp, images, _ = make_idx(tmp_path)
    raw = ip.read_bytes()
    assert raw[:4] == b"\x00\x00\x08\x03" and int.from_bytes(raw[4:8], "big") == 12
    assert lp.read_bytes()[:4] == b"\x00\x00\x08\x01"


def test_idx_round_trip_and_scaling(tmp_path):
    ip, lp, images, labels = make_idx(tmp_path, gz=True)
    ds = datasets.load_idx(ip, lp)
    assert ds.inputs.shape == (12, 784) and ds.inputs.min() >= 0 and ds.inputs.max() <= 1
    assert np.array_equal(ds.inputs[3], images[3].ravel() / 255.0)
    assert np.all(ds.labels.sum(axis=1) == 1) and np.array_equal(ds.classes, labels)
    assert datasets.digest(ds) == datasets.digest(datasets.load_idx(ip, lp))


def test_idx_subset_is_seeded(tmp_path):
    ip, lp, _, _ = make_idx(tmp_path)
    a = datasets.load_idx(ip, lp, subset=5, seed=3)
    b = datasets.load_idx(ip, lp, subset=5, seed=3)
    assert a.n == 5 and datasets.digest(a) == datasets.digest(b)
    with pytest.raises(ValueError):
        datasets.load_idx(ip, lp, subset=13)


def test_idx_errors(tmp_path):
    ip, lp, _, _ = make_idx(tmp_path)
    with pytest.raises(ValueError, match="magic"):
        datasets.load_idx(lp, ip)
    trunc = tmp_path / "trunc.idx"
    trunc.write_bytes(ip.read_bytes()[:-10])
    with pytest.raises(ValueError, match="truncated"):
        datasets.load_idx(trunc, lp)
    other = tmp_path / "other.idx"
    datasets.write_idx(other, np.zeros(11, dtype=np.uint8))
    with pytest.raises(ValueError, match="labels"):
        datasets.load_idx(ip, other)
    with pytest.raises(FileNotFoundError):
        datasets.load_idx(tmp_path / "missing", lp)


# PGM

def test_constant_image_centres_to_zero():
    ds = datasets.image_dataset(np.full((5, 6), 9.0))
    assert np.all(ds.labels == 0)


def test_labels_are_max_normalised():
    ds = datasets.image_dataset(np.random.default_rng(0).integers(0, 255, (7, 5)))
    assert np.max(np.abs(ds.labels)) == pytest.approx(1.0) and abs(ds.labels.mean()) < 1e-12
    assert ds.inputs.min() == 0 and ds.inputs.max() == 1


def test_training_split_uses_odd_columns(tmp_path):
    ramp = np.tile(np.arange(4) * 50, (4, 1))
    path = tmp_path / "ramp.pgm"
    datasets.write_pgm(path, ramp)
    ds = datasets.load_pgm(path)
    cols = np.round(ds.inputs[ds.train_mask, 0] * 3).astype(int)
    assert set(cols) == {1, 3} and ds.train_mask.sum() == 8


def test_ascii_and_binary_agree(tmp_path):
    img = np.random.default_rng(1).integers(0, 1000, (3, 4))
    binary = tmp_path / "b.pgm"
    datasets.write_pgm(binary, img, maxval=1000)
    ascii_ = tmp_path / "a.pgm"
    body = "\n".join(" ".join(str(v) for v in row) for row in img)
    ascii_.write_text(f"P2\n# comment\n4 3\n1000\n{body}\n")
    assert np.array_equal(datasets.read_pgm(binary), img)
    assert np.array_equal(datasets.read_pgm(ascii_), img)


@pytest.mark.parametrize("raw", [b"P6\n1 1\n255\n\x00", b"P5\n2\n", b"P5\nx 2 255\n", b"P2\n2 2 255\n1 2 3"])
def test_malformed_pgm(tmp_path, raw):
    path = tmp_path / "bad.pgm"
    path.write_bytes(raw)
    with pytest.raises(ValueError):
        datasets.read_pgm(path)


def test_dataset_shape_checks():
    with pytest.raises(ValueError):
        datasets.LabeledDataset(np.zeros((3, 1)), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        datasets.LabeledDataset(np.zeros((0, 1)), np.zeros((0, 1)))
