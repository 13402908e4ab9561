import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fpl import spectral
from fpl.datasets import synth_1d

finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


# dft_1d

def test_constant_signal_has_only_mean():
    c = spectral.dft_1d(np.full(16, 2.5))
    assert abs(c[0] - 2.5) < 1e-12 and np.max(np.abs(c[1:])) < 1e-12


def test_cosine_splits_into_two_bins():
    n = 8
    c = np.abs(spectral.dft_1d(np.cos(2 * np.pi * np.arange(n) / n)))
    assert abs(c[1] - 0.5) < 1e-12 and abs(c[7] - 0.5) < 1e-12
    assert np.max(np.delete(c, [1, 7])) < 1e-12


@given(arrays(np.float64, st.integers(1, 64), elements=finite))
@settings(max_examples=50, deadline=None)
def test_parseval(y):
    c = spectral.dft_1d(y)
    assert abs(np.mean(y ** 2) - np.sum(np.abs(c) ** 2)) <= 1e-10 * max(1.0, np.mean(y ** 2))


def test_dft_rejects_empty():
    with pytest.raises(ValueError):
        spectral.dft_1d([])


# principal direction

def test_axis_aligned_points():
    pts = np.column_stack([np.arange(1, 11), np.zeros(10)])
    assert np.allclose(spectral.principal_direction(pts).vector, [1, 0], atol=1e-12)


def test_diagonal_pair():
    d = spectral.principal_direction([[1, 1], [-1, -1]])
    assert np.allclose(d.vector, [1 / math.sqrt(2)] * 2, atol=1e-12)
    assert abs(np.linalg.norm(d.vector) - 1) < 1e-12


def test_matches_dense_eigensolver():
    x = np.random.default_rng(0).normal(size=(100, 5)) * [3, 1, 0.5, 0.2, 0.1]
    d = spectral.principal_direction(x)
    xc = x - x.mean(axis=0)
    _, vecs = np.linalg.eigh(xc.T @ xc / len(x))
    top = vecs[:, -1]
    angle = math.acos(min(1.0, abs(float(top @ d.vector))))
    assert angle < 1e-6
    assert d.vector[np.argmax(np.abs(d.vector))] > 0


def test_identical_points_rejected():
    with pytest.raises(ValueError):
        spectral.principal_direction(np.ones((5, 3)))


# non-uniform transform

def test_single_sample_at_origin():
    c = spectral.nonuniform_ft(np.zeros((1, 3)), [1.0], [1, 0, 0], [0.0, 0.7, 3.0])
    assert np.allclose(c, 1.0)


def test_sine_on_unit_interval():
    x = np.arange(100) / 100
    c = spectral.nonuniform_ft(x[:, None], np.sin(2 * np.pi * x), [1.0], [1.0])
    assert abs(abs(c[0]) - 0.5) < 1e-3


@given(arrays(np.float64, st.integers(2, 40), elements=finite))
@settings(max_examples=30, deadline=None)
def test_uniform_inputs_reproduce_dft(y):
    n = y.size
    x = (np.arange(n) / n)[:, None]
    ks = np.arange(n)
    assert np.max(np.abs(spectral.nonuniform_ft(x, y, [1.0], ks) - spectral.dft_1d(y))) < 1e-12 * max(1, np.abs(y).max())


def test_nonuniform_rejects_empty_grid():
    with pytest.raises(ValueError):
        spectral.nonuniform_ft(np.zeros((2, 1)), [1.0, 2.0], [1.0], [])


def test_frequency_grid_uses_projected_range():
    assert np.allclose(spectral.frequency_grid([0.0, 2.0, 1.0], 3), [0, 0.5, 1.0])


# delta_F

def test_delta_f_examples():
    assert spectral.delta_f(2 + 1j, 2 + 1j) == 0
    assert spectral.delta_f(3.0, 0.0) == 1
    assert spectral.delta_f(1.0, 1 + 1j) == pytest.approx(1.0)


def test_delta_f_undefined():
    with pytest.raises(spectral.UndefinedFrequencyError):
        spectral.delta_f(0.0, 1.0)
    assert np.isnan(spectral.delta_f(1e-13, 1.0, missing="nan"))


@given(finite, finite, finite, finite, st.floats(0.1, 10), st.floats(-3.1, 3.1))
@settings(max_examples=50, deadline=None)
def test_delta_f_is_scale_invariant(yr, yi, hr, hi, r, phi):
    y, h = complex(yr, yi), complex(hr, hi)
    if abs(y) < 1e-3:
        return
    c = r * np.exp(1j * phi)
    assert abs(spectral.delta_f(c * y, c * h) - spectral.delta_f(y, h)) < 1e-12 * max(1, spectral.delta_f(y, h))


# peaks

def test_synthetic_peaks_at_indices_1_3_5():
    y = synth_1d("appA").labels[:, 0]
    spec = spectral.dft_1d(y, np.arange(101))
    assert spectral.select_peak_frequencies(spec, 3) == [1, 3, 5]


def test_monotone_spectrum_has_one_maximum():
    spec = np.linspace(5, 1, 10)
    assert spectral.select_peak_frequencies(spec, 1) == [0]
    with pytest.raises(ValueError):
        spectral.select_peak_frequencies(spec, 2)


def test_equal_peaks_prefer_lower_k():
    spec = [0, 2, 0, 2, 0, 1, 0]
    assert spectral.select_peak_frequencies(spec, 1) == [1]
    assert spectral.select_peak_frequencies(spec, 2) == [1, 3]


@given(arrays(np.float64, st.integers(3, 30), elements=st.floats(0, 10)), st.floats(0.01, 100))
@settings(max_examples=50, deadline=None)
def test_peaks_invariant_under_positive_scaling(spec, s):
    try:
        base = spectral.select_peak_frequencies(spec, 1)
    except ValueError:
        return
    assert spectral.select_peak_frequencies(spec * s, 1) == base


def test_global_maximum_always_included():
    spec = np.abs(np.random.default_rng(1).normal(size=50))
    assert int(np.argmax(spec)) in spectral.select_peak_frequencies(spec, 3)


# Gaussian filter

def test_constant_labels_have_no_high_part():
    x = np.random.default_rng(0).normal(size=(20, 3))
    f = spectral.gaussian_low_high_split(x, np.full(20, 4.0), 0.7)
    assert np.allclose(f.low, 4.0, atol=1e-12) and np.allclose(f.high, 0.0, atol=1e-12)


def test_huge_delta_gives_mean():
    x = np.random.default_rng(1).normal(size=(30, 2))
    y = np.random.default_rng(2).normal(size=30)
    f = spectral.gaussian_low_high_split(x, y, 1e12)
    assert np.max(np.abs(f.low - y.mean())) < 1e-6


def test_two_point_kernel_by_hand():
    f = spectral.gaussian_low_high_split([[0.0], [1.0]], [0.0, 1.0], 0.5)
    assert f.low[0] == pytest.approx(math.exp(-1) / (1 + math.exp(-1)), abs=1e-12)
    assert np.all(f.norms >= 1)


@given(st.floats(0.01, 50))
@settings(max_examples=25, deadline=None)
def test_decomposition_is_exact(delta):
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=(25, 2)), rng.normal(size=(25, 3))
    f = spectral.gaussian_low_high_split(x, y, delta)
    assert np.max(np.abs(f.low + f.high - y)) < 1e-12


def test_smoothing_variance_does_not_grow():
    rng = np.random.default_rng(7)
    x, y = rng.uniform(-2, 2, size=(60, 1)), rng.normal(size=60)
    v = [np.var(spectral.gaussian_low_high_split(x, y, d).low) for d in (0.01, 0.1, 1, 10, 100)]
    assert all(b <= a + 1e-15 for a, b in zip(v, v[1:]))


def test_filter_rejects_non_positive_delta():
    with pytest.raises(ValueError):
        spectral.GaussianFilter(np.zeros((2, 1)), 0.0)


def test_e_low_e_high_examples():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(15, 2)), rng.normal(size=15)
    filt = spectral.GaussianFilter(x, 0.5)
    tgt = filt.split(y)
    assert spectral.e_low_e_high(tgt, filt.split(y)) == (0.0, 0.0)
    assert spectral.e_low_e_high(tgt, filt.split(np.zeros(15))) == pytest.approx((1.0, 1.0))
    out = spectral.FilteredDataset(x, tgt.low, 0.5, tgt.low, np.zeros(15), tgt.norms)
    assert spectral.e_low_e_high(tgt, out) == pytest.approx((0.0, 1.0))


def test_e_low_e_high_zero_denominator():
    filt = spectral.GaussianFilter(np.zeros((3, 1)) + [[0], [1], [2]], 0.5)
    tgt = filt.split(np.ones(3))
    with pytest.raises(ZeroDivisionError):
        spectral.e_low_e_high(tgt, tgt)


# distance and turning epoch

def test_constant_outputs_turn_at_first_epoch():
    d, t = spectral.distance_and_turning_epoch([0, 10, 20], [np.ones(4)] * 3, np.zeros(4))
    assert t == 0 and np.allclose(d, 1.0)


def test_turning_epoch_at_minimum():
    outs = [np.array([math.sqrt(v)]) for v in (3, 2, 1, 2, 3)]
    _, t = spectral.distance_and_turning_epoch([0, 5, 9, 12, 20], outs, np.zeros(1))
    assert t == 9


def test_distance_rejects_empty_trace():
    with pytest.raises(ValueError):
        spectral.distance_and_turning_epoch([], [], np.zeros(1))


# traces and CSV

def test_trace_csv_round_trip(tmp_path):
    tr = spectral.SpectrumTrace(np.array([0.0, 1.0]), np.array([1 + 0j, 0j]))
    tr.add(0, [0.5 + 0.5j, 0.1j])
    tr.add(10, [1 + 0j, 0j])
    tr.to_csv(tmp_path / "s.csv")
    rows = spectral.read_csv(tmp_path / "s.csv")
    assert list(rows[0]) == list(spectral.SPECTRUM_COLUMNS)
    assert rows[1]["delta_F"] == ""  # undefined at a vanishing target
    assert float(rows[2]["delta_F"]) == 0.0 and rows[2]["epoch"] == "10"
    with pytest.raises(ValueError):
        tr.add(10, [0j, 0j])
