"""Closed-form Fourier analysis of a one-hidden-layer tanh network.

The network is ``h(x) = sum_j a_j tanh(w_j x + b_j)`` and the transform
convention is ``f_hat(k) = int f(x) exp(-i k x) dx`` (angular frequency).
For ``k != 0``::

    FT[tanh(w x + b)](k) = (2 pi i / |w|) exp(i b k / w) / (exp(-pi k / 2w) - exp(pi k / 2w))

The reciprocal ``1 / (exp(s) - exp(-s))`` with ``s = pi k / (2 w)`` is
evaluated as ``sgn(s) exp(-|s|) / (1 - exp(-2|s|))`` so tiny ``|w|``
underflows gracefully instead of overflowing.  Gradient magnitudes are
also available in log form for the Monte-Carlo estimators, where
``exp(-|s|)`` routinely drops below the smallest double.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .nn import NetworkParams


def _theta(params):
    """``(a, w, b)`` arrays from a NetworkParams or an ``(a, w, b)`` triple."""
    if isinstance(params, NetworkParams):
        if (len(params.layer_widths) != 3 or params.layer_widths[0] != 1
                or params.layer_widths[2] != 1 or params.activations != ("tanh",)
                or params.output_head != "linear"):
            raise ValueError("closed forms cover 1-m-1 tanh networks with a linear head")
        # the output bias only adds a delta at k = 0, outside the k != 0 domain
        return (params.weights[1][0].copy(), params.weights[0][:, 0].copy(),
                params.biases[0].copy())
    a, w, b = (np.atleast_1d(np.asarray(v, dtype=np.float64)) for v in params)
    if not (a.shape == w.shape == b.shape):
        raise ValueError("a, w, b must have equal length")
    return a, w, b


def _check(w, k):
    if np.any(w == 0):
        raise ValueError("w = 0 makes the unit constant in x; its transform is a delta")
    if k == 0:
        raise ValueError("k = 0 is distributional and excluded")


def _inv_two_sinh(s):
    """``1 / (exp(s) - exp(-s))`` without overflow."""
    t = np.abs(s)
    return np.sign(s) * np.exp(-t) / -np.expm1(-2 * t)


def _log_inv_two_sinh(s):
    """``log|1 / (exp(s) - exp(-s))|``."""
    t = np.abs(s)
    return -t - np.log(-np.expm1(-2 * t))


def _coth(s):
    t = np.abs(s)
    e = np.exp(-2 * t)
    return np.sign(s) * (1 + e) / (1 - e)


def tanh_unit_ft(a, w, b, k) -> complex:
    """Fourier transform of ``a tanh(w x + b)`` at angular frequency ``k != 0``."""
    _check(np.asarray(w), k)
    s = np.pi * k / (2 * w)
    return complex(-a * (2j * np.pi / abs(w)) * np.exp(1j * b * k / w) * _inv_two_sinh(s))


def network_ft(params, k) -> complex:
    """Fourier transform of the whole one-hidden-layer network at ``k != 0``."""
    a, w, b = _theta(params)
    _check(w, k)
    s = np.pi * k / (2 * w)
    terms = -a * (2j * np.pi / np.abs(w)) * np.exp(1j * b * k / w) * _inv_two_sinh(s)
    return complex(np.sum(terms))


@dataclass(frozen=True)
class FreqLossState:
    k: float
    deviation: complex
    target: complex

    @property
    def amplitude(self) -> float:
        return abs(self.deviation)

    @property
    def phase(self) -> float:
        return float(np.angle(self.deviation))

    @property
    def loss(self) -> float:
        return 0.5 * self.amplitude ** 2


def freq_state(params, k, target) -> FreqLossState:
    return FreqLossState(float(k), network_ft(params, k) - complex(target), complex(target))


def _grad_factors(a, w, b, k, phase):
    """Bracket factors ``F`` with ``dL/dtheta = F * E0`` for ``(a, w, b)``.

    ``E0 = sgn(w) A / (exp(s) - exp(-s))``.  The ``b`` factor is
    ``2 pi a k cos(b k / w - phi) / w^2``.
    """
    s = np.pi * k / (2 * w)
    gamma = b * k / w - phase
    sin_g, cos_g = np.sin(gamma), np.cos(gamma)
    fa = 2 * np.pi / w * sin_g
    fw = (sin_g * (np.pi ** 2 * a * k / w ** 3 * _coth(s) - 2 * np.pi * a / w ** 2)
          - 2 * np.pi * a * b * k / w ** 3 * cos_g)
    fb = 2 * np.pi * a * k / w ** 2 * cos_g
    return fa, fw, fb


def freq_loss_and_grads(params, k, target):
    """``L(k) = |h_hat(k) - f_hat(k)|^2 / 2`` and its gradients.

    Returns ``(L, dL/da, dL/dw, dL/db)`` with one entry per hidden unit.
    Where the deviation vanishes the phase is undefined; the gradients
    are then the continuous extension, zero.
    """
    a, w, b = _theta(params)
    _check(w, k)
    state = freq_state((a, w, b), k, target)
    amp = state.amplitude
    if amp == 0.0:
        z = np.zeros_like(a)
        return 0.0, z, z.copy(), z.copy()
    s = np.pi * k / (2 * w)
    e0 = np.sign(w) * amp * _inv_two_sinh(s)
    fa, fw, fb = _grad_factors(a, w, b, k, state.phase)
    return state.loss, fa * e0, fw * e0, fb * e0


def log_abs_freq_grads(a, w, b, k, target):
    """Signs and log-magnitudes of the gradients, vectorized over rows of ``w``.

    ``w`` may be ``(samples, m)``; ``a`` and ``b`` broadcast against it.
    Returns ``(sign, logabs)`` each of shape ``(3, samples, m)`` in the
    order ``a, w, b``.
    """
    a = np.asarray(a, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, w, b = np.broadcast_arrays(a, w, b)
    s = np.pi * k / (2 * w)
    terms = -a * (2j * np.pi / np.abs(w)) * np.exp(1j * b * k / w) * _inv_two_sinh(s)
    dev = terms.sum(axis=-1) - complex(target)
    amp = np.abs(dev)[..., None]
    phase = np.angle(dev)[..., None]
    factors = np.stack(_grad_factors(a, w, b, k, phase))
    with np.errstate(divide="ignore"):
        log_e0 = np.log(amp) + _log_inv_two_sinh(s)
        logabs = np.log(np.abs(factors)) + log_e0
    sign = np.sign(factors) * np.sign(w) * np.sign(s)
    return sign, logabs


# --------------------------------------------------------------------------
# Monte-Carlo verification


@dataclass(frozen=True)
class BallSampler:
    dim: int
    radius: float
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")


MIN_ABS_W = 1e-8


def sample_ball_uniform(sampler: BallSampler, count: int) -> np.ndarray:
    """Uniform draws from the centred ball: isotropic direction times
    ``radius * U^(1/m)``.  Rows with any ``|w_j| < 1e-8`` are redrawn."""
    rng = np.random.default_rng(sampler.seed)
    m = sampler.dim
    out = np.empty((0, m))
    while out.shape[0] < count:
        need = count - out.shape[0]
        g = rng.standard_normal((need, m))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = sampler.radius * rng.random(need) ** (1.0 / m)
        w = g * r[:, None]
        w = w[np.all(np.abs(w) >= MIN_ABS_W, axis=1)]
        out = np.vstack([out, w])
    return out


@dataclass(frozen=True)
class RatioEstimate:
    ratio: float
    ci_low: float
    ci_high: float
    hits: int
    samples: int


def wilson(hits: int, samples: int, confidence: float = 0.95) -> RatioEstimate:
    ci = stats.binomtest(int(hits), int(samples)).proportion_ci(confidence, "wilson")
    return RatioEstimate(hits / samples, float(ci.low), float(ci.high), int(hits), int(samples))


@dataclass(frozen=True)
class TheoremEvents:
    dominance: np.ndarray   # |dL(k1)/dtheta| > |dL(k2)/dtheta| for all (l, j)
    faster: np.ndarray      # dL(k1)/dt <= 0 and dL(k1)/dt <= dL(k2)/dt
    dissipative: np.ndarray  # d(L(k1) + L(k2))/dt <= 0


def theorem_events(W, a, b, k1, k2, f1=1.0, f2=1.0, chunk: int = 20000) -> TheoremEvents:
    """Per-sample events for both priority theorems.

    Gradient-flow rates follow ``dL(k1)/dt = -sum g1^2 - sum g1 g2`` and
    symmetrically for ``k2``; products are formed after rescaling all
    gradients of a sample by its largest magnitude, which preserves signs
    and orderings while avoiding underflow.
    """
    if not 0 < abs(k1) < abs(k2):
        raise ValueError("need 0 < |k1| < |k2|")
    if abs(f1) == 0 or abs(f2) == 0:
        raise ValueError("target amplitudes must be non-zero")
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    dom, fast, diss = [], [], []
    for start in range(0, W.shape[0], chunk):
        w = W[start:start + chunk]
        s1, l1 = log_abs_freq_grads(a, w, b, k1, f1)
        s2, l2 = log_abs_freq_grads(a, w, b, k2, f2)
        dom.append(np.all(l1 > l2, axis=(0, 2)))
        top = np.maximum(l1.max(axis=(0, 2)), l2.max(axis=(0, 2)))
        top = np.where(np.isfinite(top), top, 0.0)[None, :, None]
        g1 = s1 * np.exp(l1 - top)
        g2 = s2 * np.exp(l2 - top)
        rate1 = -np.sum(g1 * g1 + g1 * g2, axis=(0, 2))
        rate2 = -np.sum(g2 * g2 + g1 * g2, axis=(0, 2))
        fast.append((rate1 <= 0) & (rate1 <= rate2))
        diss.append(-np.sum((g1 + g2) ** 2, axis=(0, 2)) <= 0)
    return TheoremEvents(np.concatenate(dom), np.concatenate(fast), np.concatenate(diss))


def _default_ab(m, a, b):
    a = np.full(m, 1.0) if a is None else np.asarray(a, dtype=np.float64)
    b = np.full(m, 0.5) if b is None else np.asarray(b, dtype=np.float64)
    return a, b


def theorem1_dominance_ratio(k1, k2, f1=1.0, f2=1.0, a=None, b=None, delta=0.25,
                             samples=100_000, m=4, seed=0) -> RatioEstimate:
    """Fraction of the ball where every low-frequency gradient dominates."""
    a, b = _default_ab(m, a, b)
    W = sample_ball_uniform(BallSampler(m, delta, seed), samples)
    ev = theorem_events(W, a, b, k1, k2, f1, f2)
    return wilson(int(ev.dominance.sum()), samples)


def theorem2_event_ratio(k1, k2, f1=1.0, f2=1.0, a=None, b=None, delta=0.25,
                         samples=100_000, m=4, seed=0) -> RatioEstimate:
    """Fraction of the ball where ``L(k1)`` decreases faster than ``L(k2)``."""
    a, b = _default_ab(m, a, b)
    W = sample_ball_uniform(BallSampler(m, delta, seed), samples)
    ev = theorem_events(W, a, b, k1, k2, f1, f2)
    return wilson(int(ev.faster.sum()), samples)


# --------------------------------------------------------------------------
# ideal convergence model


@dataclass(frozen=True)
class IdealModel:
    """``h(x, t) = c0 (1 - e^{-a0 t}) + sum_k (1 - e^{-a_k t}) c_k sin((2k - 1) x)``."""

    amplitudes: tuple[float, ...]
    rates: tuple[float, ...]
    offset: float = 0.0
    offset_rate: float = 1.0

    def __post_init__(self):
        if len(self.amplitudes) != len(self.rates):
            raise ValueError("amplitudes and rates differ in length")
        if any(r <= 0 for r in self.rates) or self.offset_rate <= 0:
            raise ValueError("rates must be positive")

    @property
    def frequencies(self) -> np.ndarray:
        return 2 * np.arange(1, len(self.rates) + 1) - 1.0

    def target(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        modes = np.sin(np.outer(x, self.frequencies))
        return self.offset + modes @ np.asarray(self.amplitudes)


def ideal_simulate(model: IdealModel, times, x) -> np.ndarray:
    """Closed-form fit at every time; shape ``(len(times), len(x))``."""
    t = np.asarray(times, dtype=np.float64)[:, None]
    x = np.asarray(x, dtype=np.float64)
    modes = np.sin(np.outer(x, model.frequencies))
    weights = (1 - np.exp(-t * np.asarray(model.rates))) * np.asarray(model.amplitudes)
    return model.offset * (1 - np.exp(-model.offset_rate * t)) + weights @ modes.T
