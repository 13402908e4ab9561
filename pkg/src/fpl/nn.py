"""Fully-connected networks trained from scratch.

Parameters live in :class:`NetworkParams`; every operation on them is a
plain function returning new arrays, so a params object handed to a probe
is never mutated afterwards.

Shapes follow the row-batch convention: inputs are ``(n, d)`` and layer
``l`` computes ``a @ W.T + b`` with ``W`` of shape ``(width_{l+1}, width_l)``.

The MSE loss carries a factor 1/2, i.e. ``L = mean_i ||h_i - y_i||^2 / 2``,
so reported losses are half the plain mean squared error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

ACTIVATIONS = ("tanh", "relu")
HEADS = ("linear", "softmax")
LOSSES = ("mse", "cross_entropy_softmax")
OPTIMIZERS = ("gd", "sgd", "adam")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class NetworkParams:
    layer_widths: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activations: tuple[str, ...]
    output_head: str = "linear"

    def __post_init__(self):
        widths = self.layer_widths
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
            raise ValueError("need one weight matrix and bias per layer")
        if len(self.activations) != len(widths) - 2:
            raise ValueError("need one activation per hidden layer")
        for act in self.activations:
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
        if self.output_head not in HEADS:
            raise ValueError(f"unknown output head {self.output_head!r}")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (widths[l + 1], widths[l]) or b.shape != (widths[l + 1],):
                raise ValueError(f"layer {l} has shapes {W.shape}, {b.shape}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l} has non-finite entries")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def arrays(self) -> list[np.ndarray]:
        """Weights and biases interleaved as ``[W0, b0, W1, b1, ...]``."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "NetworkParams":
        return NetworkParams(
            self.layer_widths,
            tuple(np.asarray(a, dtype=np.float64) for a in arrays[0::2]),
            tuple(np.asarray(a, dtype=np.float64) for a in arrays[1::2]),
            self.activations,
            self.output_head,
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())


def _normalize_activations(activation, n_hidden):
    if isinstance(activation, str):
        return (activation,) * n_hidden
    acts = tuple(activation)
    if len(acts) != n_hidden:
        raise ValueError(f"expected {n_hidden} activations, got {len(acts)}")
    return acts


def init_network(
    layer_widths: Sequence[int],
    activation="tanh",
    output_head: str = "linear",
    init_std: float = 0.1,
    seed: int = 0,
) -> NetworkParams:
    """Draw every weight and bias i.i.d. from ``Normal(0, init_std**2)``.

    Layers are filled in order (W0, b0, W1, b1, ...) from one
    ``numpy.random.default_rng(seed)`` stream, so equal seeds give
    bit-identical parameters.
    """
    widths = tuple(int(w) for w in layer_widths)
    if len(widths) < 2:
        raise ValueError("layer_widths needs at least input and output widths")
    if any(w < 1 for w in widths):
        raise ValueError("layer widths must be positive")
    if not init_std > 0:
        raise ValueError("init_std must be positive")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0.0, init_std, size=(fan_out, fan_in)))
        biases.append(rng.normal(0.0, init_std, size=fan_out))
    acts = _normalize_activations(activation, len(widths) - 2)
    return NetworkParams(widths, tuple(weights), tuple(biases), acts, output_head)


def _act(name, z):
    if name == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _act_prime(name, z, a):
    if name == "tanh":
        return 1.0 - a * a
    return (z > 0).astype(np.float64)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check_inputs(params, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None] if params.layer_widths[0] == 1 else x[None, :]
    if x.ndim != 2 or x.shape[1] != params.layer_widths[0]:
        raise ValueError(
            f"input dimension {x.shape[-1]} does not match {params.layer_widths[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    return x


def _forward_cache(params, x):
    acts = [x]
    zs = []
    a = x
    last = params.n_layers - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W.T + b
        zs.append(z)
        a = z if l == last else _act(params.activations[l], z)
        acts.append(a)
    return zs, acts


def forward(params: NetworkParams, inputs) -> np.ndarray:
    """Network outputs for a batch; the softmax head returns probabilities."""
    x = _check_inputs(params, inputs)
    zs, _ = _forward_cache(params, x)
    out = zs[-1]
    if params.output_head == "softmax":
        out = softmax(out)
    return out


def _backward(params, zs, acts, dout):
    """Backpropagate ``dL/d(logits)`` through the cached forward pass."""
    grads = [None] * (2 * params.n_layers)
    delta = dout
    for l in range(params.n_layers - 1, -1, -1):
        grads[2 * l] = delta.T @ acts[l]
        grads[2 * l + 1] = delta.sum(axis=0)
        if l > 0:
            da = delta @ params.weights[l]
            delta = da * _act_prime(params.activations[l - 1], zs[l - 1], acts[l])
    return grads


def _labels_for(params, labels, loss_kind, n):
    y = np.asarray(labels)
    c = params.layer_widths[-1]
    if loss_kind == "cross_entropy_softmax":
        if params.output_head != "softmax":
            raise ValueError("cross_entropy_softmax needs a softmax output head")
        if y.ndim == 1 and np.issubdtype(y.dtype, np.integer):
            if y.min() < 0 or y.max() >= c:
                raise ValueError("class index out of range")
            onehot = np.zeros((n, c))
            onehot[np.arange(n), y] = 1.0
            y = onehot
    elif loss_kind == "mse":
        if params.output_head != "linear":
            raise ValueError("mse loss expects a linear output head")
    else:
        raise ValueError(f"unknown loss {loss_kind!r}")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1 and c == 1:
        y = y[:, None]
    if y.shape != (n, c):
        raise ValueError(f"labels of shape {y.shape} do not match outputs ({n}, {c})")
    return y


def loss_and_grad(params: NetworkParams, inputs, labels, loss_kind: str = "mse"):
    """Batch loss and its exact gradient, as a list shaped like ``params.arrays()``.

    ``mse``: ``mean_i ||h_i - y_i||^2 / 2`` on a linear head.
    ``cross_entropy_softmax``: ``-mean_i sum_c y_ic log p_ic`` on a softmax
    head; labels may be one-hot rows or integer class indices.
    """
    x = _check_inputs(params, inputs)
    n = x.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    y = _labels_for(params, labels, loss_kind, n)
    zs, acts = _forward_cache(params, x)
    logits = zs[-1]
    if loss_kind == "mse":
        r = logits - y
        loss = 0.5 * np.sum(r * r) / n
        dout = r / n
    else:
        shifted = logits - logits.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        loss = -np.sum(y * logp) / n
        dout = (np.exp(logp) * y.sum(axis=1, keepdims=True) - y) / n
    return float(loss), _backward(params, zs, acts, dout)


def forward_with_input_grad(params: NetworkParams, x):
    """Outputs ``h`` and ``dh/dx`` of a 1-d-input, 1-d-output net.

    The input derivative is carried forward exactly through every
    activation (tangent propagation), not by finite differences.
    """
    if params.layer_widths[0] != 1 or params.layer_widths[-1] != 1:
        raise ValueError("input gradient needs a 1-d input and 1-d output network")
    x = _check_inputs(params, x)
    cache = _tangent_forward(params, x)
    return cache["z"][-1][:, 0], cache["dz"][-1][:, 0]


def _tangent_forward(params, x):
    a, da = x, np.ones_like(x)
    cache = {"a": [a], "da": [da], "z": [], "dz": []}
    last = params.n_layers - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W.T + b
        dz = da @ W.T
        cache["z"].append(z)
        cache["dz"].append(dz)
        if l < last:
            name = params.activations[l]
            a = _act(name, z)
            s1 = _act_prime(name, z, a)
            da = s1 * dz
            cache["a"].append(a)
            cache["da"].append(da)
    return cache


def backward_with_input_grad(params: NetworkParams, x, dh, ddh):
    """Parameter gradient of ``sum(dh * h + ddh * dh/dx)``.

    ``dh`` and ``ddh`` are the adjoints of the outputs and of their input
    derivatives; both streams are pulled back together.
    """
    x = _check_inputs(params, x)
    c = _tangent_forward(params, x)
    zbar = np.asarray(dh, dtype=np.float64).reshape(-1, 1)
    dzbar = np.asarray(ddh, dtype=np.float64).reshape(-1, 1)
    grads = [None] * (2 * params.n_layers)
    for l in range(params.n_layers - 1, -1, -1):
        a, da = c["a"][l], c["da"][l]
        grads[2 * l] = zbar.T @ a + dzbar.T @ da
        grads[2 * l + 1] = zbar.sum(axis=0)
        if l == 0:
            break
        W = params.weights[l]
        abar = zbar @ W
        dabar = dzbar @ W
        name = params.activations[l - 1]
        z, dz = c["z"][l - 1], c["dz"][l - 1]
        if name == "tanh":
            t = a
            s1 = 1.0 - t * t
            s2 = -2.0 * t * s1
        else:
            s1 = (z > 0).astype(np.float64)
            s2 = np.zeros_like(z)
        zbar = abar * s1 + dabar * s2 * dz
        dzbar = dabar * s1
    return grads


# --------------------------------------------------------------------------
# optimizers


@dataclass(frozen=True)
class TrainConfig:
    loss: str = "mse"
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    batch_size: int | str = "full"
    epochs: int = 100
    init_std: float = 0.1
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size != "full" and int(self.batch_size) < 1:
            raise ValueError("batch_size must be positive or 'full'")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")
        if not self.init_std > 0:
            raise ValueError("init_std must be positive")


@dataclass(frozen=True)
class OptimizerState:
    step: int = 0
    m: tuple | None = None
    v: tuple | None = None


def optimizer_step(state: OptimizerState, params: NetworkParams, grads, config: TrainConfig):
    """Apply one update; returns ``(new_params, new_state)``.

    gd/sgd: ``p - lr * g``.  adam: bias-corrected moment estimates with
    beta1=0.9, beta2=0.999, eps=1e-8.
    """
    arrays = params.arrays()
    if len(grads) != len(arrays) or any(g.shape != p.shape for g, p in zip(grads, arrays)):
        raise ValueError("gradient shape does not match parameters")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient entry")
    lr = config.learning_rate
    if config.optimizer in ("gd", "sgd"):
        new = [p - lr * g for p, g in zip(arrays, grads)]
        return params.with_arrays(new), OptimizerState(state.step + 1)
    t = state.step + 1
    m_prev = state.m or tuple(np.zeros_like(p) for p in arrays)
    v_prev = state.v or tuple(np.zeros_like(p) for p in arrays)
    m = tuple(ADAM_BETA1 * mi + (1 - ADAM_BETA1) * g for mi, g in zip(m_prev, grads))
    v = tuple(ADAM_BETA2 * vi + (1 - ADAM_BETA2) * g * g for vi, g in zip(v_prev, grads))
    c1 = 1 - ADAM_BETA1**t
    c2 = 1 - ADAM_BETA2**t
    new = [
        p - lr * (mi / c1) / (np.sqrt(vi / c2) + ADAM_EPS)
        for p, mi, vi in zip(arrays, m, v)
    ]
    return params.with_arrays(new), OptimizerState(t, m, v)


# --------------------------------------------------------------------------
# training loop

Probe = Callable[[int, NetworkParams], object]
LossFn = Callable[[NetworkParams, np.ndarray, np.ndarray], tuple]


@dataclass
class TrainingTrace:
    epochs: list[int] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)
    probes: dict[str, list] = field(default_factory=dict)
    final_params: NetworkParams | None = None

    def record(self, epoch, loss, probe_values):
        if self.epochs and epoch <= self.epochs[-1]:
            raise ValueError("epoch indices must be strictly increasing")
        self.epochs.append(int(epoch))
        self.losses.append(float(loss))
        for name, value in probe_values.items():
            self.probes.setdefault(name, []).append(value)


def output_probe(probe_inputs) -> Probe:
    """Probe storing the network outputs on a fixed input set."""
    x = np.asarray(probe_inputs, dtype=np.float64)
    return lambda epoch, params: forward(params, x)


def train(
    params: NetworkParams,
    inputs,
    labels,
    config: TrainConfig,
    probes: Mapping[str, Probe] | None = None,
    loss_fn: LossFn | None = None,
) -> TrainingTrace:
    """Run ``config.epochs`` epochs and record loss and probes.

    Records happen at epoch 0 (before any update), every ``record_every``
    epochs, and at the last epoch.  The recorded loss is the full-dataset
    loss of the parameters at that epoch.  ``sgd`` (or any finite
    ``batch_size``) draws one permutation per epoch from a generator
    seeded with ``config.seed``.  ``loss_fn(params, x, y)`` replaces the
    built-in loss when given.
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels)
    n = x.shape[0]
    probes = dict(probes or {})
    if loss_fn is None:
        loss_fn = lambda p, xb, yb: loss_and_grad(p, xb, yb, config.loss)
    batch = n if config.batch_size == "full" else int(config.batch_size)
    if batch > n:
        raise ValueError("batch_size exceeds dataset size")
    if config.optimizer == "gd" and batch != n:
        raise ValueError("gd uses the full batch; use sgd for mini-batches")
    rng = np.random.default_rng(config.seed)
    trace = TrainingTrace()
    state = OptimizerState()

    def snapshot(epoch, loss):
        trace.record(epoch, loss, {k: p(epoch, params) for k, p in probes.items()})

    for epoch in range(config.epochs + 1):
        if batch == n:
            loss, grads = loss_fn(params, x, y)
            if epoch % config.record_every == 0 or epoch == config.epochs:
                snapshot(epoch, loss)
            if epoch == config.epochs:
                break
            params, state = optimizer_step(state, params, grads, config)
        else:
            if epoch % config.record_every == 0 or epoch == config.epochs:
                snapshot(epoch, loss_fn(params, x, y)[0])
            if epoch == config.epochs:
                break
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                _, grads = loss_fn(params, x[idx], y[idx])
                params, state = optimizer_step(state, params, grads, config)
    trace.final_params = params
    return trace


# --------------------------------------------------------------------------
# serialization: JSON header line + little-endian f64 payload


def save_params(params: NetworkParams, path) -> None:
    header = {
        "layer_widths": list(params.layer_widths),
        "activations": list(params.activations),
        "output_head": params.output_head,
        "dtype": "<f8",
        "count": params.n_params,
    }
    payload = params.flat().astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(payload)


def load_params(path) -> NetworkParams:
    raw = Path(path).read_bytes()
    head, _, payload = raw.partition(b"\n")
    header = json.loads(head)
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if flat.size != header["count"]:
        raise ValueError(f"expected {header['count']} values, found {flat.size}")
    widths = header["layer_widths"]
    arrays, pos = [], 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        arrays.append(flat[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in))
        pos += fan_in * fan_out
        arrays.append(flat[pos:pos + fan_out].copy())
        pos += fan_out
    return NetworkParams(
        tuple(widths),
        tuple(arrays[0::2]),
        tuple(arrays[1::2]),
        tuple(header["activations"]),
        header["output_head"],
    )
