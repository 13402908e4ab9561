"""1-d Poisson problem: central differences, Jacobi, and a network solver.

The model problem is ``-u'' = g`` on ``[-1, 1]`` with ``u(-1) = u(1) = 0``,
discretized on ``n + 1`` uniform nodes (``n`` intervals, ``dx = 2/n``).
Diagnostics are taken on the nodes with :func:`fpl.spectral.nonuniform_ft`
on the frequency grid ``k = j / (oversample * L)`` cycles per unit, ``L = 2``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import nn, spectral

SOURCE_FREQUENCIES = (1.0, 4.0, 8.0, 24.0)  # rad / unit, present in the source


@dataclass(frozen=True)
class PoissonProblem:
    source: Callable[[np.ndarray], np.ndarray]
    interval: tuple[float, float] = (-1.0, 1.0)
    boundary: tuple[float, float] = (0.0, 0.0)
    reference: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"

    def __post_init__(self):
        a, b = self.interval
        if not b > a:
            raise ValueError("interval must satisfy b > a")


@dataclass(frozen=True)
class GridField:
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.nodes.shape != self.values.shape or self.nodes.size < 2:
            raise ValueError("nodes and values must be equal-length arrays of >= 2 points")
        steps = np.diff(self.nodes)
        if np.max(np.abs(steps - steps[0])) > 1e-12:
            raise ValueError("grid spacing is not uniform")

    @property
    def dx(self) -> float:
        return float(self.nodes[1] - self.nodes[0])


def grid_nodes(problem: PoissonProblem, n: int) -> np.ndarray:
    a, b = problem.interval
    return a + (b - a) * np.arange(n + 1) / n


def _bench_g(x):
    return np.sin(x) + 4 * np.sin(4 * x) - 8 * np.sin(8 * x) + 16 * np.sin(24 * x)


def _bench_g0(x):
    return np.sin(x) + np.sin(4 * x) / 4 - np.sin(8 * x) / 8 + np.sin(24 * x) / 36


BENCH_C1 = (_bench_g0(-1.0) - _bench_g0(1.0)) / 2
BENCH_C0 = -(_bench_g0(-1.0) + _bench_g0(1.0)) / 2


def _bench_u(x):
    x = np.asarray(x, dtype=np.float64)
    return _bench_g0(x) + BENCH_C1 * x + BENCH_C0


def benchmark_problem() -> PoissonProblem:
    """``g = sin x + 4 sin 4x - 8 sin 8x + 16 sin 24x`` with its closed-form solution."""
    return PoissonProblem(_bench_g, (-1.0, 1.0), (0.0, 0.0), _bench_u, "paper-poisson")


def diagnostic_grid(problem: PoissonProblem, count: int = 40, oversample: int = 2) -> np.ndarray:
    a, b = problem.interval
    return np.arange(count) / (oversample * (b - a))


def reference_solution(n: int = 1000, count: int = 40, oversample: int = 2):
    """The benchmark problem, plus the spectral peaks of its solution.

    Each source frequency (1, 4, 8, 24 rad/unit) is mapped to the nearest
    local maximum of ``|u_hat|`` on the diagnostic grid; duplicates merge.
    Returns ``(problem, peaks)`` with peaks in cycles per unit.
    """
    problem = benchmark_problem()
    x = grid_nodes(problem, n)
    ks = diagnostic_grid(problem, count, oversample)
    amp = np.abs(spectral.nonuniform_ft(x, problem.reference(x), [1.0], ks))
    left = np.concatenate(([-np.inf], amp[:-1]))
    right = np.concatenate((amp[1:], [-np.inf]))
    maxima = ks[(amp > left) & (amp > right)]
    peaks = sorted({float(maxima[np.argmin(np.abs(maxima - w / (2 * np.pi)))])
                    for w in SOURCE_FREQUENCIES})
    return problem, peaks


# --------------------------------------------------------------------------
# central differences and Jacobi


def assemble_system(problem: PoissonProblem, n: int):
    """Tridiagonal ``A`` (bands) and right-hand side on the interior nodes.

    ``A`` has 2 on the diagonal and -1 off it; ``rhs_i = dx^2 g(x_i)`` plus
    the Dirichlet values on the first and last rows.
    """
    if n < 2:
        raise ValueError("need n >= 2 intervals")
    x = grid_nodes(problem, n)
    dx = x[1] - x[0]
    m = n - 1
    diag = np.full(m, 2.0)
    off = np.full(m - 1, -1.0)
    rhs = dx * dx * problem.source(x[1:-1])
    rhs[0] += problem.boundary[0]
    rhs[-1] += problem.boundary[1]
    return (off, diag, off.copy()), rhs


def dense_matrix(bands) -> np.ndarray:
    lower, diag, upper = bands
    return np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)


@dataclass(frozen=True)
class JacobiState:
    u: np.ndarray
    rhs: np.ndarray
    t: int = 0

    def __post_init__(self):
        if self.u.shape != self.rhs.shape:
            raise ValueError("iterate and right-hand side differ in length")


def jacobi_init(problem: PoissonProblem, n: int, u0=None) -> JacobiState:
    _, rhs = assemble_system(problem, n)
    u = np.zeros(n - 1) if u0 is None else np.array(u0, dtype=np.float64)
    return JacobiState(u, rhs, 0)


def jacobi_iterate(state: JacobiState) -> JacobiState:
    """One synchronous sweep ``u_i <- (u_{i-1} + u_{i+1} + rhs_i) / 2``."""
    u = state.u
    padded = np.concatenate(([0.0], u, [0.0]))
    new = (padded[:-2] + padded[2:] + state.rhs) / 2
    return JacobiState(new, state.rhs, state.t + 1)


def jacobi_sweeps(state: JacobiState, count: int) -> JacobiState:
    """``count`` sweeps with double buffering; identical to repeated
    :func:`jacobi_iterate`."""
    m = state.u.size
    cur = np.zeros(m + 2)
    nxt = np.zeros(m + 2)
    cur[1:-1] = state.u
    rhs = state.rhs
    for _ in range(count):
        np.add(cur[:-2], cur[2:], out=nxt[1:-1])
        nxt[1:-1] += rhs
        nxt[1:-1] /= 2
        cur, nxt = nxt, cur
    return JacobiState(cur[1:-1].copy(), rhs, state.t + count)


def jacobi_spectrum(n: int):
    """Eigenpairs of ``R_J = D^{-1}(L + U)``: ``lambda_k = cos(k pi / n)``,
    ``v_{k,i} = sin(i k pi / n)`` for ``k, i = 1..n-1``.

    Returns ``(lambdas, V)`` with ``V[k-1]`` the k-th eigenvector.  For
    ``k < n/2`` the eigenvalue shrinks as ``k`` grows, so low modes of the
    error decay slowest.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    k = np.arange(1, n)
    lam = np.cos(k * np.pi / n)
    V = np.sin(np.outer(k, k) * np.pi / n)
    return lam, V


def mode_coefficients(error, n: int) -> np.ndarray:
    """Coefficients ``alpha_k`` of an interior error vector in the sine basis."""
    _, V = jacobi_spectrum(n)
    # rows of V are orthogonal with squared norm n/2
    return V @ np.asarray(error) * (2.0 / n)


def sup_norm_error(h, u_ref) -> float:
    h = np.asarray(h, dtype=np.float64)
    if h.size == 0:
        raise ValueError("empty field")
    return float(np.max(np.abs(h - np.asarray(u_ref, dtype=np.float64))))


# --------------------------------------------------------------------------
# variational network solver


def variational_loss(params: nn.NetworkParams, nodes, source_values, beta: float = 10.0):
    """Energy ``sum_{i=1}^{n-1} (|h'(x_i)|^2/2 - g_i h(x_i)) dx + beta (h(x_0)^2 + h(x_n)^2)``.

    ``h'`` is the exact input derivative of the network.  Returns the value
    and its parameter gradient (shaped like ``params.arrays()``).
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    x = np.asarray(nodes, dtype=np.float64).reshape(-1)
    g = np.asarray(source_values, dtype=np.float64).reshape(-1)
    if x.size < 3 or g.shape != x.shape:
        raise ValueError("need matching node and source arrays with >= 3 nodes")
    dx = x[1] - x[0]
    h, dh = nn.forward_with_input_grad(params, x[:, None])
    inner = slice(1, -1)
    value = (np.sum(0.5 * dh[inner] ** 2 - g[inner] * h[inner]) * dx
             + beta * (h[0] ** 2 + h[-1] ** 2))
    hbar = np.zeros_like(h)
    dhbar = np.zeros_like(dh)
    hbar[inner] = -g[inner] * dx
    dhbar[inner] = dh[inner] * dx
    hbar[0] = 2 * beta * h[0]
    hbar[-1] = 2 * beta * h[-1]
    grads = nn.backward_with_input_grad(params, x[:, None], hbar, dhbar)
    return float(value), grads


@dataclass(frozen=True)
class PoissonNetConfig:
    widths: tuple[int, ...] = (1, 400, 100, 1)
    activation: str = "tanh"
    init_std: float = 0.02
    learning_rate: float = 5e-4
    beta: float = 10.0
    seed: int = 0


PRESETS = {
    "paper-poisson": PoissonNetConfig(widths=(1, 4000, 500, 400, 1)),
    "desk-poisson": PoissonNetConfig(),
    # a narrow net whose epochs cost about a hundred Jacobi sweeps
    "desk-hybrid": PoissonNetConfig(widths=(1, 20, 1), init_std=0.1, learning_rate=1e-2),
}


def epoch_flops(widths: Sequence[int], n_samples: int) -> int:
    """Cost estimate of one full-batch epoch of the variational solver.

    Per sample and layer: value and input-derivative forward passes (two
    matrix products) and their pull-back (four), at ``2 * in * out`` each.
    """
    pairs = sum(a * b for a, b in zip(widths[:-1], widths[1:]))
    return 12 * pairs * int(n_samples)


def jacobi_sweep_flops(n: int) -> int:
    return 5 * n


@dataclass
class DnnSolveResult:
    spectrum: spectral.SpectrumTrace
    trace: nn.TrainingTrace
    sup_norm: list[float]
    outputs: dict[int, np.ndarray] = field(default_factory=dict)
    wallclock: list[float] = field(default_factory=list)


def dnn_solve(problem: PoissonProblem, config: PoissonNetConfig, epochs: int,
              n: int = 1000, record_every: int = 100, peaks=None,
              keep_outputs: Sequence[int] = ()) -> DnnSolveResult:
    """Train a network on the variational energy by full-batch Adam.

    Every ``record_every`` epochs the network is sampled on the nodes to
    record ``Delta_F`` at ``peaks`` (default: the reference peaks) and the
    sup-norm error.  Node outputs at epochs in ``keep_outputs`` are kept
    for Jacobi hand-off.
    """
    if problem.reference is None:
        raise ValueError("dnn_solve tracks errors against a closed-form reference")
    if peaks is None:
        peaks = reference_solution(n)[1]
    x = grid_nodes(problem, n)
    g = problem.source(x)
    u_ref = problem.reference(x)
    ks = np.asarray(peaks, dtype=np.float64)
    yhat = spectral.nonuniform_ft(x, u_ref, [1.0], ks)
    params = nn.init_network(config.widths, config.activation, "linear",
                             config.init_std, config.seed)
    keep = set(int(e) for e in keep_outputs)
    result = DnnSolveResult(spectral.SpectrumTrace(ks, yhat), None, [])
    t0 = time.perf_counter()

    def probe(epoch, p):
        wall = time.perf_counter() - t0
        h = nn.forward(p, x[:, None])[:, 0]
        if epoch in keep:
            result.outputs[epoch] = h
        if epoch % record_every == 0 or epoch == epochs:
            result.spectrum.add(epoch, spectral.nonuniform_ft(x, h, [1.0], ks))
            result.sup_norm.append(sup_norm_error(h, u_ref))
            result.wallclock.append(wall)
        return None

    stride = _gcd_stride(record_every, keep)
    cfg = nn.TrainConfig(loss="mse", optimizer="adam", learning_rate=config.learning_rate,
                         epochs=epochs, init_std=config.init_std, seed=config.seed,
                         record_every=stride)
    loss_fn = lambda p, xb, yb: variational_loss(p, xb[:, 0], g, config.beta)
    trace = nn.train(params, x[:, None], np.zeros((x.size, 1)), cfg,
                     probes={"nodes": probe}, loss_fn=loss_fn)
    trace.probes.clear()
    result.trace = trace
    return result


def _gcd_stride(record_every, keep):
    stride = record_every
    for e in keep:
        if e > 0:
            stride = int(np.gcd(stride, e))
    return stride


@dataclass
class HybridRun:
    """Error-versus-cost trace of one hand-off epoch (``None`` = network only)."""

    handoff: int | None
    phase: list[str] = field(default_factory=list)
    step: list[int] = field(default_factory=list)
    cost_units: list[float] = field(default_factory=list)
    wallclock: list[float] = field(default_factory=list)
    sup_norm: list[float] = field(default_factory=list)
    delta: list[np.ndarray] = field(default_factory=list)

    def add(self, phase, step, cost, wall, err, delta):
        self.phase.append(phase)
        self.step.append(int(step))
        self.cost_units.append(float(cost))
        self.wallclock.append(float(wall))
        self.sup_norm.append(float(err))
        self.delta.append(np.asarray(delta))

    def cost_to_reach(self, eps: float) -> float:
        """First recorded cost at which the sup-norm error is at most ``eps``."""
        for c, e in zip(self.cost_units, self.sup_norm):
            if e <= eps:
                return c
        return float("inf")


def jacobi_trace(problem: PoissonProblem, n: int, u0_interior, sweeps: int,
                 record_every: int, peaks, start_cost: float = 0.0,
                 start_wall: float = 0.0, run: HybridRun | None = None) -> HybridRun:
    """Jacobi from ``u0_interior``, recording errors every ``record_every`` sweeps."""
    run = run if run is not None else HybridRun(0)
    x = grid_nodes(problem, n)
    u_ref = problem.reference(x)
    ks = np.asarray(peaks, dtype=np.float64)
    yhat = spectral.nonuniform_ft(x, u_ref, [1.0], ks)
    full = np.empty(n + 1)
    full[0], full[-1] = problem.boundary
    state = jacobi_init(problem, n, u0_interior)
    per = jacobi_sweep_flops(n)
    t0 = time.perf_counter()

    def rec(st):
        full[1:-1] = st.u
        hhat = spectral.nonuniform_ft(x, full, [1.0], ks)
        run.add("jacobi", st.t, start_cost + st.t * per,
                start_wall + time.perf_counter() - t0,
                sup_norm_error(full, u_ref), spectral.delta_f(yhat, hhat, missing="nan"))

    rec(state)
    done = 0
    while done < sweeps:
        step = min(record_every, sweeps - done)
        state = jacobi_sweeps(state, step)
        done += step
        rec(state)
    return run


def hybrid_solve(problem: PoissonProblem, config: PoissonNetConfig, handoffs: Sequence,
                 dnn_epochs: int, jacobi_sweeps_budget: int, n: int = 1000,
                 record_every: int = 100, jacobi_record_every: int = 1000,
                 peaks=None) -> dict:
    """Network for ``M`` epochs, then Jacobi from its node values.

    One network run serves every hand-off in ``handoffs``.  ``M = 0`` is
    Jacobi from zero; ``M = None`` is the network alone for ``dnn_epochs``.
    Cost units are ``epochs * epoch_flops + sweeps * 5n``.  Returns a dict
    ``{M: HybridRun}``.
    """
    if peaks is None:
        peaks = reference_solution(n)[1]
    finite = sorted(int(m) for m in handoffs if m is not None and m > 0)
    if any(m is not None and m < 0 for m in handoffs):
        raise ValueError("hand-off epochs must be non-negative")
    epochs = max([dnn_epochs] + finite)
    dnn = dnn_solve(problem, config, epochs, n, record_every, peaks, keep_outputs=finite)
    per_epoch = epoch_flops(config.widths, n + 1)
    runs = {}
    if None in handoffs:
        run = HybridRun(None)
        for i, e in enumerate(dnn.spectrum.epochs):
            run.add("dnn", e, e * per_epoch, dnn.wallclock[i], dnn.sup_norm[i],
                    dnn.spectrum.delta[i])
        runs[None] = run
    if 0 in handoffs:
        runs[0] = jacobi_trace(problem, n, None, jacobi_sweeps_budget,
                               jacobi_record_every, peaks)
    for m in finite:
        run = HybridRun(m)
        idx = dnn.spectrum.epochs.index(m) if m in dnn.spectrum.epochs else None
        for i, e in enumerate(dnn.spectrum.epochs):
            if e > m:
                break
            run.add("dnn", e, e * per_epoch, dnn.wallclock[i], dnn.sup_norm[i],
                    dnn.spectrum.delta[i])
        wall = dnn.wallclock[idx] if idx is not None else 0.0
        jacobi_trace(problem, n, dnn.outputs[m][1:-1], jacobi_sweeps_budget,
                     jacobi_record_every, peaks, start_cost=m * per_epoch,
                     start_wall=wall, run=run)
        runs[m] = run
    return runs


HYBRID_COLUMNS = ("handoff", "phase", "step", "cost_units", "sup_norm_err")
WALLCLOCK_COLUMNS = ("handoff", "phase", "step", "wallclock")


def hybrid_rows(runs: dict, peaks) -> tuple[tuple, list[dict]]:
    """CSV columns and rows; wall-clock is kept apart since it is machine-dependent."""
    cols = HYBRID_COLUMNS + tuple(f"delta_F_k{p:g}" for p in peaks)
    rows = []
    for m, run in runs.items():
        for i in range(len(run.step)):
            row = {
                "handoff": "inf" if m is None else m,
                "phase": run.phase[i],
                "step": run.step[i],
                "cost_units": run.cost_units[i],
                "wallclock": run.wallclock[i],
                "sup_norm_err": run.sup_norm[i],
            }
            for p, d in zip(peaks, run.delta[i]):
                row[f"delta_F_k{p:g}"] = d
            rows.append(row)
    return cols, rows
