"""Named experiments, their configuration, and the run manifest.

A configuration is a flat ``key = value`` text file.  Every experiment
declares its keys with typed defaults; a ``preset`` key (where present)
selects a bundle of values, and explicit keys override the preset.
Unknown keys are rejected with the offending name.

Each run writes CSV traces, a ``manifest.json`` holding the fully resolved
configuration, dataset digests and output list, and optionally SVG plots.
"""

from __future__ import annotations

import difflib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, datasets, nn, poisson, spectral, svg, theory


class ConfigError(ValueError):
    """Bad configuration: unknown key, unparsable value or invalid preset."""


# --------------------------------------------------------------------------
# config text


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if key in out:
            raise ConfigError(f"{source}:{lineno}: key {key!r} given twice")
        out[key] = value
    return out


def load_config_file(path) -> dict[str, str]:
    """Read a config file, or the ``config`` block of a run manifest (``.json``)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    if path.suffix == ".json":
        cfg = json.loads(path.read_text())["config"]
        return {k: _format_plain(v) for k, v in cfg.items()}
    return parse_config_text(path.read_text(), str(path))


def _format_plain(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _coerce(key, value, default):
    if not isinstance(value, str):
        return value
    try:
        if isinstance(default, bool):
            low = value.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        kind = type(default).__name__
        raise ConfigError(f"config key {key!r}: cannot read {value!r} as {kind}") from None
    return value


def widths_of(text: str) -> tuple[int, ...]:
    """``"1-200-1"`` -> ``(1, 200, 1)``."""
    try:
        widths = tuple(int(v) for v in str(text).split("-"))
    except ValueError:
        raise ConfigError(f"bad widths {text!r}; expected e.g. 1-200-1") from None
    if len(widths) < 2 or min(widths) < 1:
        raise ConfigError(f"bad widths {text!r}")
    return widths


def float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def _batch(value):
    return "full" if str(value) == "full" else int(value)


# --------------------------------------------------------------------------
# experiment registry


@dataclass(frozen=True)
class Experiment:
    name: str
    defaults: dict
    runner: Callable
    presets: dict = field(default_factory=dict)
    summary: str = ""

    def resolve(self, overrides: dict | None = None) -> dict:
        """Defaults, then the selected preset, then explicit overrides."""
        overrides = dict(overrides or {})
        for key in overrides:
            if key not in self.defaults:
                near = difflib.get_close_matches(key, list(self.defaults), n=1)
                hint = f" (did you mean {near[0]!r}?)" if near else ""
                raise ConfigError(f"unknown config key {key!r} for experiment {self.name}{hint}")
        cfg = dict(self.defaults)
        if "preset" in self.defaults:
            name = overrides.get("preset", cfg["preset"])
            if name not in self.presets:
                raise ConfigError(f"invalid preset {name!r} for {self.name}; "
                                  f"choose from {sorted(self.presets)}")
            cfg.update(self.presets[name])
        for key, value in overrides.items():
            cfg[key] = _coerce(key, value, self.defaults[key])
        return cfg


class RunContext:
    """Collects output files and dataset digests for the manifest."""

    def __init__(self, out_dir, make_svg: bool = False):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.make_svg = make_svg
        self.outputs: list[str] = []
        self.digests: dict[str, str] = {}

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def csv(self, name, columns, rows) -> None:
        spectral.write_csv(self.path(name), columns, rows)

    def svg(self, trace, kind, name, **kw) -> None:
        if self.make_svg:
            svg.emit_svg(trace, kind, self.out_dir / name, **kw)
            self.outputs.append(name)

    def dataset(self, label: str, data: datasets.LabeledDataset) -> None:
        self.digests[label] = datasets.digest(data)


@dataclass
class ExperimentManifest:
    experiment: str
    config: dict
    seeds: dict
    datasets: dict
    version: str
    outputs: list
    results: dict

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.__dict__), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        return cls(**json.loads(text))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return v


# --------------------------------------------------------------------------
# shared helpers


def threshold_crossing_epochs(trace: spectral.SpectrumTrace, threshold: float, ks=None) -> dict:
    """First recorded epoch with ``Delta_F(k) < threshold``, per frequency.

    ``None`` marks a frequency that never crosses.  Requested frequencies
    must be present in the trace grid.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    grid = [float(k) for k in trace.ks]
    ks = grid if ks is None else [float(k) for k in ks]
    delta = trace.delta
    out = {}
    for k in ks:
        if k not in grid:
            raise KeyError(f"frequency {k} is not in the trace")
        col = delta[:, grid.index(k)]
        hit = np.flatnonzero(col < threshold)  # NaN never compares true
        out[k] = trace.epochs[hit[0]] if hit.size else None
    return out


def strictly_increasing(values) -> bool:
    """True when no value is ``None`` and each exceeds the one before."""
    if any(v is None for v in values):
        return False
    return all(b > a for a, b in zip(values, values[1:]))


def _train_config(cfg, loss):
    return nn.TrainConfig(loss=loss, optimizer=cfg["optimizer"], learning_rate=cfg["learning_rate"],
                          batch_size=_batch(cfg["batch_size"]), epochs=cfg["epochs"],
                          init_std=cfg["init_std"], seed=cfg["seed"],
                          record_every=cfg["record_every"])


def _loss_rows(trace):
    return [{"epoch": e, "loss": l} for e, l in zip(trace.epochs, trace.losses)]


def _load_mnist(cfg, ctx):
    for key in ("images", "labels"):
        if not cfg[key]:
            raise ConfigError(f"config key {key!r} must name an IDX file")
        if not Path(cfg[key]).exists():
            raise FileNotFoundError(f"dataset file not found: {cfg[key]}")
    subset = cfg["subset"] or None
    data = datasets.load_idx(cfg["images"], cfg["labels"], subset, cfg["data_seed"])
    ctx.dataset("mnist", data)
    return data


_NET_KEYS = {
    "optimizer": "adam",
    "batch_size": "full",
    "record_every": 100,
    "seed": 0,
}


# --------------------------------------------------------------------------
# synth1d


def _run_synth1d(cfg, ctx):
    data = datasets.synth_1d(cfg["target"])
    ctx.dataset("synth1d", data)
    y = data.labels[:, 0]
    half = spectral.dft_1d(y, np.arange(y.size // 2 + 1))
    peaks = spectral.select_peak_frequencies(half, cfg["peaks"])
    ks = np.array(sorted(set(range(cfg["band"])) | set(peaks)), dtype=np.float64)
    trace = spectral.SpectrumTrace(ks, spectral.dft_1d(y, ks))

    def probe(epoch, params):
        trace.add(epoch, spectral.dft_1d(nn.forward(params, data.inputs)[:, 0], ks))

    params = nn.init_network(widths_of(cfg["widths"]), cfg["activation"], "linear",
                             cfg["init_std"], cfg["seed"])
    run = nn.train(params, data.inputs, data.labels, _train_config(cfg, "mse"),
                   probes={"spectrum": probe})
    ctx.csv("spectrum.csv", spectral.SPECTRUM_COLUMNS, trace.rows())
    ctx.csv("loss.csv", ("epoch", "loss"), _loss_rows(run))
    crossings = threshold_crossing_epochs(trace, cfg["threshold"], peaks)
    ctx.svg(trace, "delta_f", "delta_f.svg", ks=peaks)
    ctx.svg(trace, "spectrum", "spectrum.svg")
    return {
        "peaks": [float(p) for p in peaks],
        "crossing_epochs": [crossings[float(p)] for p in peaks],
        "ordered": strictly_increasing([crossings[float(p)] for p in peaks]),
        "final_loss": run.losses[-1],
    }


SYNTH1D = Experiment(
    "synth1d",
    {"preset": "desk-synth1d", "target": "appA", "widths": "1-200-1", "activation": "tanh",
     "learning_rate": 2e-4, "epochs": 30000, "init_std": 0.1, "threshold": 0.3,
     "peaks": 3, "band": 16, **_NET_KEYS},
    _run_synth1d,
    {"desk-synth1d": {"widths": "1-200-1"},
     "paper-synth1d": {"widths": "1-8000-1", "learning_rate": 2e-4, "init_std": 0.1}},
    "1-d sum of sines: Delta_F at the DFT peaks over training",
)


# --------------------------------------------------------------------------
# projection method


def _run_project(cfg, ctx):
    data = _load_mnist(cfg, ctx)
    head = "softmax" if cfg["loss"] == "cross_entropy_softmax" else "linear"
    comp = cfg["component"]
    direction = spectral.principal_direction(data.inputs)
    proj = spectral.project(data.inputs, direction)
    ks = spectral.frequency_grid(proj, cfg["freq_count"])
    yhat = spectral.nonuniform_ft(data.inputs, data.labels[:, comp], direction, ks)
    peaks = spectral.select_peak_frequencies(yhat, cfg["peaks"], ks)
    trace = spectral.SpectrumTrace(ks, yhat)

    def probe(epoch, params):
        h = nn.forward(params, data.inputs)[:, comp]
        trace.add(epoch, spectral.nonuniform_ft(data.inputs, h, direction, ks))

    params = nn.init_network(widths_of(cfg["widths"]), cfg["activation"], head,
                             cfg["init_std"], cfg["seed"])
    run = nn.train(params, data.inputs, data.labels, _train_config(cfg, cfg["loss"]),
                   probes={"spectrum": probe})
    ctx.csv("spectrum.csv", spectral.SPECTRUM_COLUMNS, trace.rows())
    ctx.csv("loss.csv", ("epoch", "loss"), _loss_rows(run))
    out = nn.forward(run.final_params, data.inputs)
    crossings = threshold_crossing_epochs(trace, cfg["threshold"], peaks)
    ctx.svg(trace, "spectrum", "spectrum.svg")
    ctx.svg(trace, "delta_f", "delta_f.svg", ks=peaks)
    return {
        "direction_eigenvalue": direction.eigenvalue,
        "peaks": peaks,
        "crossing_epochs": [crossings[float(p)] for p in peaks],
        "train_accuracy": float(np.mean(np.argmax(out, axis=1) == data.classes)),
    }


_MNIST_KEYS = {"images": "", "labels": "", "subset": 5000, "data_seed": 0}

PROJECT = Experiment(
    "project",
    {"preset": "desk-project", **_MNIST_KEYS, "widths": "784-64-32-10", "activation": "tanh",
     "loss": "cross_entropy_softmax", "learning_rate": 1e-3, "epochs": 200, "init_std": 0.1,
     "component": 3, "freq_count": 40, "peaks": 3, "threshold": 0.3, **_NET_KEYS,
     "record_every": 5},
    _run_project,
    {"desk-project": {"widths": "784-64-32-10", "subset": 5000},
     "paper-project": {"widths": "784-400-200-10", "subset": 0, "batch_size": "10000",
                       "learning_rate": 1e-3}},
    "projection method on an IDX dataset (MNIST)",
)


# --------------------------------------------------------------------------
# filtering method


def filter_trace_rows(epochs, outputs, filters, targets):
    """Rows ``epoch, delta, e_low, e_high, dist`` and turning epochs per width."""
    rows, turning = [], {}
    for delta, filt in filters.items():
        tgt = targets[delta]
        dist, turn = spectral.distance_and_turning_epoch(epochs, outputs, tgt.low)
        turning[delta] = turn
        for i, (e, h) in enumerate(zip(epochs, outputs)):
            lo, hi = spectral.e_low_e_high(tgt, filt.split(h))
            rows.append({"epoch": e, "delta": delta, "e_low": lo, "e_high": hi, "dist": dist[i]})
    rows.sort(key=lambda r: (r["epoch"], r["delta"]))
    return rows, turning


def low_before_high(rows, delta, stop=0.3) -> bool:
    """``e_low < e_high`` at every record up to the first with ``e_low < stop``."""
    for r in (r for r in rows if r["delta"] == delta):
        if not r["e_low"] < r["e_high"]:
            return False
        if r["e_low"] < stop:
            return True
    return True


def _run_filter(cfg, ctx):
    data = _load_mnist(cfg, ctx)
    deltas = float_list(cfg["deltas"])
    filters = {d: spectral.GaussianFilter(data.inputs, d) for d in deltas}
    targets = {d: f.split(data.labels) for d, f in filters.items()}
    head = "softmax" if cfg["loss"] == "cross_entropy_softmax" else "linear"
    params = nn.init_network(widths_of(cfg["widths"]), cfg["activation"], head,
                             cfg["init_std"], cfg["seed"])
    run = nn.train(params, data.inputs, data.labels, _train_config(cfg, cfg["loss"]),
                   probes={"out": nn.output_probe(data.inputs)})
    rows, turning = filter_trace_rows(run.epochs, run.probes["out"], filters, targets)
    ctx.csv("filter.csv", spectral.FILTER_COLUMNS, rows)
    ctx.csv("loss.csv", ("epoch", "loss"), _loss_rows(run))
    ctx.svg(rows, "filter_heatmap", "filter_heatmap.svg")
    ctx.svg(rows, "dist", "dist.svg")
    return {
        "deltas": deltas,
        "low_before_high": {d: low_before_high(rows, d, cfg["stop"]) for d in deltas},
        "turning_epochs": turning,
    }


FILTER = Experiment(
    "filter",
    {"preset": "desk-filter", **_MNIST_KEYS, "widths": "784-64-32-10", "activation": "tanh",
     "loss": "mse", "learning_rate": 1e-3, "epochs": 400, "init_std": 0.1, "deltas": "3,7",
     "stop": 0.3, **_NET_KEYS, "record_every": 10},
    _run_filter,
    {"desk-filter": {"widths": "784-64-32-10", "subset": 5000},
     "paper-filter": {"widths": "784-400-200-10", "subset": 0, "learning_rate": 0.015,
                      "batch_size": "10000", "deltas": "3,7,10"}},
    "filtering method: e_low / e_high on an IDX dataset (MNIST)",
)


# --------------------------------------------------------------------------
# Poisson: network versus Jacobi


def _poisson_config(cfg):
    return poisson.PoissonNetConfig(widths=widths_of(cfg["widths"]), activation=cfg["activation"],
                                    init_std=cfg["init_std"], learning_rate=cfg["learning_rate"],
                                    beta=cfg["beta"], seed=cfg["seed"])


def first_step_below(run: poisson.HybridRun, column: int, threshold: float):
    """First recorded step where the ``column``-th peak has ``Delta_F < threshold``."""
    for step, d in zip(run.step, run.delta):
        if d[column] < threshold:
            return step
    return None


def _dnn_run(dnn, per_epoch):
    run = poisson.HybridRun(None)
    for i, e in enumerate(dnn.spectrum.epochs):
        run.add("dnn", e, e * per_epoch, dnn.wallclock[i], dnn.sup_norm[i],
                dnn.spectrum.delta[i])
    return run


def _run_poisson(cfg, ctx):
    n = cfg["n"]
    problem, peaks = poisson.reference_solution(n)
    net = _poisson_config(cfg)
    dnn = poisson.dnn_solve(problem, net, cfg["epochs"], n, cfg["record_every"], peaks)
    runs = {None: _dnn_run(dnn, poisson.epoch_flops(net.widths, n + 1)),
            0: poisson.jacobi_trace(problem, n, None, cfg["jacobi_sweeps"],
                                    cfg["jacobi_record_every"], peaks)}
    cols, rows = poisson.hybrid_rows(runs, peaks)
    ctx.csv("poisson.csv", cols, rows)
    ctx.csv("dnn_spectrum.csv", spectral.SPECTRUM_COLUMNS, dnn.spectrum.rows())
    ctx.svg(dnn.spectrum, "delta_f", "dnn_delta_f.svg")
    dnn_cross = [first_step_below(runs[None], i, cfg["dnn_threshold"]) for i in range(len(peaks))]
    jac_cross = [first_step_below(runs[0], i, cfg["jacobi_threshold"]) for i in range(len(peaks))]
    return {
        "peaks": peaks,
        "dnn_crossing_epochs": dnn_cross,
        "jacobi_crossing_sweeps": jac_cross,
        "dnn_sup_norm": {"initial": dnn.sup_norm[0], "final": dnn.sup_norm[-1]},
        "jacobi_sup_norm_final": runs[0].sup_norm[-1],
    }


_POISSON_KEYS = {"widths": "1-400-100-1", "activation": "tanh", "init_std": 0.02,
                 "learning_rate": 5e-4, "beta": 10.0, "seed": 0, "n": 1000}


def _poisson_preset(name):
    p = poisson.PRESETS[name]
    return {"widths": "-".join(map(str, p.widths)), "init_std": p.init_std,
            "learning_rate": p.learning_rate, "beta": p.beta}


POISSON = Experiment(
    "poisson",
    {"preset": "desk-poisson", **_POISSON_KEYS, "epochs": 4000, "record_every": 100,
     "jacobi_sweeps": 150000, "jacobi_record_every": 1000, "dnn_threshold": 0.2,
     "jacobi_threshold": 0.1},
    _run_poisson,
    {"desk-poisson": _poisson_preset("desk-poisson"),
     "paper-poisson": _poisson_preset("paper-poisson")},
    "Poisson equation: per-frequency convergence of the network and of Jacobi",
)


def _handoffs(text):
    out = []
    for v in str(text).split(","):
        v = v.strip()
        if v in ("inf", "none", "dnn"):
            out.append(None)
        elif v:
            out.append(int(v))
    return out


def _run_hybrid(cfg, ctx):
    n = cfg["n"]
    problem, peaks = poisson.reference_solution(n)
    net = _poisson_config(cfg)
    handoffs = _handoffs(cfg["handoffs"])
    runs = poisson.hybrid_solve(problem, net, handoffs, cfg["epochs"], cfg["jacobi_sweeps"], n,
                                cfg["record_every"], cfg["jacobi_record_every"], peaks)
    cols, rows = poisson.hybrid_rows(runs, peaks)
    ctx.csv("hybrid.csv", cols, rows)
    # wall-clock differs between machines and runs; kept out of hybrid.csv
    ctx.csv("wallclock.csv", poisson.WALLCLOCK_COLUMNS, rows)
    ctx.svg(runs, "error_cost", "error_cost.svg", eps=cfg["eps"])
    cost = {("inf" if m is None else m): runs[m].cost_to_reach(cfg["eps"]) for m in runs}
    return {"cost_to_reach": cost, **hybrid_verdict(runs, cfg["eps"])}


def hybrid_verdict(runs: dict, eps: float) -> dict:
    """Best finite hand-off and whether it beats both pure solvers."""
    ends = [runs[m].cost_to_reach(eps) for m in (0, None) if m in runs]
    finite = {m: r.cost_to_reach(eps) for m, r in runs.items() if m not in (0, None)}
    if not finite:
        return {"best_handoff": None, "best_cost": None, "hybrid_wins": False}
    best = min(finite, key=lambda m: (finite[m], m))
    wins = math.isfinite(finite[best]) and all(finite[best] < c for c in ends)
    return {"best_handoff": best, "best_cost": finite[best], "hybrid_wins": wins}


HYBRID = Experiment(
    "hybrid",
    {"preset": "desk-hybrid", **_POISSON_KEYS, "handoffs": "0,20,50,100,200,400,800,inf",
     "epochs": 1500, "record_every": 10, "jacobi_sweeps": 200000,
     "jacobi_record_every": 1000, "eps": 5e-2},
    _run_hybrid,
    {"desk-hybrid": _poisson_preset("desk-hybrid"),
     "desk-poisson": _poisson_preset("desk-poisson"),
     "paper-poisson": _poisson_preset("paper-poisson")},
    "hybrid scheme: M network epochs, then Jacobi; error against cost",
)


# --------------------------------------------------------------------------
# theorem checks

THEORY_COLUMNS = ("delta", "samples", "ratio_thm1", "ci_lo", "ci_hi", "ratio_thm2",
                  "ci2_lo", "ci2_hi", "implication_violations", "dissipation_violations")


def theory_rows(cfg) -> list[dict]:
    m = cfg["m"]
    a = np.full(m, cfg["a"])
    b = np.full(m, cfg["b"])
    rows = []
    for delta in float_list(cfg["delta"]):
        W = theory.sample_ball_uniform(theory.BallSampler(m, delta, cfg["seed"]), cfg["samples"])
        ev = theory.theorem_events(W, a, b, cfg["k1"], cfg["k2"], cfg["f1"], cfg["f2"])
        r1 = theory.wilson(int(ev.dominance.sum()), ev.dominance.size)
        r2 = theory.wilson(int(ev.faster.sum()), ev.faster.size)
        rows.append({
            "delta": delta, "samples": ev.dominance.size,
            "ratio_thm1": r1.ratio, "ci_lo": r1.ci_low, "ci_hi": r1.ci_high,
            "ratio_thm2": r2.ratio, "ci2_lo": r2.ci_low, "ci2_hi": r2.ci_high,
            "implication_violations": int(np.sum(ev.dominance & ~ev.faster)),
            "dissipation_violations": int(np.sum(~ev.dissipative)),
        })
    return rows


def non_decreasing_within_bands(rows, ratio="ratio_thm1", lo="ci_lo", hi="ci_hi") -> bool:
    """Rows in order of shrinking delta; each upper band reaches the previous lower band."""
    rows = sorted(rows, key=lambda r: -r["delta"])
    return all(b[hi] >= a[lo] for a, b in zip(rows, rows[1:]))


def _run_theory(cfg, ctx):
    rows = theory_rows(cfg)
    ctx.csv("theory.csv", THEORY_COLUMNS, rows)
    return {
        "rows": len(rows),
        "thm1_non_decreasing": non_decreasing_within_bands(rows),
        "thm2_non_decreasing": non_decreasing_within_bands(rows, "ratio_thm2", "ci2_lo", "ci2_hi"),
        "min_ci_lo_thm1": min(r["ci_lo"] for r in rows),
    }


THEORY = Experiment(
    "theory",
    {"m": 4, "k1": 1.0, "k2": 3.0, "f1": 1.0, "f2": 1.0, "a": 1.0, "b": 0.5,
     "delta": "2,1,0.5,0.25", "samples": 100000, "seed": 0},
    _run_theory,
    summary="Monte-Carlo frequency-priority checks on a one-hidden-layer tanh net",
)


# --------------------------------------------------------------------------
# parity

PARITY_COLUMNS = ("k", "abs_f", "re_fS", "im_fS", "re_hS", "im_hS", "re_hO", "im_hO")


def parity_spectra(data, full, params, ks, d):
    """Exact, training-set, and network transforms along the all-ones direction.

    ``k`` is the per-coordinate frequency: ``k_vec = k * (1, ..., 1)``.
    """
    u = np.ones(d) / np.sqrt(d)
    kp = np.asarray(ks) * np.sqrt(d)
    f = np.array([datasets.parity_exact_ft(d, k) for k in ks])
    fS = spectral.nonuniform_ft(data.inputs, data.labels[:, 0], u, kp)
    hS = spectral.nonuniform_ft(data.inputs, nn.forward(params, data.inputs)[:, 0], u, kp)
    hO = spectral.nonuniform_ft(full.inputs, nn.forward(params, full.inputs)[:, 0], u, kp)
    return f, fS, hS, hO


def _run_parity(cfg, ctx):
    d = cfg["d"]
    data = datasets.parity_dataset(datasets.ParitySpec(d, cfg["s"], cfg["data_seed"]))
    full = datasets.parity_dataset(datasets.ParitySpec(d))
    ctx.dataset("parity_train", data)
    ks = np.linspace(0.0, cfg["kmax"], cfg["kcount"])
    u = np.ones(d) / np.sqrt(d)
    fS0 = spectral.nonuniform_ft(data.inputs, data.labels[:, 0], u, ks * np.sqrt(d))
    trace = spectral.SpectrumTrace(ks, fS0)

    def probe(epoch, params):
        h = nn.forward(params, data.inputs)[:, 0]
        trace.add(epoch, spectral.nonuniform_ft(data.inputs, h, u, ks * np.sqrt(d)))

    params = nn.init_network(widths_of(cfg["widths"]), cfg["activation"], "linear",
                             cfg["init_std"], cfg["seed"])
    run = nn.train(params, data.inputs, data.labels, _train_config(cfg, "mse"),
                   probes={"spectrum": probe})
    f, fS, hS, hO = parity_spectra(data, full, run.final_params, ks, d)
    rows = [{"k": k, "abs_f": abs(f[i]), "re_fS": fS[i].real, "im_fS": fS[i].imag,
             "re_hS": hS[i].real, "im_hS": hS[i].imag, "re_hO": hO[i].real, "im_hO": hO[i].imag}
            for i, k in enumerate(ks)]
    ctx.csv("parity.csv", PARITY_COLUMNS, rows)
    ctx.csv("spectrum.csv", spectral.SPECTRUM_COLUMNS, trace.rows())
    ctx.svg(trace, "spectrum", "spectrum.svg")
    low = ks <= cfg["low_band"]
    peaks = spectral.select_peak_frequencies(fS[low], cfg["low_peaks"], ks[low])
    idx = [int(np.flatnonzero(ks == p)[0]) for p in peaks]
    quarter = datasets.parity_exact_ft(d, 0.25)
    hq = spectral.nonuniform_ft(full.inputs, nn.forward(run.final_params, full.inputs)[:, 0],
                                u, [0.25 * np.sqrt(d)])[0]
    return {
        "alias_gap_k0": float(abs(fS[0] - f[0])),
        "low_peaks": peaks,
        "low_peak_delta_F": [spectral.delta_f(fS[i], hS[i]) for i in idx],
        "deviation_quarter": float(abs(hq - quarter)),
        "final_loss": run.losses[-1],
    }


PARITY = Experiment(
    "parity",
    {"preset": "paper-parity", "d": 10, "s": 200, "data_seed": 0, "widths": "10-500-100-1",
     "activation": "tanh", "learning_rate": 5e-4, "epochs": 2000, "init_std": 0.05,
     "kmax": 0.25, "kcount": 26, "low_band": 0.125, "low_peaks": 2, **_NET_KEYS},
    _run_parity,
    {"paper-parity": {"widths": "10-500-100-1", "learning_rate": 5e-4, "init_std": 0.05},
     "desk-parity": {"widths": "10-500-100-1", "epochs": 1000}},
    "parity on a random subset: aliasing and the fitted spectrum",
)


# --------------------------------------------------------------------------
# 2-d image


def _run_image2d(cfg, ctx):
    if cfg["image"]:
        if not Path(cfg["image"]).exists():
            raise FileNotFoundError(f"dataset file not found: {cfg['image']}")
        img = datasets.read_pgm(cfg["image"])
        data = datasets.image_dataset(img, f"pgm:{Path(cfg['image']).name}")
    else:
        img = datasets.synthetic_image(cfg["size"])
        data = datasets.image_dataset(img, "synthetic")
    ctx.dataset("image", data)
    h, w = img.shape
    row = cfg["slice_row"] if cfg["slice_row"] >= 0 else h // 2
    train = data.subset(data.train_mask)
    test = data.subset(~data.train_mask)
    # training pixels of the chosen row, ordered by column
    line = np.flatnonzero(data.train_mask & (np.arange(h * w) // w == row))
    target = data.labels[line, 0]
    half = spectral.dft_1d(target, np.arange(target.size // 2 + 1))
    peaks = spectral.select_peak_frequencies(half, cfg["peaks"])
    ks = np.arange(target.size // 2 + 1, dtype=np.float64)
    results = {"peaks": [int(p) for p in peaks], "runs": {}}
    for std in float_list(cfg["init_stds"]):
        trace = spectral.SpectrumTrace(ks, half)

        def probe(epoch, params):
            trace.add(epoch, spectral.dft_1d(nn.forward(params, data.inputs[line])[:, 0], ks))

        params = nn.init_network(widths_of(cfg["widths"]), cfg["activation"], "linear",
                                 std, cfg["seed"])
        tcfg = nn.TrainConfig("mse", cfg["optimizer"], cfg["learning_rate"],
                              _batch(cfg["batch_size"]), cfg["epochs"], std, cfg["seed"],
                              cfg["record_every"])
        run = nn.train(params, train.inputs, train.labels, tcfg, probes={"spectrum": probe})
        tag = f"{std:g}"
        ctx.csv(f"spectrum_init{tag}.csv", spectral.SPECTRUM_COLUMNS, trace.rows())
        out = nn.forward(run.final_params, data.inputs)[:, 0].reshape(h, w)
        datasets.write_pgm(ctx.path(f"output_init{tag}.pgm"),
                           np.round(127.5 * (np.clip(out, -1, 1) + 1)))
        ctx.svg(trace, "delta_f", f"delta_f_init{tag}.svg", ks=peaks)
        cross = threshold_crossing_epochs(trace, cfg["threshold"], peaks)
        test_err = float(np.mean((nn.forward(run.final_params, test.inputs) - test.labels) ** 2))
        results["runs"][tag] = {
            "crossing_epochs": [cross[float(p)] for p in peaks],
            "train_loss": run.losses[-1],
            "test_mse": test_err,
        }
    return results


IMAGE2D = Experiment(
    "image2d",
    {"preset": "desk-image2d", "image": "", "size": 64, "slice_row": -1,
     "widths": "2-200-100-1", "activation": "tanh", "learning_rate": 5e-4, "epochs": 2000,
     "init_stds": "0.08,1", "peaks": 2, "threshold": 0.3, **_NET_KEYS, "record_every": 50},
    _run_image2d,
    # the built-in picture has two clear peaks on its middle row; a real
    # photograph (image=...) supports the five used at full scale
    {"desk-image2d": {"widths": "2-200-100-1", "size": 64, "peaks": 2},
     "paper-image2d": {"widths": "2-400-200-100-1", "learning_rate": 2e-4, "peaks": 5}},
    "2-d image memorization with small and large initialization",
)


# --------------------------------------------------------------------------
# ideal convergence model


def ideal_traces(cfg):
    """Simulate the ideal model; returns the model, times, grid and outputs."""
    if cfg["ordering"] not in ("F", "anti"):
        raise ConfigError("ordering must be 'F' or 'anti'")
    # F: rates fall with frequency (low modes first); anti: they rise
    rates = sorted(float_list(cfg["rates"]), reverse=cfg["ordering"] == "F")
    model = theory.IdealModel(tuple(float_list(cfg["amplitudes"])), tuple(rates))
    x = np.linspace(cfg["x_min"], cfg["x_max"], cfg["points"])
    steps = int(round(cfg["t_max"] / cfg["dt"]))
    times = np.arange(steps + 1) * cfg["dt"]
    return model, times, x, theory.ideal_simulate(model, times, x)


def ideal_predictions(times, x, H, y, deltas):
    """Turning step per width and whether both filtering predictions hold."""
    out = {"turning_step": {}, "turning_time": {}, "dip": {}}
    for delta in deltas:
        low = spectral.GaussianFilter(x, delta).low(y)
        dist, turn = spectral.distance_and_turning_epoch(range(len(times)), H, low)
        out["turning_step"][delta] = turn
        out["turning_time"][delta] = float(times[turn])
        out["dip"][delta] = bool(0 < turn < len(times) - 1 and dist[-1] > dist[turn])
    steps = [out["turning_step"][d] for d in sorted(deltas)]
    out["turning_non_increasing"] = all(b <= a for a, b in zip(steps, steps[1:]))
    out["predictions_hold"] = out["turning_non_increasing"] and all(out["dip"].values())
    return out


def _run_ideal(cfg, ctx):
    model, times, x, H = ideal_traces(cfg)
    y = model.target(x)
    deltas = float_list(cfg["deltas"])
    ks = model.frequencies / (2 * np.pi)
    keep = np.arange(0, len(times), cfg["record_every"])
    if keep[-1] != len(times) - 1:
        keep = np.append(keep, len(times) - 1)
    trace = spectral.SpectrumTrace(ks, spectral.nonuniform_ft(x, y, [1.0], ks))
    for i in keep:
        trace.add(int(i), spectral.nonuniform_ft(x, H[i], [1.0], ks))
    filters = {d: spectral.GaussianFilter(x, d) for d in deltas}
    targets = {d: f.split(y) for d, f in filters.items()}
    rows, _ = filter_trace_rows([int(i) for i in keep], H[keep], filters, targets)
    ctx.csv("spectrum.csv", spectral.SPECTRUM_COLUMNS, trace.rows())
    ctx.csv("filter.csv", spectral.FILTER_COLUMNS, rows)
    ctx.svg(rows, "dist", "dist.svg")
    return ideal_predictions(times, x, H, y, deltas)


_IDEAL_ROWS = {"paper-ideal-decay": "1,0.5,0.2,0.125", "paper-ideal-equal": "1,1,1,1",
               "paper-ideal-grow": "1,2,5,8"}

IDEAL = Experiment(
    "ideal",
    {"preset": "paper-ideal-equal", "amplitudes": "1,1,1,1", "rates": "200,150,5,1",
     "ordering": "F", "x_min": -6.28, "x_max": 6.28, "points": 100, "dt": 0.001,
     "t_max": 10.0, "deltas": "0.1,0.2,0.4,0.8", "record_every": 100},
    _run_ideal,
    {name: {"amplitudes": amps} for name, amps in _IDEAL_ROWS.items()},
    "closed-form ideal fit: filtered distance and turning times",
)


EXPERIMENTS = {e.name: e for e in (SYNTH1D, PROJECT, FILTER, POISSON, HYBRID, THEORY,
                                   PARITY, IMAGE2D, IDEAL)}


def run_experiment(name: str, overrides: dict | None = None, out_dir="fpl-out",
                   make_svg: bool = False) -> ExperimentManifest:
    """Resolve the configuration, run, and write outputs plus ``manifest.json``."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    exp = EXPERIMENTS[name]
    cfg = exp.resolve(overrides)
    ctx = RunContext(out_dir, make_svg)
    results = exp.runner(cfg, ctx)
    seeds = {k: v for k, v in cfg.items() if k == "seed" or k.endswith("_seed")}
    manifest = ExperimentManifest(
        experiment=name, config=cfg, seeds=seeds, datasets=ctx.digests,
        version=__version__, outputs=ctx.outputs + ["manifest.json"],
        results=_jsonable(results),
    )
    (ctx.out_dir / "manifest.json").write_text(manifest.to_json())
    return manifest
