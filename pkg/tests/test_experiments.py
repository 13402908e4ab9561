import json
import re
import subprocess
import sys

import numpy as np
import pytest

from fpl import cli, experiments, poisson, spectral, svg
from fpl.experiments import ConfigError, run_experiment

FAST_SYNTH = {"epochs": "300", "record_every": "50"}
FAST_THEORY = {"samples": "2000", "delta": "1,0.25"}
FAST_IDEAL = {"t_max": "0.5", "record_every": "50"}


# config text

def test_parse_config_text():
    text = "# run settings\nepochs = 10   # short\nwidths='1-5-1'\n\nthreshold = 0.2\n"
    assert experiments.parse_config_text(text) == {"epochs": "10", "widths": "1-5-1",
                                                   "threshold": "0.2"}


@pytest.mark.parametrize("text", ["epochs 10", "= 3", "a = 1\na = 2"])
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        experiments.parse_config_text(text)


def test_unknown_key_names_the_key():
    with pytest.raises(ConfigError, match="learning_rte.*learning_rate"):
        experiments.EXPERIMENTS["synth1d"].resolve({"learning_rte": "3"})


def test_invalid_preset_and_bad_value():
    exp = experiments.EXPERIMENTS["synth1d"]
    with pytest.raises(ConfigError, match="invalid preset"):
        exp.resolve({"preset": "huge"})
    with pytest.raises(ConfigError, match="epochs"):
        exp.resolve({"epochs": "many"})


def test_overrides_win_over_preset():
    cfg = experiments.EXPERIMENTS["synth1d"].resolve({"preset": "paper-synth1d", "widths": "1-9-1"})
    assert cfg["widths"] == "1-9-1" and cfg["epochs"] == 30000


def test_helpers_parse_lists():
    assert experiments.widths_of("1-200-1") == (1, 200, 1)
    assert experiments.float_list("3, 7,") == [3.0, 7.0]
    for bad in ("1-x-1", "5", "1-0-1"):
        with pytest.raises(ConfigError):
            experiments.widths_of(bad)


# presets

def test_full_scale_presets():
    ex = experiments.EXPERIMENTS
    assert ex["synth1d"].presets["paper-synth1d"]["widths"] == "1-8000-1"
    assert ex["project"].presets["paper-project"]["widths"] == "784-400-200-10"
    flt = ex["filter"].presets["paper-filter"]
    assert (flt["widths"], flt["learning_rate"], flt["deltas"]) == ("784-400-200-10", 0.015, "3,7,10")
    assert ex["poisson"].presets["paper-poisson"]["widths"] == "1-4000-500-400-1"
    assert ex["image2d"].presets["paper-image2d"]["widths"] == "2-400-200-100-1"
    assert ex["parity"].presets["paper-parity"]["widths"] == "10-500-100-1"


def test_every_preset_resolves():
    for exp in experiments.EXPERIMENTS.values():
        for name in exp.presets:
            cfg = exp.resolve({"preset": name})
            assert set(cfg) == set(exp.defaults)


# threshold crossings

def make_trace(deltas):
    ks = np.array([1.0, 2.0])
    tr = spectral.SpectrumTrace(ks, np.ones(2, dtype=complex))
    for e, (d1, d2) in zip(range(0, 10 * len(deltas), 10), deltas):
        tr.add(e, [1 - d1, 1 - d2])
    return tr


def test_crossing_epochs():
    tr = make_trace([(0.0, 1.0), (0.0, 0.5), (0.0, 0.2)])
    assert experiments.threshold_crossing_epochs(tr, 0.3) == {1.0: 0, 2.0: 20}
    flat = make_trace([(1.0, 1.0)] * 3)
    assert experiments.threshold_crossing_epochs(flat, 0.3) == {1.0: None, 2.0: None}


def test_crossing_errors():
    tr = make_trace([(0.0, 1.0)])
    with pytest.raises(ValueError):
        experiments.threshold_crossing_epochs(tr, 0.0)
    with pytest.raises(ValueError):
        experiments.threshold_crossing_epochs(tr, 1.5)
    with pytest.raises(KeyError):
        experiments.threshold_crossing_epochs(tr, 0.3, [3.0])


def test_strictly_increasing():
    assert experiments.strictly_increasing([1, 5, 9])
    assert not experiments.strictly_increasing([1, 1, 9])
    assert not experiments.strictly_increasing([1, None])


def test_low_before_high():
    rows = [{"delta": 3, "e_low": lo, "e_high": hi} for lo, hi in [(0.9, 1.0), (0.25, 0.8), (0.1, 0.05)]]
    assert experiments.low_before_high(rows, 3)
    rows[0]["e_high"] = 0.5
    assert not experiments.low_before_high(rows, 3)


def test_bands_ordering():
    rows = [{"delta": 2, "ratio_thm1": 0.5, "ci_lo": 0.49, "ci_hi": 0.51},
            {"delta": 1, "ratio_thm1": 0.495, "ci_lo": 0.485, "ci_hi": 0.505}]
    assert experiments.non_decreasing_within_bands(rows)
    rows[1].update(ratio_thm1=0.3, ci_lo=0.29, ci_hi=0.31)
    assert not experiments.non_decreasing_within_bands(rows)


# runs, manifests and reproducibility

def test_synth1d_run_writes_manifest(tmp_path):
    man = run_experiment("synth1d", FAST_SYNTH, tmp_path)
    assert set(man.outputs) == {"spectrum.csv", "loss.csv", "manifest.json"}
    assert man.results["peaks"] == [1.0, 3.0, 5.0]
    again = experiments.ExperimentManifest.from_json((tmp_path / "manifest.json").read_text())
    assert again.config["epochs"] == 300 and "synth1d" in again.datasets
    header = (tmp_path / "spectrum.csv").read_text().splitlines()[0].split(",")
    assert header == list(spectral.SPECTRUM_COLUMNS)


def test_manifest_reproduces_csv_bytes(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert cli.main(["synth1d", "--out", str(first), "epochs=200", "record_every=50"]) == 0
    assert cli.main(["synth1d", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
    for name in ("spectrum.csv", "loss.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_theory_run(tmp_path):
    man = run_experiment("theory", FAST_THEORY, tmp_path)
    rows = spectral.read_csv(tmp_path / "theory.csv")
    assert list(rows[0]) == list(experiments.THEORY_COLUMNS) and len(rows) == 2
    assert man.results["rows"] == 2
    assert all(r["implication_violations"] == r["dissipation_violations"] == "0" for r in rows)


def test_ideal_run(tmp_path):
    man = run_experiment("ideal", FAST_IDEAL, tmp_path, make_svg=True)
    assert "dist.svg" in man.outputs and (tmp_path / "filter.csv").exists()
    with pytest.raises(ConfigError):
        run_experiment("ideal", {**FAST_IDEAL, "ordering": "sideways"}, tmp_path)


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        run_experiment("cifar", {}, "unused")


def test_missing_dataset_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        run_experiment("image2d", {"image": str(tmp_path / "none.pgm")}, tmp_path)
    with pytest.raises(FileNotFoundError):
        run_experiment("filter", {"images": str(tmp_path / "x"), "labels": str(tmp_path / "y")},
                       tmp_path)


def test_hybrid_verdict():
    def run(m, costs, errs):
        r = poisson.HybridRun(m)
        for c, e in zip(costs, errs):
            r.add("dnn", 0, c, 0.0, e, [])
        return r

    runs = {0: run(0, [0, 10], [1, 0.01]), None: run(None, [0, 10], [1, 0.5]),
            3: run(3, [0, 5], [1, 0.01])}
    assert experiments.hybrid_verdict(runs, 0.05) == {"best_handoff": 3, "best_cost": 5,
                                                      "hybrid_wins": True}
    runs[3] = run(3, [0, 12], [1, 0.01])
    assert not experiments.hybrid_verdict(runs, 0.05)["hybrid_wins"]


# command line

def test_cli_unknown_key_exit_code(capsys):
    assert cli.main(["synth1d", "learning_rte=3"]) == 2
    assert "learning_rte" in capsys.readouterr().err


def test_cli_flag_forms(tmp_path, capsys):
    code = cli.main(["theory", "--out", str(tmp_path), "--samples", "1000", "--delta=0.25",
                     "--seed", "4"])
    assert code == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["samples"] == 1000 and man["config"]["seed"] == 4
    assert "thm1_non_decreasing" in capsys.readouterr().out


def test_cli_config_file(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("samples = 500\ndelta = 0.5\n")
    assert cli.main(["theory", "--config", str(cfgfile), "--out", str(tmp_path / "o")]) == 0
    assert cli.main(["theory", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fpl", "theory", "sampels=10",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2 and "sampels" in proc.stderr


# SVG

def small_trace():
    tr = spectral.SpectrumTrace(np.array([1.0, 2.0]), np.array([1 + 0j, 0.5j]))
    tr.add(0, [0j, 0j])
    tr.add(10, [0.8 + 0j, 0.1j])
    return tr


def filter_rows(e_low):
    return [{"epoch": 10 * i, "delta": 3.0, "e_low": v, "e_high": 1.0, "dist": v}
            for i, v in enumerate(e_low)]


@pytest.mark.parametrize("kind", ["spectrum", "delta_f"])
def test_svg_is_byte_deterministic(tmp_path, kind):
    a = svg.emit_svg(small_trace(), kind, tmp_path / "a.svg")
    b = svg.emit_svg(small_trace(), kind, tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith("<svg") and ("epoch" in text or "frequency" in text)


def test_empty_series_writes_nothing(tmp_path):
    empty = spectral.SpectrumTrace(np.array([1.0]), np.array([1 + 0j]))
    with pytest.raises(ValueError):
        svg.emit_svg(empty, "spectrum", tmp_path / "e.svg")
    with pytest.raises(ValueError):
        svg.emit_svg([], "filter_heatmap", tmp_path / "f.svg")
    assert not list(tmp_path.iterdir())


def test_schema_mismatch(tmp_path):
    with pytest.raises(TypeError):
        svg.emit_svg(filter_rows([0.5]), "spectrum", tmp_path / "x.svg")
    with pytest.raises(TypeError):
        svg.emit_svg(small_trace(), "filter_heatmap", tmp_path / "x.svg")
    with pytest.raises(TypeError):
        svg.emit_svg({"a": 1}, "error_cost", tmp_path / "x.svg")
    with pytest.raises(ValueError):
        svg.render_svg(small_trace(), "pie")


def test_heatmap_colors_follow_monotone_trace():
    text = svg.render_svg(filter_rows([0.9, 0.7, 0.4, 0.2, 0.1]), "filter_heatmap")
    cells = re.findall(r'<rect class="cell" x="([\d.]+)" y="([\d.]+)"[^>]*fill="#(\w{6})"', text)
    y_low = min(float(y) for _, y, _ in cells)
    column = sorted((float(x), int(c[:2], 16)) for x, y, c in cells if float(y) == y_low)
    reds = [r for _, r in column]
    assert len(reds) == 5 and all(b > a for a, b in zip(reds, reds[1:]))
    rng = re.search(r'id="color-range"[^>]*data-vmin="([^"]+)" data-vmax="([^"]+)"', text)
    assert (float(rng.group(1)), float(rng.group(2))) == (0.1, 1.0)


def test_error_cost_plot():
    r = poisson.HybridRun(0)
    r.add("jacobi", 0, 1.0, 0.0, 1.0, [])
    r.add("jacobi", 10, 100.0, 0.0, 0.01, [])
    text = svg.render_svg({0: r}, "error_cost", eps=0.05)
    assert "cost units" in text and "M=0" in text
