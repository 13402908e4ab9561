"""Command line: ``fpl <experiment> [--config FILE] [--out DIR] [--seed N] [--svg] [key=value ...]``.

Extra settings may also be written ``--key value`` or ``--key=value``.
``FPL_THREADS`` caps the BLAS worker count (default 1, which keeps
results bit-stable across machines with different core counts).
"""

from __future__ import annotations

import argparse
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _limit_threads() -> None:
    n = os.environ.get("FPL_THREADS", "1")
    for var in _THREAD_VARS:
        os.environ.setdefault(var, n)


def _split_overrides(extra):
    """``key=value`` / ``--key value`` / ``--key=value`` -> dict."""
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if tok.startswith("--"):
            tok = tok[2:]
            if "=" not in tok:
                if i + 1 >= len(extra):
                    raise SystemExit(f"fpl: option --{tok} needs a value")
                tok = f"{tok}={extra[i + 1]}"
                i += 1
        if "=" not in tok:
            raise SystemExit(f"fpl: expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpl", description="Frequency-principle experiments.")
    p.add_argument("experiment", help="synth1d, project, filter, poisson, hybrid, theory, "
                                      "parity, image2d or ideal")
    p.add_argument("--config", help="flat key = value file, or a previous manifest.json")
    p.add_argument("--out", default="fpl-out", help="output directory (default fpl-out)")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--svg", action="store_true", help="also write SVG plots")
    return p


def main(argv=None) -> int:
    _limit_threads()
    from . import _runtime, experiments

    _runtime.tune_allocator()
    args, extra = build_parser().parse_known_args(argv)
    try:
        overrides = experiments.load_config_file(args.config) if args.config else {}
        overrides.update(_split_overrides(extra))
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        manifest = experiments.run_experiment(args.experiment, overrides, args.out, args.svg)
    except (experiments.ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"fpl: error: {exc}", file=sys.stderr)
        return 2
    print(f"fpl: {args.experiment} finished; outputs in {args.out}")
    for key, value in manifest.results.items():
        print(f"  {key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
