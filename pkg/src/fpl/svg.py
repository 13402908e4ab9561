"""Small, dependency-free SVG plots of experiment traces.

Output is byte-deterministic: every number is written with a fixed format
and element order follows the input order.  Nothing is written when the
input has no data.

Plot kinds
----------
``spectrum``        |target| and |fit| coefficients at the last epoch (SpectrumTrace)
``delta_f``         Delta_F(k) against epoch, one line per k (SpectrumTrace)
``filter_heatmap``  e_low / e_high per (delta, epoch) cell (filter CSV rows)
``dist``            Dist(y^delta, h) against epoch, one line per delta (filter CSV rows)
``error_cost``      sup-norm error against cost units, one line per hand-off ({M: HybridRun})
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np

from . import poisson, spectral

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
KINDS = ("spectrum", "delta_f", "filter_heatmap", "dist", "error_cost")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _esc(text: str) -> str:
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Axes:
    """Maps data to pixels, optionally on log10 scales."""

    def __init__(self, xs, ys, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        tx = self._t(np.asarray(xs, dtype=np.float64), logx)
        ty = self._t(np.asarray(ys, dtype=np.float64), logy)
        tx, ty = tx[np.isfinite(tx)], ty[np.isfinite(ty)]
        if tx.size == 0 or ty.size == 0:
            raise ValueError("nothing finite to plot")
        self.x0, self.x1 = self._span(tx.min(), tx.max())
        self.y0, self.y1 = self._span(ty.min(), ty.max())

    @staticmethod
    def _t(v, log):
        if not log:
            return v
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)

    @staticmethod
    def _span(lo, hi):
        if hi - lo < 1e-12:
            return lo - 0.5, hi + 0.5
        return lo, hi

    def px(self, x):
        t = self._t(np.asarray(x, dtype=np.float64), self.logx)
        return LEFT + (t - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        t = self._t(np.asarray(y, dtype=np.float64), self.logy)
        return HEIGHT - BOTTOM - (t - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def frame(self, xlabel, ylabel, title):
        out = [f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" '
               f'height="{HEIGHT - TOP - BOTTOM}" fill="none" stroke="#000"/>']
        for axis in "xy":
            lo, hi = (self.x0, self.x1) if axis == "x" else (self.y0, self.y1)
            log = self.logx if axis == "x" else self.logy
            for i in range(5):
                t = lo + (hi - lo) * i / 4
                label = f"1e{t:.1f}" if log else f"{t:.3g}"
                if axis == "x":
                    p = LEFT + (t - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
                    out.append(f'<text x="{_f(p)}" y="{HEIGHT - BOTTOM + 16}" '
                               f'text-anchor="middle" font-size="11">{label}</text>')
                else:
                    p = HEIGHT - BOTTOM - (t - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
                    out.append(f'<text x="{LEFT - 6}" y="{_f(p + 4)}" '
                               f'text-anchor="end" font-size="11">{label}</text>')
        mid_x = (LEFT + WIDTH - RIGHT) / 2
        mid_y = (TOP + HEIGHT - BOTTOM) / 2
        out.append(f'<text x="{_f(mid_x)}" y="{HEIGHT - 12}" text-anchor="middle" '
                   f'font-size="13">{_esc(xlabel)}</text>')
        out.append(f'<text x="16" y="{_f(mid_y)}" text-anchor="middle" font-size="13" '
                   f'transform="rotate(-90 16 {_f(mid_y)})">{_esc(ylabel)}</text>')
        out.append(f'<text x="{_f(mid_x)}" y="18" text-anchor="middle" '
                   f'font-size="14">{_esc(title)}</text>')
        return out

    def line(self, xs, ys, color, dash=False, marker=False):
        px, py = self.px(xs), self.py(ys)
        ok = np.isfinite(px) & np.isfinite(py)
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(px[ok], py[ok]))
        style = ' stroke-dasharray="6,3"' if dash else ""
        out = [f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{style}/>']
        if marker:
            out += [f'<circle cx="{_f(a)}" cy="{_f(b)}" r="2.5" fill="{color}"/>'
                    for a, b in zip(px[ok], py[ok])]
        return out


def _legend(labels):
    out = []
    for i, text in enumerate(labels):
        y = TOP + 14 + 16 * i
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<line x1="{WIDTH - RIGHT + 10}" y1="{y - 4}" x2="{WIDTH - RIGHT + 30}" '
                   f'y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 35}" y="{y}" font-size="11">{_esc(text)}</text>')
    return out


def _document(body) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>',
                      *body, "</svg>"]) + "\n"


def _need_spectrum(trace, kind):
    if not isinstance(trace, spectral.SpectrumTrace):
        raise TypeError(f"plot kind {kind!r} needs a SpectrumTrace")
    if not trace.epochs or len(trace.ks) == 0:
        raise ValueError("empty series: the trace has no recorded epochs")


def _need_rows(rows, kind):
    if isinstance(rows, Mapping) or not isinstance(rows, Sequence):
        raise TypeError(f"plot kind {kind!r} needs a list of filter rows")
    if not rows:
        raise ValueError("empty series: no filter rows")
    missing = set(spectral.FILTER_COLUMNS) - set(rows[0])
    if missing:
        raise TypeError(f"filter rows lack columns {sorted(missing)}")


def _spectrum(trace):
    _need_spectrum(trace, "spectrum")
    ks = np.asarray(trace.ks, dtype=np.float64)
    y = np.abs(trace.yhat)
    h = np.abs(trace.hhat[-1])
    ax = _Axes(np.r_[ks, ks], np.r_[y, h])
    body = ax.frame("frequency k (grid units)", "amplitude |coefficient|",
                    f"spectrum at epoch {trace.epochs[-1]}")
    body += ax.line(ks, y, PALETTE[1], marker=True)
    body += ax.line(ks, h, PALETTE[0], dash=True)
    return body + _legend(["target", "fit"])


def _delta_f(trace, ks=None):
    _need_spectrum(trace, "delta_f")
    grid = [float(k) for k in trace.ks]
    ks = grid if ks is None else [float(k) for k in ks]
    cols = [grid.index(k) for k in ks]
    d = trace.delta[:, cols]
    ep = np.asarray(trace.epochs, dtype=np.float64)
    if not np.isfinite(d).any():
        raise ValueError("empty series: Delta_F undefined at every point")
    ax = _Axes(ep, d[np.isfinite(d)])
    body = ax.frame("epoch", "Delta_F (relative error)", "relative error per frequency")
    for i in range(len(cols)):
        body += ax.line(ep, d[:, i], PALETTE[i % len(PALETTE)])
    return body + _legend([f"k={k:g}" for k in ks])


def heat_color(t: float) -> str:
    """Fixed white-to-dark-blue ramp for ``t`` in [0, 1]."""
    t = min(max(float(t), 0.0), 1.0)
    r = round(255 - t * (255 - 8))
    g = round(255 - t * (255 - 48))
    b = round(255 - t * (255 - 107))
    return f"#{r:02x}{g:02x}{b:02x}"


def _filter_heatmap(rows):
    _need_rows(rows, "filter_heatmap")
    epochs = sorted({r["epoch"] for r in rows})
    deltas = sorted({r["delta"] for r in rows})
    lines = [(d, part) for d in deltas for part in ("e_low", "e_high")]
    value = {(r["delta"], r["epoch"]): r for r in rows}
    vals = np.array([r[p] for r in rows for p in ("e_low", "e_high")], dtype=np.float64)
    vmin, vmax = float(np.nanmin(vals)), float(np.nanmax(vals))
    span = vmax - vmin if vmax > vmin else 1.0
    cw = (WIDTH - LEFT - RIGHT) / len(epochs)
    ch = (HEIGHT - TOP - BOTTOM) / len(lines)
    body = []
    for j, (d, part) in enumerate(lines):
        y = TOP + j * ch
        body.append(f'<text x="{LEFT - 6}" y="{_f(y + ch / 2 + 4)}" text-anchor="end" '
                    f'font-size="11">{part} d={d:g}</text>')
        for i, e in enumerate(epochs):
            r = value.get((d, e))
            if r is None:
                continue
            body.append(f'<rect class="cell" x="{_f(LEFT + i * cw)}" y="{_f(y)}" '
                        f'width="{_f(cw)}" height="{_f(ch)}" '
                        f'fill="{heat_color((r[part] - vmin) / span)}"/>')
    body.append(f'<text x="{LEFT}" y="{HEIGHT - BOTTOM + 16}" font-size="11">'
                f'epoch {epochs[0]}</text>')
    body.append(f'<text x="{WIDTH - RIGHT}" y="{HEIGHT - BOTTOM + 16}" text-anchor="end" '
                f'font-size="11">epoch {epochs[-1]}</text>')
    body.append(f'<text x="{(LEFT + WIDTH - RIGHT) / 2:.2f}" y="{HEIGHT - 12}" '
                f'text-anchor="middle" font-size="13">epoch</text>')
    body.append(f'<text x="{(LEFT + WIDTH - RIGHT) / 2:.2f}" y="18" text-anchor="middle" '
                f'font-size="14">relative error of low / high parts</text>')
    # color bar with its range
    x0 = WIDTH - RIGHT + 20
    for i in range(10):
        body.append(f'<rect x="{x0}" y="{_f(TOP + 20 + 20 * (9 - i))}" width="20" height="20" '
                    f'fill="{heat_color(i / 9)}"/>')
    body.append(f'<text id="color-range" x="{x0}" y="{TOP + 12}" font-size="11" '
                f'data-vmin="{vmin!r}" data-vmax="{vmax!r}">color range '
                f'{vmin:.3g} .. {vmax:.3g}</text>')
    body.append(f'<text x="{x0 + 24}" y="{TOP + 34}" font-size="11">{vmax:.3g}</text>')
    body.append(f'<text x="{x0 + 24}" y="{TOP + 216}" font-size="11">{vmin:.3g}</text>')
    return body


def _dist(rows):
    _need_rows(rows, "dist")
    deltas = sorted({r["delta"] for r in rows})
    series = []
    for d in deltas:
        sel = sorted((r for r in rows if r["delta"] == d), key=lambda r: r["epoch"])
        series.append((np.array([r["epoch"] for r in sel], dtype=np.float64),
                       np.array([r["dist"] for r in sel], dtype=np.float64)))
    ax = _Axes(np.concatenate([s[0] for s in series]), np.concatenate([s[1] for s in series]))
    body = ax.frame("epoch", "Dist(y_low, h) (mean squared)", "distance to filtered labels")
    for i, (e, v) in enumerate(series):
        body += ax.line(e, v, PALETTE[i % len(PALETTE)])
    return body + _legend([f"delta={d:g}" for d in deltas])


def _error_cost(runs, eps=None):
    if not isinstance(runs, Mapping) or not all(isinstance(r, poisson.HybridRun)
                                                for r in runs.values()):
        raise TypeError("plot kind 'error_cost' needs a mapping of HybridRun traces")
    series = [(m, np.asarray(r.cost_units), np.asarray(r.sup_norm)) for m, r in runs.items()
              if r.step]
    if not series:
        raise ValueError("empty series: no hybrid records")
    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2] for s in series] + ([np.array([eps])] if eps else []))
    ax = _Axes(xs, ys, logx=True, logy=True)
    body = ax.frame("cost units (FLOP estimate)", "sup-norm error", "error against cost")
    for i, (_, c, e) in enumerate(series):
        body += ax.line(c, e, PALETTE[i % len(PALETTE)])
    if eps:
        body += ax.line(10 ** np.array([ax.x0, ax.x1]), [eps, eps], "#000", dash=True)
    return body + _legend(["M=inf" if m is None else f"M={m}" for m, _, _ in series])


def render_svg(trace, kind: str, **options) -> str:
    if kind == "spectrum":
        body = _spectrum(trace)
    elif kind == "delta_f":
        body = _delta_f(trace, options.get("ks"))
    elif kind == "filter_heatmap":
        body = _filter_heatmap(trace)
    elif kind == "dist":
        body = _dist(trace)
    elif kind == "error_cost":
        body = _error_cost(trace, options.get("eps"))
    else:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {KINDS}")
    return _document(body)


def emit_svg(trace, kind: str, path, **options) -> Path:
    """Render and write; raises before touching ``path`` on bad input."""
    text = render_svg(trace, kind, **options)
    path = Path(path)
    path.write_text(text)
    return path


__all__ = ["emit_svg", "render_svg", "heat_color", "KINDS"]
