"""Minimal deterministic SVG line charts for the harness CSV files.

Three kinds are supported:

``snapshot``
    columns ``x, u`` (optionally a leading ``t``: one line per sample time).
``timeseries``
    column ``t`` plus any others, one stacked panel per column. Columns
    ending in ``_res`` use a log axis and show the 1e-6 acceptance level.
``loglog``
    columns ``axis_value, error``; a dashed slope-4 reference line is drawn
    through the first finite point.

Coordinates are printed with fixed precision, so equal inputs give
byte-identical files.
"""
import math
import os
from xml.sax.saxutils import escape

import numpy as np

from .errors import SchemaMismatchError
from .output import atomic_write_text, read_csv

KINDS = ("snapshot", "timeseries", "loglog")
REQUIRED = {"snapshot": ("x", "u"), "timeseries": ("t",), "loglog": ("axis_value", "error")}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
RESIDUAL_LEVEL = 1e-6

WIDTH = 640
PANEL_H = 220
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 150, 30, 45


def _num(v):
    return f"{v:.2f}"


def _tick_label(v, log):
    if log:
        return f"1e{int(round(v))}"
    return f"{v:.4g}"


def _ticks(lo, hi, log, count=5):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, int(math.ceil((b - a) / count)))
        return [float(e) for e in range(a, b + 1, step) if lo - 1e-9 <= e <= hi + 1e-9]
    return list(np.linspace(lo, hi, count))


def _range(values):
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return -1.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if hi - lo < 1e-300 or hi - lo < 1e-12 * max(abs(lo), abs(hi)):
        pad = max(abs(lo), 1.0) * 0.5
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Panel:
    def __init__(self, top, xlabel, ylabel, xlog=False, ylog=False):
        self.top = top
        self.xlabel, self.ylabel = xlabel, ylabel
        self.xlog, self.ylog = xlog, ylog
        self.series = []
        self.refs = []

    def _tx(self, v):
        return np.log10(v) if self.xlog else v

    def _ty(self, v):
        return np.log10(v) if self.ylog else v

    def add(self, x, y, label):
        x, y = self._tx(np.asarray(x, float)), self._ty(np.asarray(y, float))
        keep = np.isfinite(x) & np.isfinite(y)
        self.series.append((x[keep], y[keep], label))

    def reference(self, x, y, label):
        x, y = self._tx(np.asarray(x, float)), self._ty(np.asarray(y, float))
        self.refs.append((x, y, label))

    def render(self, out):
        xs = np.concatenate([s[0] for s in self.series] + [np.zeros(0)])
        ys = np.concatenate([s[1] for s in self.series] + [r[1] for r in self.refs] + [np.zeros(0)])
        x0, x1 = _range(xs)
        y0, y1 = _range(ys)
        left, right = MARGIN_L, WIDTH - MARGIN_R
        top, bottom = self.top + MARGIN_T, self.top + PANEL_H - MARGIN_B

        def px(v):
            return left + (v - x0) / (x1 - x0) * (right - left)

        def py(v):
            return bottom - (v - y0) / (y1 - y0) * (bottom - top)

        out.append(f'<rect x="{left}" y="{_num(top)}" width="{right - left}" height="{_num(bottom - top)}" fill="none" stroke="#000"/>')
        for v in _ticks(x0, x1, self.xlog):
            out.append(f'<line x1="{_num(px(v))}" y1="{_num(bottom)}" x2="{_num(px(v))}" y2="{_num(bottom + 4)}" stroke="#000"/>')
            out.append(f'<text x="{_num(px(v))}" y="{_num(bottom + 16)}" text-anchor="middle">{escape(_tick_label(v, self.xlog))}</text>')
        for v in _ticks(y0, y1, self.ylog):
            out.append(f'<line x1="{left - 4}" y1="{_num(py(v))}" x2="{left}" y2="{_num(py(v))}" stroke="#000"/>')
            out.append(f'<text x="{left - 6}" y="{_num(py(v) + 4)}" text-anchor="end">{escape(_tick_label(v, self.ylog))}</text>')
        out.append(f'<text x="{_num(0.5 * (left + right))}" y="{_num(bottom + 34)}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="14" y="{_num(0.5 * (top + bottom))}" text-anchor="middle" transform="rotate(-90 14 {_num(0.5 * (top + bottom))})">{escape(self.ylabel)}</text>')
        legend_y = top + 4
        entries = [(s, PALETTE[i % len(PALETTE)], "") for i, s in enumerate(self.series)]
        entries += [(r, "#555", ' stroke-dasharray="6 4"') for r in self.refs]
        for (x, y, label), color, dash in entries:
            x = np.clip(x, x0, x1)
            y = np.clip(y, y0, y1)
            if x.size:
                pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(x, y))
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
            out.append(f'<line x1="{right + 10}" y1="{_num(legend_y)}" x2="{right + 30}" y2="{_num(legend_y)}" stroke="{color}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{right + 34}" y="{_num(legend_y + 4)}">{escape(label)}</text>')
            legend_y += 16


def _document(panels, title):
    height = PANEL_H * len(panels) + 10
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f"<title>{escape(title)}</title>",
        f'<rect width="{WIDTH}" height="{height}" fill="#fff"/>',
    ]
    for panel in panels:
        panel.render(out)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _col(header, data, name):
    return data[:, header.index(name)]


def _check_schema(header, kind):
    missing = [c for c in REQUIRED[kind] if c not in header]
    if missing:
        raise SchemaMismatchError(f"{kind} chart needs columns {missing}, got {header}")
    if kind == "timeseries" and len(header) < 2:
        raise SchemaMismatchError("timeseries chart needs at least one column besides t")


def render_snapshot(header, data, title):
    panel = _Panel(0, "x", "u")
    x, u = _col(header, data, "x"), _col(header, data, "u")
    if "t" in header:
        t = _col(header, data, "t")
        for tk in np.unique(t):
            sel = t == tk
            panel.add(x[sel], u[sel], f"t = {tk:.4g}")
    else:
        panel.add(x, u, "u")
    return _document([panel], title)


def render_timeseries(header, data, title):
    t = _col(header, data, "t")
    panels = []
    for name in header:
        if name == "t":
            continue
        y = _col(header, data, name)
        log = name.endswith("_res")
        panel = _Panel(PANEL_H * len(panels), "t", name, ylog=log)
        if log:
            y = np.where(y > 0, y, np.nan)
            panel.reference([t.min(), t.max()], [RESIDUAL_LEVEL, RESIDUAL_LEVEL], "1e-6")
        panel.add(t, y, name)
        panels.append(panel)
    return _document(panels, title)


def render_loglog(header, data, title):
    h, err = _col(header, data, "axis_value"), _col(header, data, "error")
    keep = (h > 0) & (err > 0) & np.isfinite(err)
    panel = _Panel(0, "step / resolution", "error", xlog=True, ylog=True)
    panel.add(h[keep], err[keep], "error")
    if np.any(keep):
        h0, e0 = h[keep][0], err[keep][0]
        hs = np.array([h[keep].min(), h[keep].max()])
        panel.reference(hs, e0 * (hs / h0) ** 4, "slope 4")
    return _document([panel], title)


RENDERERS = {"snapshot": render_snapshot, "timeseries": render_timeseries, "loglog": render_loglog}


def plot_csv(csv_path, kind, svg_path=None):
    """Render ``csv_path`` as an SVG chart next to it (or at ``svg_path``); returns the SVG path."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    try:
        header, data = read_csv(csv_path)
    except ValueError as exc:
        raise SchemaMismatchError(f"cannot read {csv_path}: {exc}") from exc
    _check_schema(header, kind)
    if data.shape[0] == 0:
        raise SchemaMismatchError(f"{csv_path} has no data rows")
    text = RENDERERS[kind](header, data, f"{kind}: {os.path.basename(str(csv_path))}")
    if svg_path is None:
        svg_path = str(csv_path).rsplit(".", 1)[0] + ".svg"
    return atomic_write_text(svg_path, text)
