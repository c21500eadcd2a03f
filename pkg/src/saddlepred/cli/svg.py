"""Minimal self-contained SVG line and scatter plots from numeric CSV files."""
from __future__ import annotations

import math
from html import escape

import numpy as np

from .csvio import CsvFormatError, read_numeric_csv

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=80, right=170, top=30, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")
KINDS = ("line", "scatter")


def _num(x):
    return f"{x:.2f}"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 8)
        return [float(e) for e in range(a, b + 1, step)]
    if hi == lo:
        return [lo]
    raw = (hi - lo) / 6
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _label(v, log):
    if log:
        return f"1e{int(v)}"
    return f"{v:.4g}"


def _transform(values, log, name):
    values = np.asarray(values, dtype=np.float64)
    if not log:
        return values
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(values > 0, np.log10(np.where(values > 0, values, 1.0)), np.nan)
    return out


def _series_from_csv(header, cols, kind):
    data = {h: np.asarray(c) for h, c in zip(header, cols)}
    if kind == "scatter":
        if "x" in data and "y" in data:
            x, y = data["x"], data["y"]
            if "step" in data and data["step"].size:
                keep = data["step"] == data["step"].max()
                x, y = x[keep], y[keep]
            return "x", [("y", x, y)]
        if len(header) < 2:
            raise CsvFormatError("scatter needs at least two columns")
        return header[0], [(h, data[header[0]], data[h]) for h in header[1:]]
    if len(header) < 2:
        raise CsvFormatError("line plot needs an x column and at least one series")
    return header[0], [(h, data[header[0]], data[h]) for h in header[1:]]


def render_svg(xlabel, series, kind="line", logx=False, logy=False, title=""):
    """Build the SVG document text for ``series = [(name, x, y), ...]``."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    tx = [(n, _transform(x, logx, n), _transform(y, logy, n)) for n, x, y in series]
    finite = [(x[np.isfinite(x) & np.isfinite(y)], y[np.isfinite(x) & np.isfinite(y)])
              for _, x, y in tx]
    allx = np.concatenate([f[0] for f in finite]) if finite else np.zeros(0)
    ally = np.concatenate([f[1] for f in finite]) if finite else np.zeros(0)
    if allx.size == 0:
        allx, ally = np.zeros(1), np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.03 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(v):
        return L + (v - x0) / (x1 - x0) * (R - L)

    def py(v):
        return B - (v - y0) / (y1 - y0) * (B - T)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
           f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1, logx):
        if x0 <= t <= x1:
            out.append(f'<line x1="{_num(px(t))}" y1="{B}" x2="{_num(px(t))}" y2="{B + 5}" stroke="black"/>')
            out.append(f'<text x="{_num(px(t))}" y="{B + 18}" text-anchor="middle">{_label(t, logx)}</text>')
    for t in _ticks(y0, y1, logy):
        if y0 <= t <= y1:
            out.append(f'<line x1="{L - 5}" y1="{_num(py(t))}" x2="{L}" y2="{_num(py(t))}" stroke="black"/>')
            out.append(f'<text x="{L - 8}" y="{_num(py(t) + 4)}" text-anchor="end">{_label(t, logy)}</text>')
    out.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')

    for i, (name, x, y) in enumerate(tx):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(x) & np.isfinite(y)
        pts = [(px(a), py(b)) for a, b in zip(x[ok], y[ok])]
        if kind == "line" and len(pts) > 1:
            d = " ".join(f"{_num(a)},{_num(b)}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{d}"/>')
        else:
            r = 1.5 if kind == "scatter" else 3
            out.extend(f'<circle cx="{_num(a)}" cy="{_num(b)}" r="{r}" fill="{color}"/>' for a, b in pts)
        ly = T + 15 + 18 * i
        out.append(f'<rect x="{R + 15}" y="{ly - 9}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{R + 32}" y="{ly + 1}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_path, kind, out_svg, logx=False, logy=False):
    """Plot the first CSV column against the others (or ``x``/``y`` for sample dumps)."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    header, cols = read_numeric_csv(csv_path)
    xlabel, series = _series_from_csv(header, cols, kind)
    text = render_svg(xlabel, series, kind, logx, logy)
    with open(out_svg, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return out_svg
