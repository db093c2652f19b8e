"""Deterministic CSV and SVG emission.

CSV files carry 12 significant digits and are written via a temp file plus
atomic rename, so readers never observe a partial file. SVG charts are
generated natively (no plotting library); CSV stays the authoritative
output, plots are courtesy.
"""

from __future__ import annotations

import math
import os
import tempfile

_COLORS = ("#1965b0", "#dc050c", "#4eb265", "#f7a800", "#882e72", "#777777")


def format_sig(value) -> str:
    """12 significant digits, scientific notation."""
    return f"{float(value):.11e}"


def write_csv_atomic(path, header, rows) -> str:
    """Write rows of floats (12 sig digits) under ``header``; atomic rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_sig(v) for v in row))
    payload = "\n".join(lines) + "\n"
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_text_atomic(path, text) -> str:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _ticks(lo, hi, n=5):
    if lo == hi:
        hi = lo + 1.0
    span = hi - lo
    raw = span / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(t)
        t += step
    return ticks


def svg_line_chart(path, xs, series, title="", xlabel="", ylabel="",
                   logx=False, logy=False) -> str:
    """Minimal multi-series line chart; ``series`` maps label -> y values."""
    width, height = 640, 480
    ml, mr, mt, mb = 70, 20, 36, 48
    pw, ph = width - ml - mr, height - mt - mb

    def xt(v):
        return math.log10(v) if logx else v

    def yt(v):
        return math.log10(v) if logy else v

    xv = [xt(x) for x in xs]
    all_y = [yt(y) for ys in series.values() for y in ys
             if math.isfinite(yt(y))]
    if not all_y:
        all_y = [0.0, 1.0]
    x_lo, x_hi = min(xv), max(xv)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_lo == x_hi:
        x_hi = x_lo + 1.0
    if y_lo == y_hi:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return mt + ph - (v - y_lo) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{width/2:.1f}" y="20" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        label = f"1e{t:.0f}" if logx else f"{t:.4g}"
        parts.append(f'<line x1="{x:.1f}" y1="{mt+ph}" x2="{x:.1f}" '
                     f'y2="{mt+ph+4}" stroke="#333"/>')
        parts.append(f'<text x="{x:.1f}" y="{mt+ph+16}" text-anchor="middle">'
                     f'{label}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        label = f"1e{t:.0f}" if logy else f"{t:.4g}"
        parts.append(f'<line x1="{ml-4}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" '
                     f'stroke="#333"/>')
        parts.append(f'<text x="{ml-7}" y="{y+3:.1f}" text-anchor="end">{label}</text>')
    if xlabel:
        parts.append(f'<text x="{ml+pw/2:.1f}" y="{height-10}" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{mt+ph/2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 16 {mt+ph/2:.1f})">{ylabel}</text>')
    for idx, (label, ys) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = []
        for x, y in zip(xv, ys):
            yy = yt(y)
            if math.isfinite(yy):
                pts.append(f"{px(x):.2f},{py(yy):.2f}")
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{ml+pw-6}" y="{mt+14+idx*14}" text-anchor="end" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    return write_text_atomic(path, "\n".join(parts) + "\n")
