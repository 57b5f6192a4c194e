"""Deterministic CSV, JSON and SVG emitters.

Floats in CSV are written with 17 significant digits so that reading a file
back reproduces every value bit for bit.  SVG files are plain SVG 1.1
polylines with no external references; coordinates are rounded to 1e-3 px so
a fixed input always gives the same bytes.
"""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

FLOAT_FORMAT = ".17g"
PALETTE = ("#1f4e99", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#555555")


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), FLOAT_FORMAT)
    if v is None:
        return ""
    return str(v)


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(header, rows))
    return path


def read_csv(path):
    """Header and rows of a file written by :func:`write_csv`; numeric cells become floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            cells = []
            for cell in row:
                try:
                    cells.append(float(cell))
                except ValueError:
                    cells.append(cell)
            rows.append(cells)
    return header, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def json_text(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(json_text(obj))
    return path


# --- SVG -------------------------------------------------------------------------

WIDTH = 640
HEIGHT = 480
PAD_LEFT, PAD_RIGHT, PAD_TOP, PAD_BOTTOM = 70, 20, 40, 50


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _extent(series, extent):
    if extent is not None:
        x0, x1, y0, y1 = extent
    else:
        xs = np.concatenate([np.asarray(s["x"], dtype=float).ravel() for s in series])
        ys = np.concatenate([np.asarray(s["y"], dtype=float).ravel() for s in series])
        ok = np.isfinite(xs) & np.isfinite(ys)
        x0, x1 = float(xs[ok].min()), float(xs[ok].max())
        y0, y1 = float(ys[ok].min()), float(ys[ok].max())
    # 5% margins; a degenerate range gets a unit-sized window
    dx = (x1 - x0) or max(abs(x0), 1.0)
    dy = (y1 - y0) or max(abs(y0), 1.0)
    return x0 - 0.05 * dx, x1 + 0.05 * dx, y0 - 0.05 * dy, y1 + 0.05 * dy


def svg_plot(series, title="", xlabel="", ylabel="", extent=None, equal_aspect=False, axes=True):
    """Render line series as an SVG 1.1 document string.

    Parameters
    ----------
    series : list of dict
        Each has ``x``, ``y`` and optionally ``label``, ``color``, ``width`` and
        ``marker`` (draw points as dots instead of a polyline).
    extent : (x0, x1, y0, y1), optional
        Data window before the 5% margins; defaults to the data extents.
    """
    x0, x1, y0, y1 = _extent(series, extent)
    pw = WIDTH - PAD_LEFT - PAD_RIGHT
    ph = HEIGHT - PAD_TOP - PAD_BOTTOM
    sx = pw / (x1 - x0)
    sy = ph / (y1 - y0)
    if equal_aspect:
        sx = sy = min(sx, sy)
    ox = PAD_LEFT + 0.5 * (pw - sx * (x1 - x0))
    oy = PAD_TOP + 0.5 * (ph - sy * (y1 - y0))

    def px(x):
        return ox + (np.asarray(x, dtype=float) - x0) * sx

    def py(y):
        return oy + (y1 - np.asarray(y, dtype=float)) * sy

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.3f}" y="24" font-family="sans-serif" font-size="15" '
            f'text-anchor="middle">{_esc(title)}</text>'
        )
    if axes:
        bx0, by0 = px(x0), py(y1)
        out.append(
            f'<rect x="{bx0:.3f}" y="{by0:.3f}" width="{sx * (x1 - x0):.3f}" '
            f'height="{sy * (y1 - y0):.3f}" fill="none" stroke="#000000" stroke-width="1"/>'
        )
        for frac in (0.0, 0.5, 1.0):
            xv = x0 + frac * (x1 - x0)
            yv = y0 + frac * (y1 - y0)
            out.append(
                f'<text x="{float(px(xv)):.3f}" y="{float(py(y0)) + 16:.3f}" font-family="sans-serif" '
                f'font-size="11" text-anchor="middle">{xv:.4g}</text>'
            )
            out.append(
                f'<text x="{float(px(x0)) - 6:.3f}" y="{float(py(yv)) + 4:.3f}" font-family="sans-serif" '
                f'font-size="11" text-anchor="end">{yv:.4g}</text>'
            )
        if xlabel:
            out.append(
                f'<text x="{WIDTH / 2:.3f}" y="{HEIGHT - 10}" font-family="sans-serif" '
                f'font-size="13" text-anchor="middle">{_esc(xlabel)}</text>'
            )
        if ylabel:
            out.append(
                f'<text x="16" y="{HEIGHT / 2:.3f}" font-family="sans-serif" font-size="13" '
                f'text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2:.3f})">{_esc(ylabel)}</text>'
            )
    legend_y = PAD_TOP + 14
    for k, s in enumerate(series):
        color = s.get("color", PALETTE[k % len(PALETTE)])
        width = s.get("width", 1.5)
        xs, ys = px(s["x"]), py(s["y"])
        ok = np.isfinite(xs) & np.isfinite(ys)
        if s.get("marker"):
            for a, b in zip(xs[ok], ys[ok]):
                out.append(f'<circle cx="{a:.3f}" cy="{b:.3f}" r="3.5" fill="{color}"/>')
        else:
            pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(xs[ok], ys[ok]))
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
                f'stroke-linejoin="round" points="{pts}"/>'
            )
        if s.get("label"):
            lx = WIDTH - PAD_RIGHT - 150
            out.append(
                f'<line x1="{lx}" y1="{legend_y - 4}" x2="{lx + 20}" y2="{legend_y - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            out.append(
                f'<text x="{lx + 26}" y="{legend_y}" font-family="sans-serif" '
                f'font-size="12">{_esc(s["label"])}</text>'
            )
            legend_y += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def oblique_projection(t, x1, x2, azimuth=30.0, elevation=20.0, bounds=None):
    """Orthographic view of the curve (t, x1, x2) from a fixed oblique direction.

    Each axis is first scaled to unit range, using ``bounds`` (three
    (min, max) pairs) when given so that several curves share one frame; this
    keeps the long time axis from flattening the picture.  Returns screen
    coordinates (u, v).
    """
    arrays = [np.asarray(a, dtype=float) for a in (t, x1, x2)]
    if bounds is None:
        bounds = [(float(a.min()), float(a.max())) for a in arrays]
    a, b, c = (
        (arr - 0.5 * (lo + hi)) / ((hi - lo) or 1.0) for arr, (lo, hi) in zip(arrays, bounds)
    )
    az, el = math.radians(azimuth), math.radians(elevation)
    u = a * math.cos(az) - b * math.sin(az)
    v = (a * math.sin(az) + b * math.cos(az)) * math.sin(el) + c * math.cos(el)
    return u, v


def write_svg(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path
