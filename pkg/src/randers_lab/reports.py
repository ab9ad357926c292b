"""Deterministic report writers: JSON, CSV, and small SVG figures.

Reports carry the config hash and library version but no timestamps,
so rerunning the same config yields byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__


def render_json(result: dict, config=None) -> str:
    payload = {"version": __version__, "result": result}
    if config is not None:
        payload["config_hash"] = config.config_hash
        payload["config"] = json.loads(config.to_json())
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_json(path, result: dict, config=None) -> str:
    text = render_json(result, config)
    Path(path).write_text(text)
    return text


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def geodesic_rows(curve):
    """(t, coordinates...) rows for CSV export."""
    return [(float(t),) + tuple(float(c) for c in p) for t, p in zip(curve.ts, curve.points)]


def polyline_svg(points_2d, width: int = 480, height: int = 480, margin: float = 20.0) -> str:
    """SVG polyline through the first two coordinates of a curve."""
    pts = np.asarray(points_2d, dtype=float)[:, :2]
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    scale = min((width - 2 * margin) / span[0], (height - 2 * margin) / span[1])
    xy = (pts - lo) * scale + margin
    coords = " ".join(f"{x:.3f},{height - y:.3f}" for x, y in xy)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'  <polyline fill="none" stroke="black" stroke-width="1.5" points="{coords}"/>\n'
        "</svg>\n"
    )


def histogram_svg(values, bins: int = 24, width: int = 480, height: int = 320,
                  margin: float = 24.0) -> str:
    """Bar histogram of sampled values (displacement reports)."""
    vals = np.asarray(values, dtype=float)
    counts, edges = np.histogram(vals, bins=bins)
    top = max(int(counts.max()), 1)
    bw = (width - 2 * margin) / bins
    bars = []
    for i, c in enumerate(counts):
        bh = (height - 2 * margin) * c / top
        x = margin + i * bw
        y = height - margin - bh
        bars.append(f'  <rect x="{x:.2f}" y="{y:.2f}" width="{bw * 0.9:.2f}" '
                    f'height="{bh:.2f}" fill="steelblue"/>')
    label = (f'  <text x="{margin}" y="{margin * 0.8:.2f}" font-size="11">'
             f"range [{edges[0]:.6g}, {edges[-1]:.6g}]</text>")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n' + "\n".join(bars) + "\n" + label + "\n</svg>\n"
    )
