"""
Scatter plot of real, condition and generated points as a standalone SVG
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Union
from xml.sax.saxutils import escape

import numpy as np

logger = logging.getLogger(__name__)

SIZE = 480
MARGIN = 32

# point class -> fill colour, drawn in this order
POINT_CLASSES = {
    "real": "#1f77b4",
    "condition": "#8c8c8c",
    "generated": "#d62728",
}


def _bounds(clouds: Iterable[np.ndarray]):
    stacked = [c for c in clouds if c is not None and len(c)]
    if not stacked:
        return np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    pts = np.concatenate(stacked, axis=0)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = np.maximum((hi - lo) * 0.05, 1e-6)
    return lo - pad, hi + pad


def _axes(lo: np.ndarray, hi: np.ndarray, scale: float) -> List[str]:
    """x axis along the bottom and y axis along the left of the plot area, labelled with min/max"""
    x0, y0 = MARGIN, SIZE - MARGIN
    x1 = MARGIN + (hi[0] - lo[0]) * scale
    y1 = SIZE - MARGIN - (hi[1] - lo[1]) * scale
    font = 'font-family="sans-serif" font-size="10" fill="#444"'
    return [
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x1:.2f}" y2="{y0}" stroke="#444"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1:.2f}" stroke="#444"/>',
        f'<text class="tick" x="{x0}" y="{y0 + 14}" {font}>{lo[0]:.3g}</text>',
        f'<text class="tick" x="{x1:.2f}" y="{y0 + 14}" text-anchor="end" {font}>{hi[0]:.3g}</text>',
        f'<text class="tick" x="{x0 - 4}" y="{y0}" text-anchor="end" {font}>{lo[1]:.3g}</text>',
        f'<text class="tick" x="{x0 - 4}" y="{y1 + 8:.2f}" text-anchor="end" {font}>{hi[1]:.3g}</text>',
    ]


def render_scatter(samples: Dict[str, np.ndarray], title: str = "") -> str:
    """Each class in samples is an (n, 2) array; unknown classes are ignored"""
    clouds = {k: np.asarray(v, dtype=np.float64).reshape(-1, 2) for k, v in samples.items() if k in POINT_CLASSES}
    lo, hi = _bounds(clouds.values())
    span = SIZE - 2 * MARGIN
    scale = span / np.max(hi - lo)

    def to_px(p: np.ndarray) -> np.ndarray:
        px = (p - lo) * scale + MARGIN
        px[:, 1] = SIZE - px[:, 1]   # y grows upwards
        return px

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{MARGIN}" y="{MARGIN // 2 + 4}" font-family="sans-serif" '
                     f'font-size="13">{escape(title)}</text>')
    for name, colour in POINT_CLASSES.items():
        pts = clouds.get(name)
        if pts is None or not len(pts):
            continue
        parts.append(f'<g class="{name}" fill="{colour}" fill-opacity="0.6">')
        parts.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2"/>' for x, y in to_px(pts))
        parts.append('</g>')

    parts.extend(_axes(lo, hi, scale))

    # legend squares, top right, one per drawn class
    drawn = [name for name in POINT_CLASSES if name in clouds and len(clouds[name])]
    for i, name in enumerate(drawn):
        y = MARGIN // 2 + 4 + 14 * i
        parts.append(f'<rect class="legend" x="{SIZE - 114}" y="{y - 8}" width="8" height="8" '
                     f'fill="{POINT_CLASSES[name]}"/>')
        parts.append(f'<text x="{SIZE - 100}" y="{y}" font-family="sans-serif" font-size="11">{name}</text>')
    parts.append('</svg>')
    return "\n".join(parts) + "\n"


def write_scatter(path: Union[str, Path], samples: Dict[str, np.ndarray], title: str = "") -> Path:
    path = Path(path)
    path.write_text(render_scatter(samples, title), encoding="utf-8")
    return path
