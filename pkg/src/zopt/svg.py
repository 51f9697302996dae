"""Minimal static SVG charts: convergence curves and two-panel bar summaries.

Hand-rolled on purpose — the output is a self-contained file with no
timestamps, so identical inputs produce byte-identical plots.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

_WIDTH = 720
_HEIGHT = 420
_MARGIN = 60

# proposal method gets the green/purple pair; baselines cycle the rest
_SO_COLORS = ("#2ca02c", "#9467bd")
_BASE_COLORS = ("#1f77b4", "#ff7f0e", "#d62728", "#8c564b", "#e377c2",
                "#7f7f7f", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _axis_ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


class _Canvas:
    def __init__(self, width: int = _WIDTH, height: int = _HEIGHT):
        self.width = width
        self.height = height
        self.parts: List[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]

    def line(self, x1, y1, x2, y2, color="#333", width=1.0):
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
            f'y2="{_fmt(y2)}" stroke="{color}" stroke-width="{width}"/>')

    def polyline(self, points: Sequence[Tuple[float, float]], color: str):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>')

    def rect(self, x, y, w, h, color):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(h)}" fill="{color}"/>')

    def text(self, x, y, s, size=12, anchor="start", rotate=None):
        extra = ""
        if rotate is not None:
            extra = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"'
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}"{extra}>'
            f'{_esc(str(s))}</text>')

    def save(self, path: str):
        self.parts.append("</svg>")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(self.parts) + "\n")


def _value_transform(all_values: List[float]):
    """Log-scale the value axis when every value is strictly positive."""
    use_log = all(v > 0 for v in all_values)
    if use_log:
        return use_log, [math.log10(v) for v in all_values]
    return use_log, list(all_values)


def convergence_plot(series: Dict[str, Sequence[float]], path: str,
                     title: str = "best value vs iteration") -> None:
    """One polyline per labeled trace of best-so-far values."""
    if not series or any(len(v) == 0 for v in series.values()):
        raise ValueError("convergence_plot needs non-empty traces")
    flat = [float(v) for trace in series.values() for v in trace]
    use_log, _ = _value_transform(flat)
    tf = (lambda v: math.log10(v)) if use_log else (lambda v: v)
    ys = [tf(v) for v in flat]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    x_hi = max(len(v) for v in series.values()) - 1
    x_hi = max(x_hi, 1)

    c = _Canvas()
    x0, y0 = _MARGIN, _HEIGHT - _MARGIN
    x1, y1 = _WIDTH - _MARGIN, _MARGIN

    def px(i):
        return x0 + (x1 - x0) * i / x_hi

    def py(v):
        return y0 - (y0 - y1) * (tf(v) - y_lo) / (y_hi - y_lo)

    c.line(x0, y0, x1, y0)
    c.line(x0, y0, x0, y1)
    for t in _axis_ticks(0, x_hi):
        c.text(px(t), y0 + 16, f"{t:.0f}", anchor="middle")
    for t in _axis_ticks(y_lo, y_hi):
        label = f"1e{t:.1f}" if use_log else f"{t:.3g}"
        yy = y0 - (y0 - y1) * (t - y_lo) / (y_hi - y_lo)
        c.text(x0 - 6, yy + 4, label, anchor="end", size=10)
    c.text((x0 + x1) / 2, _HEIGHT - 16, "iteration", anchor="middle")
    c.text(18, (y0 + y1) / 2, "objective value" + (" (log)" if use_log else ""),
           anchor="middle", rotate=-90)
    c.text((x0 + x1) / 2, 28, title, anchor="middle", size=14)

    names = sorted(series)
    for i, name in enumerate(names):
        color = _SO_COLORS[0] if name == "so" else _BASE_COLORS[i % len(_BASE_COLORS)]
        trace = series[name]
        c.polyline([(px(j), py(float(v))) for j, v in enumerate(trace)], color)
        c.text(x1 - 4, y1 + 14 * (i + 1), name, anchor="end", size=11)
        c.rect(x1 - 60, y1 + 14 * i + 8, 10, 6, color)
    c.save(path)


def comparison_bars(rows, path: str, title: str = "final value and time") -> None:
    """Two-panel bar chart: mean final value (left) and mean time (right).

    ``rows`` is a sequence with attributes algo, mean_best, mean_elapsed_ms
    (or (algo, mean_best, mean_elapsed_ms) tuples). The proposal method's
    bars are visually distinguished from the baselines.
    """
    data = []
    for r in rows:
        if hasattr(r, "algo"):
            data.append((r.algo, float(r.mean_best), float(r.mean_elapsed_ms)))
        else:
            data.append((str(r[0]), float(r[1]), float(r[2])))
    if not data:
        raise ValueError("comparison_bars needs at least one row")

    c = _Canvas(width=2 * _WIDTH // 2 + 200, height=_HEIGHT)
    panels = (
        ("mean final value", [v for _, v, _ in data], _SO_COLORS[0], _BASE_COLORS[0]),
        ("mean elapsed ms", [t for _, _, t in data], _SO_COLORS[1], _BASE_COLORS[2]),
    )
    panel_w = (c.width - 3 * _MARGIN) / 2
    for pi, (label, vals, so_color, base_color) in enumerate(panels):
        px0 = _MARGIN + pi * (panel_w + _MARGIN)
        py0 = _HEIGHT - _MARGIN
        py1 = _MARGIN
        hi = max(max(vals), 1e-300)
        lo = min(min(vals), 0.0)
        span = hi - lo if hi > lo else 1.0
        c.line(px0, py0, px0 + panel_w, py0)
        c.line(px0, py0, px0, py1)
        c.text(px0 + panel_w / 2, 28, label, anchor="middle", size=13)
        slot = panel_w / len(data)
        for i, ((algo, _, _), v) in enumerate(zip(data, vals)):
            h = (py0 - py1) * (v - lo) / span
            color = so_color if algo == "so" else base_color
            c.rect(px0 + i * slot + 0.15 * slot, py0 - h, 0.7 * slot, h, color)
            c.text(px0 + (i + 0.5) * slot, py0 + 14, algo, anchor="middle",
                   size=10)
        for t in _axis_ticks(lo, hi, 4):
            yy = py0 - (py0 - py1) * (t - lo) / span
            c.text(px0 - 4, yy + 4, f"{t:.3g}", anchor="end", size=9)
    c.text(c.width / 2, _HEIGHT - 12, title, anchor="middle", size=12)
    c.save(path)
