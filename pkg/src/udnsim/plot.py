"""Mean sum rate versus SBS density as a standalone SVG, one series per scheme."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from .engine import SweepResult
from .schemes import Scheme

__all__ = ["render_plot", "svg_document"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 720, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 90, 170, 30, 60


def _label(name: str) -> str:
    try:
        return Scheme(name).label
    except ValueError:
        return name


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / n
    return [lo + i * step for i in range(n + 1)]


def svg_document(result: SweepResult) -> str:
    rows = list(result.rows)
    if not rows:
        raise ValueError("nothing to plot: the result has no rows")
    schemes = list(dict.fromkeys(r.scheme for r in rows))
    xs = sorted({r.density for r in rows})
    x_lo, x_hi = xs[0], xs[-1]
    y_hi = max(max(r.ci95_high, r.mean) for r in rows) * 1.05 or 1.0
    y_lo = 0.0

    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(x):
        if x_hi == x_lo:
            return _LEFT + pw / 2
        return _LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return _TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<g class="axes" stroke="black" fill="none">'
        f'<line x1="{_LEFT}" y1="{_TOP + ph}" x2="{_LEFT + pw}" y2="{_TOP + ph}"/>'
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_TOP + ph}"/></g>',
    ]
    for t in (xs if len(xs) <= 10 else _ticks(x_lo, x_hi)):
        out.append(f'<text class="tick" x="{px(t):.2f}" y="{_TOP + ph + 16}" '
                   f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(y_lo, y_hi):
        out.append(f'<text class="tick" x="{_LEFT - 6}" y="{py(t) + 4:.2f}" '
                   f'text-anchor="end">{t:.3g}</text>')
    out.append(f'<text class="xlabel" x="{_LEFT + pw / 2}" y="{_H - 15}" '
               f'text-anchor="middle">SBS density (per km²)</text>')
    out.append(f'<text class="ylabel" transform="translate(20 {_TOP + ph / 2}) rotate(-90)" '
               f'text-anchor="middle">Mean sum rate (bits/s)</text>')

    for si, name in enumerate(schemes):
        color = _COLORS[si % len(_COLORS)]
        series = sorted((r for r in rows if r.scheme == name), key=lambda r: r.density)
        out.append(f'<g class="series" data-scheme="{escape(name)}">')
        if len(series) > 1:
            pts = " ".join(f"{px(r.density):.2f},{py(r.mean):.2f}" for r in series)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for r in series:
            x = px(r.density)
            out.append(f'<line class="ci" x1="{x:.2f}" y1="{py(r.ci95_low):.2f}" '
                       f'x2="{x:.2f}" y2="{py(r.ci95_high):.2f}" stroke="{color}"/>')
            out.append(f'<circle class="marker" cx="{x:.2f}" cy="{py(r.mean):.2f}" r="3.5" '
                       f'fill="{color}"/>')
        out.append("</g>")
        ly = _TOP + 10 + 22 * si
        lx = _LEFT + pw + 20
        out.append(f'<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{lx + 24}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
                   f'<text x="{lx + 30}" y="{ly + 4}">{escape(_label(name))}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_plot(result: SweepResult, path) -> Path:
    path = Path(path)
    path.write_text(svg_document(result), encoding="utf-8")
    return path
