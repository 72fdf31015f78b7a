"""Validity-evolution line chart as a standalone SVG 1.1 document.

Coordinates are affine in both axes.  With ``n`` points and the plot area
spanning ``[left, left + plot_width]`` horizontally::

    x(i) = left + i * plot_width / (n - 1)      (n > 1)
    x(0) = left + plot_width / 2                (n == 1)

and vertically, with integer bounds ``lo = min score - 1`` and
``hi = max score + 1`` mapped to the bottom and top of the plot area::

    y(s) = bottom - (s - lo) * plot_height / (hi - lo)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from caesar_kit.analysis import EvolutionSeries
from caesar_kit.model import VALIDITIES, Validity

MIN_SIZE = 200

# Colour plus dash pattern, so lines stay distinguishable without colour.
STYLES: dict[Validity, tuple[str, str | None]] = {
    Validity.CONCLUSION: ("#1f77b4", None),
    Validity.INTERNAL: ("#d62728", "8 4"),
    Validity.CONSTRUCT: ("#2ca02c", "2 3"),
    Validity.EXTERNAL: ("#9467bd", "8 3 2 3"),
}


class EmptySeriesError(ValueError):
    pass


@dataclass(frozen=True)
class Layout:
    width: int
    height: int
    left: float
    right: float
    top: float
    bottom: float
    lo: int
    hi: int
    n: int

    @property
    def plot_width(self) -> float:
        return self.right - self.left

    @property
    def plot_height(self) -> float:
        return self.bottom - self.top

    def x(self, i: int) -> float:
        if self.n == 1:
            return self.left + self.plot_width / 2
        return self.left + i * (self.plot_width / (self.n - 1))

    def y(self, score: float) -> float:
        return self.bottom - (score - self.lo) * self.plot_height / (self.hi - self.lo)


def layout(series: EvolutionSeries, width_px: int, height_px: int) -> Layout:
    scores = [p.scores[v] for p in series.points for v in VALIDITIES]
    legend_width = min(170, width_px * 0.3)
    return Layout(
        width=width_px,
        height=height_px,
        left=56.0,
        right=width_px - legend_width - 16.0,
        top=40.0,
        bottom=height_px - 56.0,
        lo=min(scores) - 1,
        hi=max(scores) + 1,
        n=len(series.points),
    )


def y_ticks(lo: int, hi: int) -> list[int]:
    span = hi - lo
    step = 1 if span <= 12 else math.ceil(span / 10)
    ticks = list(range(lo, hi + 1, step))
    if ticks[-1] != hi:
        ticks.append(hi)
    return ticks


def _f(v: float) -> str:
    return f"{v:.2f}"


def evolution_svg(series: EvolutionSeries, width_px: int = 800, height_px: int = 480) -> str:
    if not series.points:
        raise EmptySeriesError("cannot chart an empty evolution series")
    if width_px < MIN_SIZE or height_px < MIN_SIZE:
        raise ValueError(f"chart must be at least {MIN_SIZE}x{MIN_SIZE} pixels")
    lay = layout(series, width_px, height_px)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width_px}" height="{height_px}" '
        f'viewBox="0 0 {width_px} {height_px}" font-family="sans-serif" font-size="12">',
        f"<title>Validity evolution of {escape(series.family_acronym)}</title>",
        f'<rect x="0" y="0" width="{width_px}" height="{height_px}" fill="#ffffff"/>',
        f'<text x="{_f(width_px / 2)}" y="24" text-anchor="middle" font-size="15">'
        f"Validity evolution: {escape(series.family_acronym)}</text>",
    ]

    out.append('<g class="y-axis">')
    for t in y_ticks(lay.lo, lay.hi):
        y = _f(lay.y(t))
        stroke = "#888888" if t == 0 else "#e0e0e0"
        out.append(f'<line x1="{_f(lay.left)}" y1="{y}" x2="{_f(lay.right)}" y2="{y}" stroke="{stroke}"/>')
        out.append(f'<text class="y-tick" x="{_f(lay.left - 8)}" y="{y}" text-anchor="end" dy="4">{t}</text>')
    out.append("</g>")

    out.append('<g class="x-axis">')
    out.append(
        f'<line x1="{_f(lay.left)}" y1="{_f(lay.bottom)}" x2="{_f(lay.right)}" y2="{_f(lay.bottom)}" stroke="#000000"/>'
    )
    for i, p in enumerate(series.points):
        x = _f(lay.x(i))
        out.append(f'<line x1="{x}" y1="{_f(lay.bottom)}" x2="{x}" y2="{_f(lay.bottom + 5)}" stroke="#000000"/>')
        out.append(
            f'<text class="x-tick" x="{x}" y="{_f(lay.bottom + 20)}" text-anchor="middle">{escape(p.acronym)}</text>'
        )
    out.append("</g>")

    for v in VALIDITIES:
        colour, dash = STYLES[v]
        coords = " ".join(f"{_f(lay.x(i))},{_f(lay.y(p.scores[v]))}" for i, p in enumerate(series.points))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<g class="series" data-validity={quoteattr(v.value)}>')
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="2"{dash_attr}/>'
        )
        for i, p in enumerate(series.points):
            out.append(
                f'<circle cx="{_f(lay.x(i))}" cy="{_f(lay.y(p.scores[v]))}" r="3.5" fill="{colour}"/>'
            )
        out.append("</g>")

    out.append('<g class="legend">')
    lx = lay.right + 20
    for k, v in enumerate(VALIDITIES):
        colour, dash = STYLES[v]
        ly = lay.top + 10 + 22 * k
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<line x1="{_f(lx)}" y1="{_f(ly)}" x2="{_f(lx + 28)}" y2="{_f(ly)}" stroke="{colour}" stroke-width="2"{dash_attr}/>'
        )
        out.append(f'<circle cx="{_f(lx + 14)}" cy="{_f(ly)}" r="3.5" fill="{colour}"/>')
        out.append(f'<text x="{_f(lx + 36)}" y="{_f(ly)}" dy="4">{v.value.capitalize()} validity</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
