"""
SVG rendering of training curves and activity histograms.

The aggregate CSVs are the result contract; plots are a convenience rendered
from the same numbers through Jinja2 templates in ``edfvae/templates``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jinja2 import Environment, FileSystemLoader

TEMPLATE_DIR = Path(__file__).parent.parent / "templates"

WIDTH = 640
HEIGHT = 400
MARGIN = 56
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


@dataclass
class CurveSeries:
    """One line with an optional confidence band."""

    label: str
    x: list[float]
    mean: list[float]
    lower: list[float] | None = None
    upper: list[float] | None = None
    dashed: bool = False


@dataclass
class ReferenceLine:
    label: str
    value: float


@dataclass
class _Axis:
    lo: float
    hi: float
    pixel_lo: float
    pixel_hi: float
    ticks: list[float] = field(default_factory=list)

    def __call__(self, v: float) -> float:
        span = self.hi - self.lo or 1.0
        return self.pixel_lo + (v - self.lo) / span * (self.pixel_hi - self.pixel_lo)


def _env() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        autoescape=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / count))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= count:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [round(v, 10) for v in np.arange(start, hi + step * 1e-9, step)]


def _points(xs, ys, ax: _Axis, ay: _Axis) -> str:
    return " ".join(f"{ax(x):.2f},{ay(y):.2f}" for x, y in zip(xs, ys, strict=True))


def render_curves(
    series: list[CurveSeries],
    title: str,
    x_label: str = "batch",
    y_label: str = "ELBO",
    references: list[ReferenceLine] | None = None,
) -> str:
    """Line plot with shaded bands and horizontal reference lines, as SVG text."""
    references = references or []
    xs = [v for s in series for v in s.x] or [0.0, 1.0]
    ys = [v for s in series for v in (s.lower or s.mean) + (s.upper or s.mean)] + [r.value for r in references]
    ys = [v for v in ys if math.isfinite(v)] or [0.0, 1.0]
    y_lo, y_hi = min(ys), max(ys)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    ax = _Axis(min(xs), max(xs), MARGIN, WIDTH - MARGIN)
    ay = _Axis(y_lo - pad, y_hi + pad, HEIGHT - MARGIN, MARGIN)
    ax.ticks = _nice_ticks(ax.lo, ax.hi)
    ay.ticks = _nice_ticks(ay.lo, ay.hi)

    lines = []
    for i, s in enumerate(series):
        band = None
        if s.lower is not None and s.upper is not None:
            band = _points(s.x + s.x[::-1], s.lower + s.upper[::-1], ax, ay)
        lines.append(
            {
                "label": s.label,
                "color": PALETTE[i % len(PALETTE)],
                "points": _points(s.x, s.mean, ax, ay),
                "band": band,
                "dashed": s.dashed,
            }
        )
    refs = [{"label": r.label, "y": ay(r.value)} for r in references if math.isfinite(r.value)]

    return _env().get_template("curves.svg.jinja2").render(
        width=WIDTH,
        height=HEIGHT,
        margin=MARGIN,
        title=title,
        x_label=x_label,
        y_label=y_label,
        lines=lines,
        references=refs,
        x_ticks=[{"label": f"{t:g}", "pos": ax(t)} for t in ax.ticks],
        y_ticks=[{"label": f"{t:g}", "pos": ay(t)} for t in ay.ticks],
    )


def render_histogram(histograms: dict[str, list[int]], title: str) -> str:
    """Grouped bar chart of 10-bin activity histograms keyed by source name."""
    labels = [f"{0.1 * i:.1f}" for i in range(10)]
    top = max([max(h) for h in histograms.values()] + [1])
    ay = _Axis(0.0, float(top), HEIGHT - MARGIN, MARGIN)
    group = (WIDTH - 2 * MARGIN) / 10.0
    bar = group * 0.8 / max(len(histograms), 1)
    bars = []
    for k, (name, counts) in enumerate(histograms.items()):
        for i, c in enumerate(counts):
            x = MARGIN + i * group + 0.1 * group + k * bar
            bars.append(
                {
                    "x": x,
                    "y": ay(c),
                    "w": bar,
                    "h": ay(0.0) - ay(c),
                    "color": PALETTE[k % len(PALETTE)],
                    "label": f"{name}: {c}",
                }
            )
    return _env().get_template("histogram.svg.jinja2").render(
        width=WIDTH,
        height=HEIGHT,
        margin=MARGIN,
        title=title,
        bars=bars,
        legend=[{"name": n, "color": PALETTE[k % len(PALETTE)]} for k, n in enumerate(histograms)],
        x_ticks=[{"label": lab, "pos": MARGIN + (i + 0.5) * group} for i, lab in enumerate(labels)],
        y_ticks=[{"label": f"{t:g}", "pos": ay(t)} for t in _nice_ticks(0.0, float(top))],
    )
