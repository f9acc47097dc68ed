"""Small deterministic SVG charts for an ``AggregateReport``.

Box plots use quartiles with whiskers at the extremes.  Coordinates are written
with two decimals so the same report always renders to identical bytes.
"""

from __future__ import annotations

import math
import warnings
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from uamfleet.harness.report import AggregateReport

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=64, right=150, top=40, bottom=56)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        lo, hi = lo - 1, hi + 1
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.floor(lo / step) * step
    ticks, x = [], first
    while x <= hi + step * 1e-9:
        ticks.append(round(x, 10))
        x += step
    if ticks[-1] < hi:
        ticks.append(round(x, 10))
    return ticks


def _n(x: float) -> str:
    return f"{x:.2f}"


class Chart:
    def __init__(self, title: str, xlabel: str, ylabel: str, ymin: float, ymax: float):
        self.parts: list[str] = []
        self.ticks = nice_ticks(ymin, ymax)
        self.ylo, self.yhi = self.ticks[0], self.ticks[-1]
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
        self.text(WIDTH / 2 - MARGIN["right"] / 2, 24, title, size=15, anchor="middle")
        self.text((self.x0 + self.x1) / 2, HEIGHT - 14, xlabel, anchor="middle")
        self.parts.append(f'<text x="16" y="{_n((self.y0 + self.y1) / 2)}" font-size="12" text-anchor="middle" '
                          f'transform="rotate(-90 16 {_n((self.y0 + self.y1) / 2)})">{escape(ylabel)}</text>')
        for t in self.ticks:
            y = self.y(t)
            self.line(self.x0, y, self.x1, y, "#dddddd")
            self.text(self.x0 - 6, y + 4, f"{t:g}", anchor="end")
        self.line(self.x0, self.y0, self.x1, self.y0, "#000000")
        self.line(self.x0, self.y0, self.x0, self.y1, "#000000")

    def y(self, v: float) -> float:
        return self.y0 - (v - self.ylo) / (self.yhi - self.ylo) * (self.y0 - self.y1)

    def line(self, xa, ya, xb, yb, color, width=1.0, dash: str | None = None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<line x1="{_n(xa)}" y1="{_n(ya)}" x2="{_n(xb)}" y2="{_n(yb)}" stroke="{color}" '
                          f'stroke-width="{width:g}"{extra}/>')

    def text(self, x, y, s: str, size: int = 12, anchor: str = "start"):
        self.parts.append(f'<text x="{_n(x)}" y="{_n(y)}" font-size="{size}" text-anchor="{anchor}">'
                          f'{escape(s)}</text>')

    def polyline(self, points, color, dash: str | None = None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in points)
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{extra}/>')
        for x, y in points:
            self.parts.append(f'<circle cx="{_n(x)}" cy="{_n(y)}" r="3" fill="{color}"/>')

    def box(self, xc: float, values, color: str, half: float = 14.0):
        lo, q1, med, q3, hi = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
        self.line(xc, self.y(lo), xc, self.y(q1), color)
        self.line(xc, self.y(q3), xc, self.y(hi), color)
        self.line(xc - half / 2, self.y(lo), xc + half / 2, self.y(lo), color)
        self.line(xc - half / 2, self.y(hi), xc + half / 2, self.y(hi), color)
        top, bottom = self.y(q3), self.y(q1)
        self.parts.append(f'<rect x="{_n(xc - half)}" y="{_n(top)}" width="{_n(2 * half)}" '
                          f'height="{_n(bottom - top)}" fill="{color}" fill-opacity="0.25" stroke="{color}"/>')
        self.line(xc - half, self.y(med), xc + half, self.y(med), color, 2)

    def legend(self, entries):
        x = self.x1 + 12
        for k, (label, color, dash) in enumerate(entries):
            y = self.y1 + 12 + 18 * k
            self.line(x, y, x + 22, y, color, 2, dash)
            self.text(x + 28, y + 4, label, size=11)

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
                f'viewBox="0 0 {WIDTH} {HEIGHT}">')
        body = "\n".join(self.parts)
        return f'{head}\n<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n{body}\n</svg>\n'


def box_plot(title: str, xlabel: str, ylabel: str, groups: list[tuple[str, list[float]]]) -> str | None:
    groups = [(label, vals) for label, vals in groups if len(vals)]
    if not groups:
        return None
    everything = [v for _, vals in groups for v in vals]
    chart = Chart(title, xlabel, ylabel, min(everything), max(everything))
    slot = (chart.x1 - chart.x0) / len(groups)
    for k, (label, vals) in enumerate(groups):
        xc = chart.x0 + slot * (k + 0.5)
        chart.box(xc, vals, PALETTE[k % len(PALETTE)], half=min(14.0, slot / 3))
        chart.text(xc, chart.y0 + 16, label, size=10, anchor="middle")
    return chart.render()


def line_plot(title: str, xlabel: str, ylabel: str, series: list[tuple[str, str, str | None, list]]) -> str | None:
    """``series`` entries are (label, color, dash, [(x, y), ...])."""
    series = [s for s in series if s[3]]
    if not series:
        return None
    xs = sorted({x for *_, pts in series for x, _ in pts})
    ys = [y for *_, pts in series for _, y in pts]
    chart = Chart(title, xlabel, ylabel, min(0.0, min(ys)), max(ys))
    span = max(xs[-1] - xs[0], 1)
    pad = 24

    def px(x):
        if len(xs) == 1:
            return (chart.x0 + chart.x1) / 2
        return chart.x0 + pad + (x - xs[0]) / span * (chart.x1 - chart.x0 - 2 * pad)

    for x in xs:
        chart.text(px(x), chart.y0 + 16, f"{x:g}", size=10, anchor="middle")
    for label, color, dash, pts in series:
        chart.polyline([(px(x), chart.y(y)) for x, y in sorted(pts)], color, dash)
    chart.legend([(label, color, dash) for label, color, dash, _ in series])
    return chart.render()


def _mean_curve(rows, f_attr: str):
    by_f: dict[int, list[float]] = {}
    for r in rows:
        for f, p in r.sweep.items():
            v = getattr(p, f_attr)
            if v is not None:
                by_f.setdefault(f, []).append(v)
    return [(f, float(np.mean(v))) for f, v in sorted(by_f.items())]


def emit_plots(report: AggregateReport, out_dir: str | Path) -> list[Path]:
    """Write the four chart kinds; charts without data are skipped with a warning."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def save(name: str, svg: str | None, what: str):
        if svg is None:
            warnings.warn(f"no data for {what}; {name} not written", stacklevel=3)
            return
        path = out_dir / name
        path.write_text(svg)
        written.append(path)

    live = []
    for scen in report.scenarios:
        if report.rows_for(scen):
            live.append(scen)
        else:
            warnings.warn(f"scenario {scen.label} has no profiles; left out of the plots", stacklevel=2)

    save("passengers.svg", box_plot("Daily realized passengers", "scenario", "passengers",
                                    [(s.label, [r.realized_passengers for r in report.rows_for(s)]) for s in live]),
         "realized passengers")
    save("fleet_size.svg", box_plot("Zero-spill fleet size", "scenario", "aircraft",
                                    [(s.label, [r.zero_spill_fleet_size for r in report.rows_for(s)
                                                if r.zero_spill_fleet_size is not None]) for s in live]),
         "zero-spill fleet sizes")

    lines = []
    for k, s in enumerate(live):
        color = PALETTE[k % len(PALETTE)]
        rows = report.rows_for(s)
        lines.append((f"{s.label} optimal", color, None, _mean_curve(rows, "spill")))
        lines.append((f"{s.label} upper", color, "6 3", _mean_curve(rows, "upper")))
        lines.append((f"{s.label} lower", color, "2 3", _mean_curve(rows, "lower")))
    save("spill.svg", line_plot("Average daily spill", "fleet size", "passengers", lines), "spill curves")

    for s in live:
        rows = report.rows_for(s)
        sizes = sorted({f for r in rows for f in r.sweep})
        groups = [(f"F={f}", [r.sweep[f].spill for r in rows if f in r.sweep and r.sweep[f].spill is not None])
                  for f in sizes]
        save(f"spill_spread_{s.label}.svg", box_plot(f"Spill spread, {s.label}", "fleet size", "passengers", groups),
             f"spill spread of {s.label}")
    return written
