"""Learning-curve charts as self-contained SVG text.

Two stacked panels share the epoch axis: mean training loss on top, mean
test accuracy below.  Each series gets a polyline, a translucent +-1 std
band and one circle per epoch.  Output depends only on the input rows, so
identical CSVs give byte-identical SVGs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

SUMMARY_HEADER = ["variant", "task", "epoch", "loss_mean", "loss_std", "acc_mean", "acc_std"]
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

WIDTH = 760
PANEL_HEIGHT = 250
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 200, 40, 50
PANEL_GAP = 60


class SummaryFormatError(ValueError):
    def __init__(self, message: str, row: int | None = None, source: str | None = None):
        prefix = source or "summary"
        if row is not None:
            prefix += f" row {row}"
        super().__init__(f"{prefix}: {message}")
        self.row = row


@dataclass
class Series:
    label: str
    epochs: list[int] = field(default_factory=list)
    loss_mean: list[float] = field(default_factory=list)
    loss_std: list[float] = field(default_factory=list)
    acc_mean: list[float] = field(default_factory=list)
    acc_std: list[float] = field(default_factory=list)


def _float(raw: str, name: str, row: int, source) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise SummaryFormatError(f"{name} {raw!r} is not a number", row, source) from None
    if not math.isfinite(value):
        raise SummaryFormatError(f"{name} is not finite", row, source)
    return value


def read_summary(path) -> list[tuple[str, str, int, float, float, float, float]]:
    """Rows of a summary CSV; errors name the 1-based file row."""
    path = Path(path)
    source = str(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SUMMARY_HEADER:
            raise SummaryFormatError(f"expected header {','.join(SUMMARY_HEADER)}", 1, source)
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(SUMMARY_HEADER):
                raise SummaryFormatError(f"expected {len(SUMMARY_HEADER)} fields, got {len(rec)}", lineno, source)
            try:
                epoch = int(rec[2])
            except ValueError:
                raise SummaryFormatError(f"epoch {rec[2]!r} is not an integer", lineno, source) from None
            if epoch < 1:
                raise SummaryFormatError("epoch must be >= 1", lineno, source)
            nums = [_float(v, n, lineno, source) for v, n in zip(rec[3:], SUMMARY_HEADER[3:])]
            if nums[1] < 0 or nums[3] < 0:
                raise SummaryFormatError("standard deviations must be non-negative", lineno, source)
            rows.append((rec[0], rec[1], epoch, *nums))
    if not rows:
        raise SummaryFormatError("no data rows", None, source)
    return rows


def collect_series(rows) -> list[Series]:
    """Group rows by (task, variant) in first-seen order, sorted by epoch."""
    tasks = []
    for row in rows:
        if row[1] not in tasks:
            tasks.append(row[1])
    groups: dict[tuple[str, str], list] = {}
    for row in rows:
        groups.setdefault((row[1], row[0]), []).append(row)
    out = []
    for (task, variant), members in groups.items():
        label = variant if len(tasks) == 1 else f"{variant} ({task})"
        series = Series(label)
        for r in sorted(members, key=lambda r: r[2]):
            series.epochs.append(r[2])
            series.loss_mean.append(r[3])
            series.loss_std.append(r[4])
            series.acc_mean.append(r[5])
            series.acc_std.append(r[6])
        out.append(series)
    return out


def _nice_step(span: float, target: int = 5) -> float:
    if span <= 0:
        return 1.0
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            return mult * mag
    return 10 * mag


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, width: int, height: int):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">\n',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n',
        ]

    def add(self, text: str) -> None:
        self.parts.append(text)

    def text(self, x, y, s, extra="") -> None:
        attrs = f" {extra}" if extra else ""
        self.add(f'<text x="{_fmt(x)}" y="{_fmt(y)}"{attrs}>{escape(s)}</text>\n')

    def line(self, x1, y1, x2, y2, extra="") -> None:
        self.add(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" {extra}/>\n')

    def render(self) -> str:
        return "".join(self.parts) + "</svg>\n"


def _panel(canvas: _Canvas, series: list[Series], top: float, title: str, key: str, x_range) -> None:
    means = [getattr(s, f"{key}_mean") for s in series]
    stds = [getattr(s, f"{key}_std") for s in series]
    lo = min(m - d for ms, ds in zip(means, stds) for m, d in zip(ms, ds))
    hi = max(m + d for ms, ds in zip(means, stds) for m, d in zip(ms, ds))
    if key == "acc":
        lo, hi = min(lo, 0.0), max(hi, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    step = _nice_step(hi - lo)
    lo = math.floor(lo / step) * step
    hi = math.ceil(hi / step) * step

    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = top + PANEL_HEIGHT, top
    e_lo, e_hi = x_range
    e_span = max(e_hi - e_lo, 1)

    def sx(epoch):
        if e_hi == e_lo:
            return (x0 + x1) / 2
        return x0 + (epoch - e_lo) / e_span * (x1 - x0)

    def sy(v):
        return y0 - (v - lo) / (hi - lo) * (y0 - y1)

    canvas.add(f'<g class="panel" id="panel-{key}">\n')
    canvas.text((x0 + x1) / 2, top - 12, title, 'text-anchor="middle" font-size="14"')
    canvas.add(
        f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(x1 - x0)}" height="{_fmt(y0 - y1)}" '
        'fill="none" stroke="#444"/>\n'
    )
    n_y = int(round((hi - lo) / step))
    for i in range(n_y + 1):
        v = lo + i * step
        y = sy(v)
        canvas.line(x0, y, x1, y, 'stroke="#ddd"')
        canvas.text(x0 - 6, y + 4, _tick_label(round(v, 10)), 'text-anchor="end"')
    label_step = max(1, int(_nice_step(e_span, 8)))
    for epoch in range(e_lo, e_hi + 1):
        x = sx(epoch)
        canvas.line(x, y0, x, y0 + 4, 'class="xtick" stroke="#444"')
        if (epoch - e_lo) % label_step == 0 or epoch in (e_lo, e_hi):
            canvas.text(x, y0 + 18, str(epoch), 'text-anchor="middle"')
    canvas.text((x0 + x1) / 2, y0 + 38, "epoch", 'text-anchor="middle"')

    for idx, s in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        mean = getattr(s, f"{key}_mean")
        std = getattr(s, f"{key}_std")
        upper = [(sx(e), sy(m + d)) for e, m, d in zip(s.epochs, mean, std)]
        lower = [(sx(e), sy(m - d)) for e, m, d in zip(s.epochs, mean, std)]
        band = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in upper + lower[::-1])
        canvas.add(f'<polygon class="band" points="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>\n')
        pts = " ".join(f"{_fmt(sx(e))},{_fmt(sy(m))}" for e, m in zip(s.epochs, mean))
        canvas.add(f'<polyline class="series" points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>\n')
        for e, m in zip(s.epochs, mean):
            canvas.add(f'<circle class="point" cx="{_fmt(sx(e))}" cy="{_fmt(sy(m))}" r="2.5" fill="{color}"/>\n')
    canvas.add("</g>\n")


def render_svg(series: list[Series], title: str | None = None) -> str:
    if not series:
        raise ValueError("nothing to plot")
    height = MARGIN_TOP + 2 * PANEL_HEIGHT + PANEL_GAP + MARGIN_BOTTOM + 20
    canvas = _Canvas(WIDTH, height)
    if title:
        canvas.text(WIDTH / 2, 18, title, 'text-anchor="middle" font-size="15"')
    e_lo = min(min(s.epochs) for s in series)
    e_hi = max(max(s.epochs) for s in series)
    top = MARGIN_TOP
    _panel(canvas, series, top, "Mean training loss (+-1 std)", "loss", (e_lo, e_hi))
    _panel(canvas, series, top + PANEL_HEIGHT + PANEL_GAP, "Mean test accuracy (+-1 std)", "acc", (e_lo, e_hi))

    lx = WIDTH - MARGIN_RIGHT + 16
    canvas.add('<g class="legend">\n')
    for idx, s in enumerate(series):
        y = MARGIN_TOP + 10 + 20 * idx
        color = PALETTE[idx % len(PALETTE)]
        canvas.add('<g class="legend-entry">')
        canvas.add(f'<rect x="{lx}" y="{y - 9}" width="14" height="10" fill="{color}"/>')
        canvas.add(f'<text x="{lx + 20}" y="{y}">{escape(s.label)}</text>')
        canvas.add("</g>\n")
    canvas.add("</g>\n")
    return canvas.render()


def plot_summaries(paths, out_path) -> Path:
    """Read one or more summary CSVs and write the two-panel chart."""
    paths = [paths] if isinstance(paths, (str, Path)) else list(paths)
    rows = []
    for p in paths:
        rows.extend(read_summary(p))
    tasks = sorted({r[1] for r in rows})
    svg = render_svg(collect_series(rows), title=", ".join(tasks))
    out = Path(out_path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    return out
