"""Minimal deterministic SVG emitter for the three benchmark panels.

No plotting dependency: documents are built as strings on a fixed 800x600
canvas with 12pt labels, so identical inputs give identical bytes.  One
polyline per mu value; mu = inf is always drawn black and labelled
``mu=inf``.
"""

import math
from pathlib import Path

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 80
MARGIN_RIGHT = 170
MARGIN_TOP = 50
MARGIN_BOTTOM = 70
FONT = 'font-family="sans-serif" font-size="12"'

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#e377c2",
    "#17becf",
)


def _fmt(v):
    return f"{v:.2f}"


def _label(v):
    return f"{v:.4g}"


def mu_label(mu):
    return "mu=inf" if math.isinf(mu) else f"mu={_label(mu)}"


def mu_color(mu, finite_mus):
    if math.isinf(mu):
        return "#000000"
    return PALETTE[sorted(finite_mus).index(mu) % len(PALETTE)]


class Panel:
    """One axes rectangle with linear data-to-pixel mapping."""

    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.title = title
        self.xlim = self._pad(xlim)
        self.ylim = self._pad(ylim)
        self.x0 = MARGIN_LEFT
        self.x1 = WIDTH - MARGIN_RIGHT
        self.y0 = MARGIN_TOP
        self.y1 = HEIGHT - MARGIN_BOTTOM
        self.parts = [
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.x1 - self.x0}" '
            f'height="{self.y1 - self.y0}" fill="none" stroke="#000000"/>',
            f'<text x="{(self.x0 + self.x1) // 2}" y="{MARGIN_TOP - 20}" '
            f'{FONT} text-anchor="middle">{title}</text>',
            f'<text x="{(self.x0 + self.x1) // 2}" y="{HEIGHT - 20}" '
            f'{FONT} text-anchor="middle">{xlabel}</text>',
            f'<text x="20" y="{(self.y0 + self.y1) // 2}" {FONT} '
            f'text-anchor="middle" transform="rotate(-90 20 '
            f'{(self.y0 + self.y1) // 2})">{ylabel}</text>',
        ]
        self._ticks()
        self._legend_row = 0

    @staticmethod
    def _pad(lim):
        low, high = float(lim[0]), float(lim[1])
        if high <= low:
            low, high = low - 0.5, low + 0.5
        return low, high

    def px(self, x):
        frac = (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0])
        return self.x0 + frac * (self.x1 - self.x0)

    def py(self, y):
        frac = (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0])
        return self.y1 - frac * (self.y1 - self.y0)

    def _ticks(self, count=5):
        for k in range(count + 1):
            fx = self.xlim[0] + k * (self.xlim[1] - self.xlim[0]) / count
            px = self.px(fx)
            self.parts.append(
                f'<line x1="{_fmt(px)}" y1="{self.y1}" x2="{_fmt(px)}" '
                f'y2="{self.y1 + 5}" stroke="#000000"/>'
            )
            self.parts.append(
                f'<text x="{_fmt(px)}" y="{self.y1 + 18}" {FONT} '
                f'text-anchor="middle">{_label(fx)}</text>'
            )
            fy = self.ylim[0] + k * (self.ylim[1] - self.ylim[0]) / count
            py = self.py(fy)
            self.parts.append(
                f'<line x1="{self.x0 - 5}" y1="{_fmt(py)}" x2="{self.x0}" '
                f'y2="{_fmt(py)}" stroke="#000000"/>'
            )
            self.parts.append(
                f'<text x="{self.x0 - 8}" y="{_fmt(py + 4)}" {FONT} '
                f'text-anchor="end">{_label(fy)}</text>'
            )

    def polyline(self, xs, ys, color, marker=True, width=1.5):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>'
        )
        if marker:
            for x, y in zip(xs, ys):
                self.parts.append(
                    f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" '
                    f'r="3" fill="{color}"/>'
                )

    def points(self, xs, ys, color, radius=4):
        for x, y in zip(xs, ys):
            self.parts.append(
                f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" '
                f'r="{radius}" fill="{color}"/>'
            )

    def legend_entry(self, label, color, shape="line"):
        lx = self.x1 + 15
        ly = self.y0 + 15 + 20 * self._legend_row
        self._legend_row += 1
        if shape == "line":
            self.parts.append(
                f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
        else:
            self.parts.append(
                f'<circle cx="{lx + 11}" cy="{ly}" r="4" fill="{color}"/>'
            )
        self.parts.append(
            f'<text x="{lx + 28}" y="{ly + 4}" {FONT}>{label}</text>'
        )

    def document(self):
        body = "\n".join(self.parts)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{WIDTH}" height="{HEIGHT}">\n{body}\n</svg>\n'
        )


def _series_by_mu(aggregates):
    """{mu: list of cells sorted by lambda}, plus the sorted finite mus."""
    series = {}
    for a in aggregates:
        series.setdefault(a.mu, []).append(a)
    for cells in series.values():
        cells.sort(key=lambda a: a.lam)
    finite = sorted(m for m in series if not math.isinf(m))
    return series, finite


def plot_rank_vs_lambda(aggregates, path):
    """Mean numeric rank of X L_hat against lambda, one curve per mu."""
    series, finite = _series_by_mu(aggregates)
    xs_all = [math.log10(a.lam) for a in aggregates]
    ys_all = [a.mean_rank_xl for a in aggregates]
    panel = Panel(
        "Mean rank of X L_hat",
        "log10(lambda)",
        "mean rank",
        (min(xs_all), max(xs_all)),
        (0.0, max(ys_all)),
    )
    for mu in sorted(series, key=lambda m: (math.isinf(m), m)):
        cells = series[mu]
        color = mu_color(mu, finite)
        panel.polyline(
            [math.log10(a.lam) for a in cells],
            [a.mean_rank_xl for a in cells],
            color,
        )
        panel.legend_entry(mu_label(mu), color)
    Path(path).write_text(panel.document())


def plot_power_vs_fdr(aggregates, path):
    """Estimated power against estimated FDR, one curve per mu."""
    series, finite = _series_by_mu(aggregates)
    panel = Panel(
        "Power versus FDR", "mean FDR", "mean power", (0.0, 1.0), (0.0, 1.0)
    )
    for mu in sorted(series, key=lambda m: (math.isinf(m), m)):
        cells = series[mu]
        color = mu_color(mu, finite)
        panel.polyline(
            [a.mean_fdr for a in cells], [a.mean_power for a in cells], color
        )
        panel.legend_entry(mu_label(mu), color)
    Path(path).write_text(panel.document())


def plot_rank_matched(aggregates, h, path, rank_tol=0.5):
    """Rank-matched cells as red dots over the mu = inf power/FDR curve."""
    from .evaluate import select_rank_matched

    series, _ = _series_by_mu(aggregates)
    panel = Panel(
        f"Rank-matched cells (mean rank within {rank_tol} of {h})",
        "mean FDR",
        "mean power",
        (0.0, 1.0),
        (0.0, 1.0),
    )
    baseline = [m for m in series if math.isinf(m)]
    for mu in baseline:
        cells = series[mu]
        panel.polyline(
            [a.mean_fdr for a in cells],
            [a.mean_power for a in cells],
            "#000000",
        )
        panel.legend_entry(mu_label(mu), "#000000")
    matched = [
        a
        for a in select_rank_matched(aggregates, h, rank_tol)
        if not math.isinf(a.mu)
    ]
    panel.points(
        [a.mean_fdr for a in matched], [a.mean_power for a in matched], "#d62728"
    )
    panel.legend_entry("rank-matched", "#d62728", shape="dot")
    Path(path).write_text(panel.document())
