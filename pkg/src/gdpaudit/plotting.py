"""Minimal in-tree SVG charts (polylines, markers, bars, axes)."""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ("#000000", "#c0392b", "#c0392b", "#2471a3", "#7d3c98", "#1e8449")
DASHES = ("", "", "6,4", "2,3", "8,3,2,3", "4,2")

W, H = 480, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {H / 2})">{escape(ylabel)}</text>',
    ]


def _axes(out, x0, x1, y0, y1, xticks, yticks, xlabels=None):
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    sx = lambda v: LEFT + (v - x0) / (x1 - x0) * pw  # noqa: E731
    sy = lambda v: TOP + ph - (v - y0) / (y1 - y0) * ph  # noqa: E731
    out.append(f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
    for t in yticks:
        out.append(f'<line x1="{LEFT - 4}" y1="{_fmt(sy(t))}" x2="{LEFT}" y2="{_fmt(sy(t))}" stroke="#444"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{t:g}</text>')
    for i, t in enumerate(xticks):
        lab = xlabels[i] if xlabels else f"{t:g}"
        out.append(f'<line x1="{_fmt(sx(t))}" y1="{TOP + ph}" x2="{_fmt(sx(t))}" y2="{TOP + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(sx(t))}" y="{TOP + ph + 16}" text-anchor="middle">{escape(lab)}</text>')
    return sx, sy


def tradeoff_svg(path, series, points=(), title="FPR-FNR tradeoff"):
    """``series``: (label, xs, ys) curves on the unit square; ``points``: (label, x, y) markers."""
    out = _frame(title, "FPR", "FNR")
    ticks = [0, 0.2, 0.4, 0.6, 0.8, 1.0]
    sx, sy = _axes(out, 0, 1, 0, 1, ticks, ticks)
    for i, (label, xs, ys) in enumerate(series):
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        dash = DASHES[i % len(DASHES)]
        style = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[i % len(PALETTE)]}" '
                   f'stroke-width="1.5"{style}/>')
        ly = TOP + 16 + 14 * i
        out.append(f'<line x1="{W - 190}" y1="{ly}" x2="{W - 165}" y2="{ly}" '
                   f'stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.5"{style}/>')
        out.append(f'<text x="{W - 160}" y="{ly + 4}">{escape(label)}</text>')
    for label, x, y in points:
        out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3.5" fill="#1e8449"/>')
        out.append(f'<text x="{_fmt(sx(x) + 6)}" y="{_fmt(sy(y) - 6)}">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def bar_svg(path, labels, values, reference=None, title="Empirical mu", ylabel="mu_emp"):
    out = _frame(title, "", ylabel)
    top = max([*values, reference or 0.0, 0.1]) * 1.15
    step = 0.1 if top <= 1 else 0.5
    yticks = [round(i * step, 2) for i in range(int(top / step) + 1)]
    n = len(values)
    xt = list(range(n))
    sx, sy = _axes(out, -0.6, n - 0.4, 0, top, xt, yticks, xlabels=[""] * n)
    bw = (W - LEFT - RIGHT) / (n + 0.2) * 0.6
    for i, (lab, v) in enumerate(zip(labels, values)):
        x = sx(i)
        out.append(f'<rect x="{_fmt(x - bw / 2)}" y="{_fmt(sy(v))}" width="{_fmt(bw)}" '
                   f'height="{_fmt(sy(0) - sy(v))}" fill="#5d6d7e"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(sy(v) - 4)}" text-anchor="middle">{v:.3f}</text>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(sy(0) + 14)}" text-anchor="end" font-size="9" '
                   f'transform="rotate(-30 {_fmt(x)} {_fmt(sy(0) + 14)})">{escape(lab)}</text>')
    if reference is not None:
        out.append(f'<line x1="{LEFT}" y1="{_fmt(sy(reference))}" x2="{W - RIGHT}" '
                   f'y2="{_fmt(sy(reference))}" stroke="#c0392b" stroke-width="1.5"/>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
