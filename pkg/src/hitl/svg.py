"""Static SVG figures drawn directly: axes, polylines and banded contour maps."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

W, H = 560, 400
PAD_L, PAD_R, PAD_T, PAD_B = 64, 20, 36, 48
BANDS = (0.0, 0.5, 0.7, 0.8, 0.9, 0.95, 1.0)
BAND_FILL = ("#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6", "#3182bd")


def _num(x):
    return f"{x:.2f}".rstrip("0").rstrip(".") if abs(x) < 1e4 else f"{x:.3g}"


class _Axes:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1

    def px(self, x):
        return PAD_L + (x - self.x0) / (self.x1 - self.x0) * (W - PAD_L - PAD_R)

    def py(self, y):
        return H - PAD_B - (y - self.y0) / (self.y1 - self.y0) * (H - PAD_T - PAD_B)

    def frame(self, xlabel, ylabel, title, n_ticks=5):
        out = [f'<rect x="{PAD_L}" y="{PAD_T}" width="{W - PAD_L - PAD_R}" height="{H - PAD_T - PAD_B}" '
               'fill="none" stroke="#333"/>']
        for t in np.linspace(self.x0, self.x1, n_ticks):
            x = self.px(t)
            out.append(f'<line x1="{x:.1f}" y1="{H - PAD_B}" x2="{x:.1f}" y2="{H - PAD_B + 5}" stroke="#333"/>')
            out.append(f'<text x="{x:.1f}" y="{H - PAD_B + 18}" text-anchor="middle">{_num(t)}</text>')
        for t in np.linspace(self.y0, self.y1, n_ticks):
            y = self.py(t)
            out.append(f'<line x1="{PAD_L - 5}" y1="{y:.1f}" x2="{PAD_L}" y2="{y:.1f}" stroke="#333"/>')
            out.append(f'<text x="{PAD_L - 8}" y="{y + 4:.1f}" text-anchor="end">{_num(t)}</text>')
        out.append(f'<text x="{(PAD_L + W - PAD_R) / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="16" y="{(PAD_T + H - PAD_B) / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {(PAD_T + H - PAD_B) / 2})">{escape(ylabel)}</text>')
        out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
        return out

    def polyline(self, xs, ys, color, width=1.2):
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def _document(body, desc):
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="11">',
        f"<desc>{escape(desc)}</desc>",
        '<rect width="100%" height="100%" fill="white"/>',
        *body,
        "</svg>",
        "",
    ])


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def gain_trajectory(path, surface, gains, center, radius, desc=""):
    """Gain path over the reward surface, shaded in reward bands."""
    ge, gi = surface.grid.gamma_i, surface.grid.gamma_e  # x: gamma_I, y: gamma_E
    ax = _Axes((ge[0], ge[-1]), (gi[0], gi[-1]))
    body = []
    hx = (ge[1] - ge[0]) / 2
    hy = (gi[1] - gi[0]) / 2
    band = np.clip(np.searchsorted(BANDS, surface.values, side="right") - 1, 0, len(BAND_FILL) - 1)
    for ie in range(len(gi)):
        for ii in range(len(ge)):
            x0, x1 = ax.px(max(ge[ii] - hx, ge[0])), ax.px(min(ge[ii] + hx, ge[-1]))
            y0, y1 = ax.py(min(gi[ie] + hy, gi[-1])), ax.py(max(gi[ie] - hy, gi[0]))
            body.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" height="{y1 - y0:.2f}" '
                        f'fill="{BAND_FILL[band[ie, ii]]}" stroke="none"/>')
    gains = np.asarray(gains, float).reshape(-1, 2)
    if len(gains):
        body.append(ax.polyline(gains[:, 1], gains[:, 0], "#d62728", 0.8))
    cx, cy = ax.px(center.gamma_i), ax.py(center.gamma_e)
    body.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="black"/>')
    rx = 2 * radius / (ge[-1] - ge[0]) * (W - PAD_L - PAD_R)
    ry = 2 * radius / (gi[-1] - gi[0]) * (H - PAD_T - PAD_B)
    body.append(f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{rx:.2f}" ry="{ry:.2f}" fill="none" '
                'stroke="black" stroke-dasharray="4 3"/>')
    body += ax.frame("gamma_I", "gamma_E", "Gain trajectory over normalized reward rate")
    _write(path, _document(body, desc))


def series(path, values, ylabel, title, desc="", ylim=(0.0, 1.0), color="#1f77b4", reference=None):
    """A per-task series as a polyline; ``reference`` adds a dashed horizontal line."""
    values = np.asarray(values, float)
    n = max(len(values), 2)
    ax = _Axes((1, n), ylim)
    body = []
    if reference is not None:
        y = ax.py(reference)
        body.append(f'<line x1="{PAD_L}" y1="{y:.2f}" x2="{W - PAD_R}" y2="{y:.2f}" stroke="#888" '
                    'stroke-dasharray="5 4"/>')
    if len(values):
        body.append(ax.polyline(np.arange(1, len(values) + 1), values, color))
    body += ax.frame("task", ylabel, title)
    _write(path, _document(body, desc))
