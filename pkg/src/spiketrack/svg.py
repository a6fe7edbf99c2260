"""Minimal static SVG plotting: axes, polylines, markers, circles.

Output contains no timestamps or other run-dependent metadata, so identical
data produces identical bytes.
"""

from __future__ import annotations

import math

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class SvgPlot:
    def __init__(
        self,
        width: int = 640,
        height: int = 420,
        margin: int = 56,
        title: str = "",
        x_label: str = "",
        y_label: str = "",
    ):
        self.width = width
        self.height = height
        self.margin = margin
        self.title = title
        self.x_label = x_label
        self.y_label = y_label
        self._series: list[tuple[str, list[float], list[float], str, bool]] = []
        self._circles: list[tuple[float, float, float, str, bool]] = []

    def add_line(self, xs, ys, label: str = "", dashed: bool = False) -> None:
        color = _COLORS[len(self._series) % len(_COLORS)]
        self._series.append((label, list(xs), list(ys), color, dashed))

    def add_circle(self, cx: float, cy: float, r: float, color: str, dashed: bool = False) -> None:
        self._circles.append((cx, cy, r, color, dashed))

    def _ranges(self):
        xs, ys = [], []
        for _, sx, sy, _, _ in self._series:
            xs.extend(sx)
            ys.extend(sy)
        for cx, cy, r, _, _ in self._circles:
            xs.extend([cx - r, cx + r])
            ys.extend([cy - r, cy + r])
        if not xs:
            return 0.0, 1.0, 0.0, 1.0
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        pad_x = 0.05 * (x_hi - x_lo)
        pad_y = 0.05 * (y_hi - y_lo)
        return x_lo - pad_x, x_hi + pad_x, y_lo - pad_y, y_hi + pad_y

    def _ticks(self, lo: float, hi: float, n: int = 5) -> list[float]:
        raw = (hi - lo) / n
        mag = 10 ** math.floor(math.log10(raw)) if raw > 0 else 1.0
        step = min(s for s in (mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
        first = math.ceil(lo / step) * step
        ticks = []
        v = first
        while v <= hi + 1e-12:
            ticks.append(round(v, 10))
            v += step
        return ticks

    def render(self) -> str:
        x_lo, x_hi, y_lo, y_hi = self._ranges()
        m = self.margin
        pw = self.width - 2 * m
        ph = self.height - 2 * m

        def px(x: float) -> float:
            return m + (x - x_lo) / (x_hi - x_lo) * pw

        def py(y: float) -> float:
            return self.height - m - (y - y_lo) / (y_hi - y_lo) * ph

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" '
            f'stroke="#444" stroke-width="1"/>',
        ]
        font = 'font-family="sans-serif" font-size="11"'
        for tx in self._ticks(x_lo, x_hi):
            parts.append(
                f'<line x1="{_fmt(px(tx))}" y1="{self.height - m}" '
                f'x2="{_fmt(px(tx))}" y2="{self.height - m + 4}" stroke="#444"/>'
            )
            parts.append(
                f'<text x="{_fmt(px(tx))}" y="{self.height - m + 16}" {font} '
                f'text-anchor="middle">{tx:g}</text>'
            )
        for ty in self._ticks(y_lo, y_hi):
            parts.append(
                f'<line x1="{m - 4}" y1="{_fmt(py(ty))}" x2="{m}" '
                f'y2="{_fmt(py(ty))}" stroke="#444"/>'
            )
            parts.append(
                f'<text x="{m - 7}" y="{_fmt(py(ty) + 3.5)}" {font} '
                f'text-anchor="end">{ty:g}</text>'
            )
        if self.title:
            parts.append(
                f'<text x="{self.width / 2}" y="{m - 14}" {font} font-size="14" '
                f'text-anchor="middle">{self.title}</text>'
            )
        if self.x_label:
            parts.append(
                f'<text x="{self.width / 2}" y="{self.height - 10}" {font} '
                f'text-anchor="middle">{self.x_label}</text>'
            )
        if self.y_label:
            parts.append(
                f'<text x="14" y="{self.height / 2}" {font} text-anchor="middle" '
                f'transform="rotate(-90 14 {self.height / 2})">{self.y_label}</text>'
            )
        for cx, cy, r, color, dashed in self._circles:
            rx = abs(px(cx + r) - px(cx))
            ry = abs(py(cy + r) - py(cy))
            dash = ' stroke-dasharray="5 4"' if dashed else ""
            parts.append(
                f'<ellipse cx="{_fmt(px(cx))}" cy="{_fmt(py(cy))}" rx="{_fmt(rx)}" '
                f'ry="{_fmt(ry)}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
            )
        legend_y = m + 14
        for label, sx, sy, color, dashed in self._series:
            pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(sx, sy))
            dash = ' stroke-dasharray="6 4"' if dashed else ""
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{dash}/>'
            )
            if label:
                parts.append(
                    f'<line x1="{m + 8}" y1="{legend_y - 4}" x2="{m + 28}" '
                    f'y2="{legend_y - 4}" stroke="{color}" stroke-width="1.5"{dash}/>'
                )
                parts.append(
                    f'<text x="{m + 33}" y="{legend_y}" {font}>{label}</text>'
                )
                legend_y += 15
        parts.append("</svg>")
        return "\n".join(parts)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.render())
