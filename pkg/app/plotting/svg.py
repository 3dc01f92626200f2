"""
Minimal SVG line-plot builder. Appends markup to a string buffer.
"""
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field


class LineStyle(BaseModel):
    model_config = ConfigDict(frozen=True)

    stroke: str = "black"
    width: float = Field(default=1.0, gt=0.0)
    dasharray: Optional[str] = None

    def attributes(self) -> str:
        attrs = f'stroke="{self.stroke}" stroke-width="{self.width:g}" fill="none"'
        if self.dasharray:
            attrs += f' stroke-dasharray="{self.dasharray}"'
        return attrs


class SVGPlot:
    def __init__(self, width: int = 800, height: int = 500, margin: int = 60):
        self.width = width
        self.height = height
        self.margin = margin
        self.svg = ""
        self._bounds: Optional[Tuple[float, float, float, float]] = None
        self._legend: List[Tuple[str, LineStyle]] = []

    def header(self):
        self.svg += (
            '<?xml version="1.0" standalone="no"?>\n'
            f'<svg version="1.1" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" xmlns="http://www.w3.org/2000/svg">\n'
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>\n'
        )

    def set_bounds(self, x_min: float, x_max: float, y_min: float, y_max: float):
        if x_max <= x_min:
            x_max = x_min + 1.0
        if y_max <= y_min:
            y_max = y_min + 1.0
        self._bounds = (x_min, x_max, y_min, y_max)

    def _to_pixels(self, x: float, y: float) -> Tuple[float, float]:
        if self._bounds is None:
            raise RuntimeError("set_bounds must be called before drawing")
        x_min, x_max, y_min, y_max = self._bounds
        inner_w = self.width - 2 * self.margin
        inner_h = self.height - 2 * self.margin
        px = self.margin + (x - x_min) / (x_max - x_min) * inner_w
        py = self.height - self.margin - (y - y_min) / (y_max - y_min) * inner_h
        return px, py

    def axes(self, x_label: str = "x", y_label: str = "f(x)"):
        x_min, x_max, y_min, y_max = self._bounds
        left, bottom = self.margin, self.height - self.margin
        right, top = self.width - self.margin, self.margin
        self.svg += (
            f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>\n'
            f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>\n'
        )
        self.text(left, bottom + 20, f"{x_min:.4g}", anchor="middle")
        self.text(right, bottom + 20, f"{x_max:.4g}", anchor="middle")
        self.text(left - 8, bottom, f"{y_min:.4g}", anchor="end")
        self.text(left - 8, top + 4, f"{y_max:.4g}", anchor="end")
        self.text((left + right) / 2, bottom + 40, x_label, anchor="middle")
        self.text(left - 8, top - 16, y_label, anchor="middle")

    def text(self, x: float, y: float, string: str, anchor: str = "start", size: int = 12):
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}">{string}</text>\n'

    def polyline(self, xs: Sequence[float], ys: Sequence[float], style: LineStyle, label: Optional[str] = None):
        points = " ".join(f"{px:.2f},{py:.2f}" for px, py in (self._to_pixels(x, y) for x, y in zip(xs, ys)))
        self.svg += f'<polyline points="{points}" {style.attributes()}/>\n'
        if label:
            self._legend.append((label, style))

    def legend(self):
        x = self.width - self.margin - 180
        y = self.margin + 10
        for label, style in self._legend:
            self.svg += f'<line x1="{x}" y1="{y}" x2="{x + 30}" y2="{y}" {style.attributes()}/>\n'
            self.text(x + 38, y + 4, label)
            y += 18

    def get_svg(self) -> str:
        return f"{self.svg}</svg>\n"
