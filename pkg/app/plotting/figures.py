"""
Slow-convergence curves: prefixes of the example for several constant
schedules, sampled densely and written as CSV plus one SVG.
"""
import logging
import os
from pathlib import Path
from typing import Dict, List, Tuple, Union

import pandas as pd
from pydantic import BaseModel

from ..construction.hermite import build_interpolant
from ..construction.slow_example import build_sequences, prefix_schedule
from ..reporting.exports import dense_grid
from .svg import LineStyle, SVGPlot

logger = logging.getLogger(__name__)

# name -> (alpha, beta_q, style)
PRESETS: Dict[str, List[Tuple[str, float, float, LineStyle]]] = {
    "fig1": [
        ("alpha1_beta0", 1.0, 0.0, LineStyle(stroke="black", width=3.0)),
        ("alpha2_beta0", 2.0, 0.0, LineStyle(stroke="black", width=1.5, dasharray="8,4")),
        ("alpha1_betahalf", 1.0, 0.5, LineStyle(stroke="steelblue", width=1.0)),
        ("alpha2_betahalf", 2.0, 0.5, LineStyle(stroke="darkred", width=1.0)),
    ],
}


class Curve(BaseModel):
    name: str
    alpha: float
    beta_q: float
    style: LineStyle
    knots: List[float]
    knot_values: List[float]
    x: List[float]
    f: List[float]


def build_curves(q: int, eps: float, iters: int, preset: str = "fig1", points_per_segment: int = 200) -> List[Curve]:
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    curves = []
    for name, alpha, beta_q, style in PRESETS[preset]:
        # Only the plotted knots are built; iters >= k_eps is rejected here
        schedule = prefix_schedule(q, eps, iters, alpha=alpha, beta_q=beta_q)
        seq = build_sequences(schedule)
        interpolant = build_interpolant(seq)
        xs = dense_grid(seq.x, points_per_segment)
        fs = interpolant.sample(xs)[0]
        curves.append(Curve(
            name=name, alpha=alpha, beta_q=beta_q, style=style,
            knots=seq.x, knot_values=seq.f0, x=xs.tolist(), f=fs.tolist(),
        ))
    return curves


def render_svg(curves: List[Curve], title: str = "") -> str:
    plot = SVGPlot()
    plot.header()
    plot.set_bounds(
        min(min(c.x) for c in curves), max(max(c.x) for c in curves),
        min(min(c.f) for c in curves), max(max(c.f) for c in curves),
    )
    plot.axes()
    if title:
        plot.text(plot.width / 2, 24, title, anchor="middle", size=14)
    for c in curves:
        plot.polyline(c.x, c.f, c.style, label=f"alpha={c.alpha:g}, beta_q={c.beta_q:g}")
    plot.legend()
    return plot.get_svg()


def write_figure(
    prefix: Union[str, os.PathLike],
    q: int,
    eps: float,
    iters: int,
    preset: str = "fig1",
) -> List[Path]:
    """Writes PREFIX_<curve>.csv (x,f) per curve and PREFIX.svg."""
    curves = build_curves(q, eps, iters, preset)
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for c in curves:
        path = prefix.parent / f"{prefix.name}_{c.name}.csv"
        pd.DataFrame({"x": c.x, "f": c.f}).to_csv(path, index=False)
        written.append(path)
    svg_path = prefix.parent / f"{prefix.name}.svg"
    svg_path.write_text(render_svg(curves, title=f"q={q}, eps={eps:g}, first {iters} iterations"))
    written.append(svg_path)
    logger.info(f"Wrote {len(written)} figure files under {prefix.parent}")
    return written
