"""
Criticality measures phi_{f,j}(x): the largest decrease of the degree-j
Taylor model of f at x over the unit interval |d| <= 1.
"""
import math

import numpy as np

from ..schemas import TaylorData


def phi1(g: float) -> float:
    """
    First-order measure. The linear model decreases most at d = -sign(g),
    so the decrease is |g| whatever the value f0.
    """
    if not math.isfinite(g):
        raise ValueError(f"first derivative must be finite, got {g!r}")
    return abs(g)


def phi2(taylor: TaylorData) -> float:
    """
    Second-order measure, minimizing g d + h d^2 / 2 over the candidates
    d = -1, d = +1 and the interior stationary point -g/h when h > 0.
    """
    g, h = taylor.g, taylor.h
    candidates = [-1.0, 1.0]
    if h > 0.0:
        d_star = -g / h
        if abs(d_star) <= 1.0:
            candidates.append(d_star)
    lowest = min(g * d + 0.5 * h * d * d for d in candidates)
    # d = 0 is always feasible, so the decrease is never negative
    return max(0.0, -lowest)


def phi_grid_oracle(taylor: TaylorData, j: int, grid_points: int) -> float:
    """
    Brute-force phi_{f,j} over a uniform grid on [-1, 1]. Test oracle only.
    """
    if grid_points < 3:
        raise ValueError(f"grid_points must be at least 3, got {grid_points}")
    if j not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {j}")
    d = np.linspace(-1.0, 1.0, grid_points)
    model = taylor.g * d
    if j == 2:
        model = model + 0.5 * taylor.h * d * d
    return float(-np.min(model))
