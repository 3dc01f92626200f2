"""
C^2 piecewise quintic Hermite interpolation of the example data.

Each segment is a degree-5 polynomial in the normalized variable
t = (x - x_lo) / H on [0, 1]; derivatives pick up a factor H^-j.
"""
import logging
from typing import Iterable, Literal, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from ..core.config import settings
from ..numerics.functions import C2Function
from ..schemas import ExampleSequences, ExtensionSpec, InterpolantModel, QuinticSegment

logger = logging.getLogger(__name__)

HermiteData = Tuple[float, float, float]

# Rows: value, first and second t-derivative at t = 1 of t^3, t^4, t^5
_HIGH_ORDER_BLOCK = np.array([
    [1.0, 1.0, 1.0],
    [3.0, 4.0, 5.0],
    [6.0, 12.0, 20.0],
])


def quintic_from_hermite(x_lo: float, x_hi: float, data_lo: HermiteData, data_hi: HermiteData) -> QuinticSegment:
    """
    The unique quintic matching (f, f', f'') at both ends of [x_lo, x_hi].
    """
    width = x_hi - x_lo
    if not width > 0.0:
        raise ValueError(f"zero-length or reversed interval [{x_lo}, {x_hi}]")
    if not np.all(np.isfinite([*data_lo, *data_hi])):
        raise ValueError("Hermite data must be finite")

    f_lo, d1_lo, d2_lo = data_lo
    f_hi, d1_hi, d2_hi = data_hi
    c0 = f_lo
    c1 = d1_lo * width
    c2 = 0.5 * d2_lo * width ** 2
    rhs = np.array([
        f_hi - (c0 + c1 + c2),
        d1_hi * width - (c1 + 2.0 * c2),
        d2_hi * width ** 2 - 2.0 * c2,
    ])
    c3, c4, c5 = np.linalg.solve(_HIGH_ORDER_BLOCK, rhs)
    return QuinticSegment(x_lo=x_lo, x_hi=x_hi, coeffs=[c0, c1, c2, float(c3), float(c4), float(c5)])


def _segment_eval(segment: QuinticSegment, x, order: int):
    t = (np.asarray(x, dtype=float) - segment.x_lo) / segment.width
    coeffs = np.asarray(segment.coeffs)
    if order:
        coeffs = P.polyder(coeffs, order)
    return P.polyval(t, coeffs) / segment.width ** order


def third_derivative_bound(segment: QuinticSegment, samples: int = 2) -> float:
    """
    max |f'''| over the segment. p'''(t) = 6 c3 + 24 c4 t + 60 c5 t^2 is a
    quadratic, so the endpoints and its vertex suffice; the sample grid is
    folded in as well.
    """
    c3, c4, c5 = segment.coeffs[3:]
    t = list(np.linspace(0.0, 1.0, max(samples, 2)))
    if c5 != 0.0:
        vertex = -24.0 * c4 / (120.0 * c5)
        if 0.0 < vertex < 1.0:
            t.append(vertex)
    t = np.asarray(t)
    third = 6.0 * c3 + 24.0 * c4 * t + 60.0 * c5 * t ** 2
    return float(np.max(np.abs(third))) / segment.width ** 3


class PiecewiseQuintic(C2Function):
    """
    C^2 piecewise quintic through (x_k, f_k, f'_k, f''_k), with an
    extension on each side of the knot range.

    Points within KNOT_SNAP_RTOL * max(1, |x_k|) of a knot return the knot
    data as stored, so prescribed derivatives are seen exactly.
    """

    def __init__(self, model: InterpolantModel):
        super().__init__()
        self.model = model
        self.knots = np.asarray(model.knots, dtype=float)
        if np.any(np.diff(self.knots) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        if len(model.segments) != len(self.knots) - 1:
            raise ValueError("one segment per knot interval is required")
        self._knot_data = np.array([model.values, model.deriv1, model.deriv2], dtype=float)
        self._snap = settings.KNOT_SNAP_RTOL * np.maximum(1.0, np.abs(self.knots))

    # --- construction ---

    @classmethod
    def from_knot_data(
        cls,
        knots: Sequence[float],
        values: Sequence[float],
        deriv1: Sequence[float],
        deriv2: Sequence[float],
        left: Literal["plateau", "quadratic"] = "plateau",
        right: Literal["constant", "quadratic"] = "constant",
    ) -> "PiecewiseQuintic":
        knots = [float(v) for v in knots]
        if len(knots) < 2:
            raise ValueError("at least two knots are required")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError("knots must be strictly increasing")
        data = list(zip(values, deriv1, deriv2))
        if len(data) != len(knots):
            raise ValueError("one (f, f', f'') triple per knot is required")

        segments = [
            quintic_from_hermite(knots[i], knots[i + 1], data[i], data[i + 1])
            for i in range(len(knots) - 1)
        ]

        first, last = data[0], data[-1]
        if left == "plateau":
            # Flat shelf one unit left of x_0, one unit above f_0
            shelf = first[0] + 1.0
            aux = quintic_from_hermite(knots[0] - 1.0, knots[0], (shelf, 0.0, 0.0), first)
            left_ext = ExtensionSpec(kind="plateau", anchor=knots[0] - 1.0, value=shelf, segment=aux)
        else:
            left_ext = ExtensionSpec(kind="quadratic", anchor=knots[0], value=first[0], deriv1=first[1], deriv2=first[2])

        if right == "constant":
            if last[1] != 0.0 or last[2] != 0.0:
                raise ValueError("a constant right extension needs zero derivatives at the last knot")
            right_ext = ExtensionSpec(kind="constant", anchor=knots[-1], value=last[0])
        else:
            right_ext = ExtensionSpec(kind="quadratic", anchor=knots[-1], value=last[0], deriv1=last[1], deriv2=last[2])

        return cls(InterpolantModel(
            knots=knots,
            values=[d[0] for d in data],
            deriv1=[d[1] for d in data],
            deriv2=[d[2] for d in data],
            segments=segments,
            left_ext=left_ext,
            right_ext=right_ext,
        ))

    # --- evaluation ---

    @property
    def segments(self) -> list[QuinticSegment]:
        return self.model.segments

    def quintic_pieces(self) -> list[QuinticSegment]:
        """Interior segments plus the auxiliary left segment, if any."""
        aux = self.model.left_ext.segment
        return ([aux] if aux is not None else []) + list(self.segments)

    def _extension_eval(self, ext: ExtensionSpec, x: float, order: int) -> float:
        if ext.kind == "quadratic":
            d = x - ext.anchor
            return (ext.value + ext.deriv1 * d + 0.5 * ext.deriv2 * d * d,
                    ext.deriv1 + ext.deriv2 * d,
                    ext.deriv2)[order]
        return ext.value if order == 0 else 0.0

    def _eval(self, x: float, order: int) -> float:
        x = float(x)
        i = int(np.searchsorted(self.knots, x))
        for j in (i - 1, i):
            if 0 <= j < len(self.knots) and abs(x - self.knots[j]) <= self._snap[j]:
                return float(self._knot_data[order, j])

        left, right = self.model.left_ext, self.model.right_ext
        if x < self.knots[0]:
            if left.kind == "plateau":
                if x <= left.anchor:
                    return left.value if order == 0 else 0.0
                return float(_segment_eval(left.segment, x, order))
            return self._extension_eval(left, x, order)
        if x > self.knots[-1]:
            return self._extension_eval(right, x, order)
        return float(_segment_eval(self.segments[i - 1], x, order))

    def _value(self, x: float) -> float:
        return self._eval(x, 0)

    def _deriv1(self, x: float) -> float:
        return self._eval(x, 1)

    def _deriv2(self, x: float) -> float:
        return self._eval(x, 2)

    def sample(self, xs: Iterable[float]) -> np.ndarray:
        """
        Rows (f, f', f'') at each point. Does not touch the evaluation counter.
        """
        xs = np.asarray(list(xs), dtype=float)
        out = np.empty((3, xs.size))
        for n, x in enumerate(xs):
            out[:, n] = [self._eval(x, order) for order in range(3)]
        return out

    def lower_bound_estimate(self, n_points: int = 10_000, margin: float = 2.0) -> float:
        """Minimum sampled value over [x_0 - margin, x_last + margin]."""
        xs = np.linspace(self.knots[0] - margin, self.knots[-1] + margin, n_points)
        return float(np.min(self.sample(xs)[0]))


def build_interpolant(seq: ExampleSequences) -> PiecewiseQuintic:
    """
    The interpolant of the example data: a plateau on the left, and a
    constant continuation on the right of a complete sequence (where
    f' = f'' = 0). Truncated prefixes continue quadratically instead.
    """
    if any(b <= a for a, b in zip(seq.x, seq.x[1:])):
        raise ValueError("knots must be strictly increasing")
    interpolant = PiecewiseQuintic.from_knot_data(
        seq.x, seq.f0, seq.f1, seq.f2,
        left="plateau",
        right="quadratic" if seq.truncated else "constant",
    )
    logger.debug(f"Built interpolant with {len(interpolant.segments)} segments")
    return interpolant


def estimate_hessian_lipschitz(f: PiecewiseQuintic, samples_per_segment: int = 2) -> float:
    """
    Upper bound on the Lipschitz constant of f'': the largest |f'''| over
    all quintic pieces (extensions are at most quadratic).
    """
    if samples_per_segment < 2:
        raise ValueError(f"samples_per_segment must be at least 2, got {samples_per_segment}")
    return max(third_derivative_bound(seg, samples_per_segment) for seg in f.quintic_pieces())
