import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from app.plotting.figures import build_curves, write_figure
from app.plotting.svg import LineStyle, SVGPlot


@pytest.fixture(scope="module")
def fig1_curves():
    return {c.name: c for c in build_curves(1, 1e-5, 15)}


def test_fig1_has_four_decreasing_curves(fig1_curves):
    assert sorted(fig1_curves) == ["alpha1_beta0", "alpha1_betahalf", "alpha2_beta0", "alpha2_betahalf"]
    for curve in fig1_curves.values():
        assert len(curve.knots) == 16
        assert np.all(np.diff(curve.knot_values) < 0.0)
        assert len(curve.x) == 15 * 200 + 1


def test_unperturbed_curve_drops_by_eps_to_three_halves(fig1_curves):
    values = np.asarray(fig1_curves["alpha1_beta0"].knot_values)
    assert values[0] == pytest.approx(3.0 * 2.0 ** 1.5)
    np.testing.assert_allclose(-np.diff(values), 1e-5 ** 1.5, rtol=1e-6)


def test_larger_alpha_descends_faster_and_further(fig1_curves):
    slow, fast = fig1_curves["alpha1_beta0"], fig1_curves["alpha2_beta0"]
    assert np.all(np.asarray(fast.knot_values) <= np.asarray(slow.knot_values))
    assert fast.knots[-1] > slow.knots[-1]


def test_iters_must_stay_below_k_eps():
    with pytest.raises(ValueError):
        build_curves(1, 0.25, 8)


def test_write_figure(tmp_path):
    written = write_figure(tmp_path / "fig1", 1, 1e-5, 15)
    assert len(written) == 5
    frame = pd.read_csv(tmp_path / "fig1_alpha2_betahalf.csv")
    assert list(frame.columns) == ["x", "f"]
    svg = (tmp_path / "fig1.svg").read_text()
    assert svg.count("<polyline") == 4
    assert 'stroke-dasharray="8,4"' in svg
    assert svg.rstrip().endswith("</svg>")


def test_svg_requires_bounds():
    plot = SVGPlot()
    plot.header()
    with pytest.raises(RuntimeError):
        plot.polyline([0.0, 1.0], [0.0, 1.0], LineStyle())


def test_line_style_is_immutable_and_validated():
    style = LineStyle(width=2.0, dasharray="4,2")
    with pytest.raises(ValidationError):
        style.width = 3.0
    with pytest.raises(ValidationError):
        LineStyle(width=0.0)
    assert style.attributes() == 'stroke="black" stroke-width="2" fill="none" stroke-dasharray="4,2"'


def test_curve_carries_its_preset_style(fig1_curves):
    assert fig1_curves["alpha2_beta0"].style == LineStyle(stroke="black", width=1.5, dasharray="8,4")
