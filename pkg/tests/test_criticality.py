import numpy as np
import pytest

from app.numerics.criticality import phi1, phi2, phi_grid_oracle
from app.schemas import TaylorData


@pytest.mark.parametrize("g, expected", [(-0.3, 0.3), (0.0, 0.0), (-(1 + 0.5) * 0.25, 0.375)])
def test_phi1(g, expected):
    assert phi1(g) == pytest.approx(expected, abs=1e-15)


def test_phi1_rejects_nan():
    with pytest.raises(ValueError):
        phi1(float("nan"))


@pytest.mark.parametrize("g, h, expected", [
    (0.0, -0.5, 0.25),
    (0.0, 2.0, 0.0),
    (0.03125, -0.375, 0.21875),
    (0.5, 2.0, 0.0625),  # interior minimizer d = -1/4
])
def test_phi2(g, h, expected):
    assert phi2(TaylorData(g=g, h=h)) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("g, h, j", [(-0.3, 0.0, 1), (0.0, -0.5, 2), (0.0, 2.0, 2), (0.03125, -0.375, 2)])
def test_grid_oracle_agrees(g, h, j):
    taylor = TaylorData(g=g, h=h)
    exact = phi1(g) if j == 1 else phi2(taylor)
    assert phi_grid_oracle(taylor, j, 1_000_001) == pytest.approx(exact, abs=1e-6)


def test_grid_oracle_rejects_bad_arguments():
    with pytest.raises(ValueError):
        phi_grid_oracle(TaylorData(g=1.0), 1, 2)
    with pytest.raises(ValueError):
        phi_grid_oracle(TaylorData(g=1.0), 3, 11)


def test_taylor_data_rejects_inf():
    with pytest.raises(ValueError):
        TaylorData(g=float("inf"))


def test_phi2_matches_grid_oracle_on_random_data():
    rng = np.random.default_rng(7)
    for g, h in rng.uniform(-2.0, 2.0, size=(500, 2)):
        taylor = TaylorData(g=g, h=h)
        assert abs(phi2(taylor) - phi_grid_oracle(taylor, 2, 100_001)) <= 1e-5, (g, h)


@pytest.mark.parametrize("f0", [-1e6, 0.0, 3.5, 8.485])
def test_measures_ignore_function_value(f0):
    base = TaylorData(f0=0.0, g=0.125, h=-0.75, x=2.0)
    shifted = base.model_copy(update={"f0": f0})
    assert phi1(shifted.g) == phi1(base.g)
    assert phi2(shifted) == phi2(base)
    assert phi_grid_oracle(shifted, 2, 1001) == phi_grid_oracle(base, 2, 1001)
