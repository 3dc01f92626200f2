import numpy as np
import numpy.testing as npt
import pytest

from app.numerics.ar2 import AR2Abort, minimize_model, run_ar2
from app.numerics.functions import make_analytic_function
from app.schemas import AR2Config, ModelData


# --- Subproblem ---

def test_minimize_model_linear_slope():
    sol = minimize_model(ModelData(f0=0.0, g=-0.25, h=0.0, sigma=2.0))
    assert sol.step == pytest.approx(0.5, abs=1e-15)
    assert sol.model_decrease == pytest.approx(0.25 * 0.5 - 0.125 / 3.0, abs=1e-15)


def test_minimize_model_convex_stays_at_origin():
    assert minimize_model(ModelData(f0=0.0, g=0.0, h=1.0, sigma=2.0)).step == 0.0


def test_minimize_model_tie_prefers_positive_step():
    sol = minimize_model(ModelData(f0=0.0, g=0.0, h=-0.25, sigma=2.0))
    assert sol.step == pytest.approx(0.25, abs=1e-15)
    assert sol.model_value == pytest.approx(-0.5 * 0.25 * 0.0625 + 0.015625 / 3.0, abs=1e-15)
    npt.assert_allclose(sol.stationary_points, [-0.25, 0.25], atol=1e-15)


def test_minimize_model_nonnegative_q2_example_returns_origin():
    # Stationary points 1/8 and 1/4 both sit above the model value at 0
    model = ModelData(f0=0.0, g=0.03125, h=-0.375, sigma=2.0)
    sol = minimize_model(model, "nonnegative")
    assert sol.step == 0.0
    npt.assert_allclose(sol.stationary_points, [0.125, 0.25], atol=1e-15)
    assert model.decrease_at(0.25) > 0.0


def test_minimize_model_full_line_q2_example_goes_negative():
    sol = minimize_model(ModelData(f0=0.0, g=0.03125, h=-0.375, sigma=2.0), "full_line")
    assert sol.step < 0.0
    assert sol.model_decrease > 0.0


def _model_grid_min(g, h, sigma, lo, hi, n_points=2001):
    s = np.linspace(lo, hi, n_points)
    return float(np.min(g * s + 0.5 * h * s * s + sigma / 6.0 * np.abs(s) ** 3))


@pytest.mark.parametrize("domain", ["full_line", "nonnegative"])
def test_minimize_model_beats_grid_on_random_models(domain):
    rng = np.random.default_rng(20240611)
    for g, h, sigma in zip(rng.uniform(-2.0, 2.0, 10_000), rng.uniform(-2.0, 2.0, 10_000), rng.uniform(0.1, 4.0, 10_000)):
        sol = minimize_model(ModelData(f0=0.0, g=g, h=h, sigma=sigma), domain)
        # every stationary point lies within this radius
        radius = (abs(h) + np.sqrt(h * h + 2.0 * sigma * abs(g))) / sigma + 1.0
        grid_min = _model_grid_min(g, h, sigma, -radius if domain == "full_line" else 0.0, radius)
        assert sol.model_value <= grid_min + 1e-11 * max(1.0, abs(grid_min)), (g, h, sigma)
        if domain == "nonnegative":
            assert sol.step >= 0.0
        if sol.step != 0.0:
            s = sol.step
            residual = g + h * s + 0.5 * sigma * s * abs(s)
            assert abs(residual) <= 1e-10 * max(1.0, abs(g)), (g, h, sigma)


def test_minimize_model_unknown_domain():
    with pytest.raises(ValueError):
        minimize_model(ModelData(f0=0.0, g=1.0, h=0.0, sigma=1.0), "halfspace")


# --- Configuration ---

@pytest.mark.parametrize("overrides", [
    {"eps1": 0.0},
    {"eta1": 0.95, "eta2": 0.9},
    {"gamma1": 1.5},
    {"sigma0": 1.0, "sigma_min": 2.0},
    {"theta": 1.0},
])
def test_config_rejects_out_of_range(overrides):
    params = {"q": 1, "eps1": 0.1, "eps2": 0.1} | overrides
    with pytest.raises(ValueError):
        AR2Config(**params)


# --- Driver ---

def test_convex_quadratic_sanity_run():
    f = make_analytic_function(lambda x: x * x, lambda x: 2 * x, lambda x: 2.0)
    trace = run_ar2(f, 10.0, AR2Config(q=1, eps1=1e-6, eps2=1e-6, sigma0=2.0, eta1=0.1, eta2=0.9))
    assert trace.terminated_by == "criticality"
    assert trace.termination_index >= 1
    assert abs(2 * trace.final_x) < 1e-6


def test_zero_function_terminates_immediately():
    f = make_analytic_function(lambda x: 0.0, lambda x: 0.0, lambda x: 0.0)
    trace = run_ar2(f, 1.0, AR2Config(q=2, eps1=0.1, eps2=0.1))
    assert trace.termination_index == 0
    assert trace.records == []
    assert trace.counters.as_tuple() == (1, 1, 1)


def test_unperturbed_example_run(unperturbed_q1):
    _, seq, interpolant = unperturbed_q1
    trace = run_ar2(interpolant, 0.0, AR2Config(q=1, eps1=0.25, eps2=0.25, step_domain="nonnegative", max_iters=80))
    assert trace.termination_index == 8
    npt.assert_allclose([r.x for r in trace.records] + [trace.final_x], [0.5 * k for k in range(9)], atol=1e-12)
    npt.assert_allclose([r.rho for r in trace.records], 1.0, rtol=1e-12)
    assert all(r.sigma == 2.0 for r in trace.records)
    assert trace.counters.as_tuple() == (9, 9, 8)


def test_record_phi2_for_first_order_runs(unperturbed_q1):
    _, _, interpolant = unperturbed_q1
    trace = run_ar2(interpolant, 0.0, AR2Config(q=1, eps1=0.25, eps2=0.25, record_phi2=True, max_iters=80))
    assert all(r.phi2 is not None for r in trace.records)


def test_iteration_cap():
    f = make_analytic_function(lambda x: -x, lambda x: -1.0, lambda x: 0.0)
    trace = run_ar2(f, 0.0, AR2Config(q=1, eps1=0.5, eps2=0.5, max_iters=3))
    assert trace.terminated_by == "max_iters"
    assert len(trace.records) == 3


def test_shrink_policy_reduces_sigma():
    f = make_analytic_function(lambda x: -x, lambda x: -1.0, lambda x: 0.0)
    trace = run_ar2(f, 0.0, AR2Config(q=1, eps1=0.5, eps2=0.5, sigma0=4.0, sigma_policy="shrink", max_iters=2))
    # Linear f gives rho = 1, so the shrink policy halves sigma
    assert trace.records[1].sigma == pytest.approx(2.0)


def test_rejected_step_reuses_derivatives():
    # Steps longer than 0.9 land on a wall; sigma doubles until s = 1/sqrt(2)
    f = make_analytic_function(
        lambda x: -x if x <= 0.9 else 100.0,
        lambda x: -1.0 if x < 0.5 else 0.0,
        lambda x: 0.0,
    )
    trace = run_ar2(f, 0.0, AR2Config(q=1, eps1=0.5, eps2=0.5, sigma0=0.5))
    assert [r.accepted for r in trace.records] == [False, False, False, True]
    assert [r.sigma for r in trace.records] == [0.5, 1.0, 2.0, 4.0]
    assert trace.counters.as_tuple() == (5, 2, 1)
    assert trace.final_x == pytest.approx(0.5 ** 0.5)


def test_nan_aborts_with_partial_trace():
    f = make_analytic_function(lambda x: float("nan") if x > 0.0 else -x, lambda x: -1.0, lambda x: 0.0)
    with pytest.raises(AR2Abort) as excinfo:
        run_ar2(f, 0.0, AR2Config(q=1, eps1=0.5, eps2=0.5))
    assert excinfo.value.trace is not None
    assert excinfo.value.trace.terminated_by == "aborted"


def test_shrink_policy_stops_at_sigma_min():
    f = make_analytic_function(lambda x: -x, lambda x: -1.0, lambda x: 0.0)
    config = AR2Config(q=1, eps1=0.5, eps2=0.5, sigma0=1.0, sigma_min=0.1, sigma_policy="shrink", max_iters=8)
    trace = run_ar2(f, 0.0, config)
    sigmas = [r.sigma for r in trace.records]
    npt.assert_allclose(sigmas, [1.0, 0.5, 0.25, 0.125, 0.1, 0.1, 0.1, 0.1], rtol=1e-15)
    assert min(sigmas) >= config.sigma_min


def _accepted_values(trace):
    return [r.f for r in trace.records if r.accepted] + [trace.final_f]


def test_accepted_steps_strictly_decrease_f(unperturbed_q1):
    _, _, interpolant = unperturbed_q1
    quadratic = make_analytic_function(lambda x: x * x, lambda x: 2 * x, lambda x: 2.0)
    wall = make_analytic_function(
        lambda x: -x if x <= 0.9 else 100.0,
        lambda x: -1.0 if x < 0.5 else 0.0,
        lambda x: 0.0,
    )
    traces = [
        run_ar2(interpolant, 0.0, AR2Config(q=1, eps1=0.25, eps2=0.25, step_domain="nonnegative", max_iters=80)),
        run_ar2(quadratic, 10.0, AR2Config(q=1, eps1=1e-6, eps2=1e-6, sigma0=2.0)),
        run_ar2(wall, 0.0, AR2Config(q=1, eps1=0.5, eps2=0.5, sigma0=0.5)),
    ]
    for trace in traces:
        values = _accepted_values(trace)
        assert len(values) >= 2
        assert np.all(np.diff(values) < 0.0)
