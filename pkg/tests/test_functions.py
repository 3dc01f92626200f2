from app.numerics.functions import make_analytic_function
from app.schemas import EvalCounter


def test_polynomial_evaluators():
    f = make_analytic_function(lambda x: x * x, lambda x: 2 * x, lambda x: 2.0)
    assert f.value(3.0) == 9.0
    assert f.deriv1(3.0) == 6.0
    assert f.deriv2(3.0) == 2.0


def test_zero_function():
    f = make_analytic_function(lambda x: 0.0, lambda x: 0.0, lambda x: 0.0)
    assert (f.value(-7.5), f.deriv1(-7.5), f.deriv2(-7.5)) == (0.0, 0.0, 0.0)


def test_counter_tracks_each_evaluator():
    f = make_analytic_function(lambda x: x, lambda x: 1.0, lambda x: 0.0)
    f.value(0.0)
    f.value(1.0)
    f.deriv1(0.0)
    assert f.counter.as_tuple() == (2, 1, 0)


def test_counter_difference():
    before = EvalCounter(n_value=1, n_deriv1=1)
    after = EvalCounter(n_value=4, n_deriv1=3, n_deriv2=2)
    assert (after - before).as_tuple() == (3, 2, 2)

