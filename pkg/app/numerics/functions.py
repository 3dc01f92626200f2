from abc import ABC, abstractmethod
from typing import Callable

from ..schemas import EvalCounter

ScalarFn = Callable[[float], float]


class C2Function(ABC):
    """
    A twice continuously differentiable function of one real variable.

    Every call to `value`, `deriv1` or `deriv2` bumps the attached counter
    exactly once; subclasses implement the underscored evaluators.
    """

    def __init__(self) -> None:
        self.counter = EvalCounter()

    def value(self, x: float) -> float:
        self.counter.n_value += 1
        return float(self._value(x))

    def deriv1(self, x: float) -> float:
        self.counter.n_deriv1 += 1
        return float(self._deriv1(x))

    def deriv2(self, x: float) -> float:
        self.counter.n_deriv2 += 1
        return float(self._deriv2(x))

    @abstractmethod
    def _value(self, x: float) -> float: ...

    @abstractmethod
    def _deriv1(self, x: float) -> float: ...

    @abstractmethod
    def _deriv2(self, x: float) -> float: ...


class AnalyticFunction(C2Function):
    """Wraps three user callables."""

    def __init__(self, value_fn: ScalarFn, deriv1_fn: ScalarFn, deriv2_fn: ScalarFn) -> None:
        super().__init__()
        self._value_fn = value_fn
        self._deriv1_fn = deriv1_fn
        self._deriv2_fn = deriv2_fn

    def _value(self, x: float) -> float:
        return self._value_fn(x)

    def _deriv1(self, x: float) -> float:
        return self._deriv1_fn(x)

    def _deriv2(self, x: float) -> float:
        return self._deriv2_fn(x)


def make_analytic_function(value_fn: ScalarFn, deriv1_fn: ScalarFn, deriv2_fn: ScalarFn) -> C2Function:
    return AnalyticFunction(value_fn, deriv1_fn, deriv2_fn)
