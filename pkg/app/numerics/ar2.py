import logging
import math
from typing import List, Literal, Optional

from ..core.config import settings
from ..schemas import AR2Config, IterRecord, ModelData, RunTrace, SubproblemSolution, TaylorData
from .criticality import phi1, phi2
from .functions import C2Function

logger = logging.getLogger(__name__)

StepDomain = Literal["full_line", "nonnegative"]


class AR2Abort(RuntimeError):
    """
    Raised when the iteration cannot continue. Carries the partial trace.
    """

    def __init__(self, message: str, trace: Optional[RunTrace] = None):
        super().__init__(message)
        self.trace = trace


def _quadratic_roots(a: float, b: float, c: float) -> List[float]:
    """
    Real roots of a s^2 + b s + c = 0 (a != 0), sign-aware so that neither
    root suffers cancellation.
    """
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sign_b = 1.0 if b >= 0.0 else -1.0
    q = -0.5 * (b + sign_b * math.sqrt(disc))
    if q == 0.0:
        # b == 0 and c == 0: double root at the origin
        return [0.0]
    return [q / a, c / q]


def minimize_model(model: ModelData, domain: StepDomain = "full_line") -> SubproblemSolution:
    """
    Global minimizer of m(s) = f0 + g s + h s^2 / 2 + sigma |s|^3 / 6.

    On s >= 0 the stationary points solve g + h s + sigma s^2 / 2 = 0, on
    s <= 0 they solve g + h s - sigma s^2 / 2 = 0. The minimizer is taken
    among those roots and s = 0; near-ties go to the larger step.
    """
    half_sigma = 0.5 * model.sigma
    stationary = [s for s in _quadratic_roots(half_sigma, model.h, model.g) if s > 0.0]
    if domain == "full_line":
        stationary += [s for s in _quadratic_roots(-half_sigma, model.h, model.g) if s < 0.0]
    elif domain != "nonnegative":
        raise ValueError(f"unknown step domain {domain!r}")
    stationary.sort()

    best_step, best_decrease = 0.0, 0.0
    for s in stationary:
        decrease = model.decrease_at(s)
        scale = max(abs(decrease), abs(best_decrease))
        if abs(decrease - best_decrease) <= settings.TIE_RTOL * scale:
            if s > best_step:
                best_step, best_decrease = s, decrease
        elif decrease < best_decrease:
            best_step, best_decrease = s, decrease

    return SubproblemSolution(
        step=best_step,
        model_value=model.f0 + best_decrease,
        model_decrease=-best_decrease,
        stationary_points=stationary,
    )


def _next_sigma(rho: float, sigma: float, config: AR2Config) -> float:
    """Picks sigma_{k+1} inside the interval prescribed by the ratio test."""
    if rho >= config.eta2:
        if config.sigma_policy == "keep":
            return sigma
        return max(config.sigma_min, config.gamma1 * sigma)
    if rho >= config.eta1:
        return sigma
    return config.gamma2 * sigma


def _check_finite(k: int, **values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise AR2Abort(f"non-finite {name}={value!r} at iteration {k}")


def run_ar2(f: C2Function, x0: float, config: AR2Config) -> RunTrace:
    """
    The AR2 algorithm with exact steps.

    Step 1 evaluates derivatives only as far as needed: for q = 2 the
    Hessian is evaluated there only when phi1 is below eps1, otherwise in
    Step 2. After an unsuccessful iteration the derivatives at x_k are
    reused, so each evaluator is called at most once per point.
    """
    start = f.counter.snapshot()
    max_iters = config.resolved_max_iters
    logger.info(f"Starting AR2 run from x0={x0} (q={config.q}, domain={config.step_domain}, max_iters={max_iters})")

    x = float(x0)
    fx = f.value(x)
    sigma = config.sigma0
    records: List[IterRecord] = []

    def partial_trace(terminated_by: str, phi1_value: float, phi2_value: Optional[float]) -> RunTrace:
        return RunTrace(
            records=records,
            termination_index=len(records),
            terminated_by=terminated_by,
            counters=f.counter.snapshot() - start,
            final_x=x,
            final_f=fx,
            final_phi1=phi1_value,
            final_phi2=phi2_value,
        )

    k = 0
    g = h = 0.0
    phi1_k, phi2_k = 0.0, None
    have_hessian = False
    need_test = True
    try:
        _check_finite(k, f=fx)
        while True:
            # Step 1: test for termination
            if need_test:
                g = f.deriv1(x)
                _check_finite(k, g=g)
                phi1_k, phi2_k = phi1(g), None
                have_hessian = False
                critical = phi1_k < config.eps1
                if critical and config.q == 2:
                    h = f.deriv2(x)
                    _check_finite(k, h=h)
                    have_hessian = True
                    phi2_k = phi2(TaylorData(f0=fx, g=g, h=h, x=x))
                    critical = phi2_k < config.eps2 / 2.0
                if critical:
                    logger.info(f"AR2 terminated at k={k} (phi1={phi1_k:.3e}, phi2={phi2_k})")
                    return partial_trace("criticality", phi1_k, phi2_k)

            if k >= max_iters:
                logger.warning(f"AR2 stopped by the iteration cap at k={k}")
                return partial_trace("max_iters", phi1_k, phi2_k)

            # Step 2: step calculation
            if not have_hessian:
                h = f.deriv2(x)
                _check_finite(k, h=h)
                have_hessian = True
            if phi2_k is None and (config.q == 2 or config.record_phi2):
                phi2_k = phi2(TaylorData(f0=fx, g=g, h=h, x=x))
            solution = minimize_model(ModelData(f0=fx, g=g, h=h, sigma=sigma), config.step_domain)
            s = solution.step
            predicted = -(g * s + 0.5 * h * s * s)
            if not predicted > 0.0:
                raise AR2Abort(
                    f"no predicted decrease at non-critical point x={x} (k={k}, g={g}, h={h}, "
                    f"sigma={sigma}, step={s}, stationary={solution.stationary_points})"
                )

            # Step 3: acceptance of the trial point
            f_trial = f.value(x + s)
            _check_finite(k, f_trial=f_trial)
            rho = (fx - f_trial) / predicted
            accepted = rho >= config.eta1
            records.append(IterRecord(
                k=k, x=x, f=fx, g=g, h=h, sigma=sigma, step=s, rho=rho,
                phi1=phi1_k, phi2=phi2_k, accepted=accepted,
            ))
            logger.debug(f"k={k} x={x:.16e} step={s:.16e} rho={rho:.6f} sigma={sigma}")

            # Step 4: regularization parameter update
            sigma = _next_sigma(rho, sigma, config)
            if accepted:
                x = x + s
                fx = f_trial
                need_test = True
            else:
                need_test = False
            k += 1
    except AR2Abort as e:
        logger.error(f"AR2 run aborted: {e}")
        if e.trace is None:
            e.trace = partial_trace("aborted", phi1_k, phi2_k)
        raise
