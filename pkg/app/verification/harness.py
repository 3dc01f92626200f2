"""
Certification harness: checks every admissibility condition of the
generated data, runs AR2 on the interpolant and compares the trajectory
with the prescribed knots.
"""
import logging
import math
from collections import Counter
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np

from ..core.config import settings
from ..construction.hermite import PiecewiseQuintic, build_interpolant
from ..construction.slow_example import (
    build_sequences,
    k_epsilon,
    model_stationarity_check,
    random_schedule,
    relation_beta,
)
from ..numerics.ar2 import AR2Abort, minimize_model, run_ar2
from ..numerics.criticality import phi1, phi2
from ..schemas import (
    AR2Config,
    CheckResult,
    Discrepancy,
    ExampleSequences,
    ModelData,
    PerturbationSchedule,
    SampleConstraints,
    SampleResult,
    SampleSummary,
    TaylorData,
    VerificationReport,
)

logger = logging.getLogger(__name__)

Mode = Literal["paper", "strict"]


def _upper_check(name: str, measured: Sequence[float], bound: Sequence[float], tol: float, detail: str = "") -> CheckResult:
    """measured_k <= bound_k + tol for every k; reports the k with the least slack."""
    if len(measured) == 0:
        return CheckResult(name=name, passed=True, tolerance=tol, detail=detail or None)
    slack = np.asarray(bound, dtype=float) - np.asarray(measured, dtype=float)
    k = int(np.argmin(slack))
    return CheckResult(
        name=name, passed=bool(slack[k] >= -tol),
        measured=float(measured[k]), bound=float(bound[k]), tolerance=tol, index=k,
        detail=detail or None,
    )


def _lower_check(name: str, measured: Sequence[float], bound: Sequence[float], tol: float, detail: str = "") -> CheckResult:
    """measured_k >= bound_k - tol for every k."""
    if len(measured) == 0:
        return CheckResult(name=name, passed=True, tolerance=tol, detail=detail or None)
    slack = np.asarray(measured, dtype=float) - np.asarray(bound, dtype=float)
    k = int(np.argmin(slack))
    return CheckResult(
        name=name, passed=bool(slack[k] >= -tol),
        measured=float(measured[k]), bound=float(bound[k]), tolerance=tol, index=k,
        detail=detail or None,
    )


def _phis(seq: ExampleSequences, k: int) -> tuple[float, float]:
    return phi1(seq.f1[k]), phi2(TaylorData(f0=seq.f0[k], g=seq.f1[k], h=seq.f2[k], x=seq.x[k]))


def verify_sequences(seq: ExampleSequences, schedule: PerturbationSchedule) -> VerificationReport:
    """
    One named check per admissibility condition of the construction.
    Failures are report entries, never exceptions.
    """
    tol = settings.CHECK_SLACK
    q, p, eps, eta1 = seq.q, seq.p, seq.eps, schedule.eta1
    n = seq.n_steps
    f0 = np.asarray(seq.f0)
    s = np.asarray(seq.s)
    x = np.asarray(seq.x)
    alpha = np.asarray(schedule.alpha[: n + 1])
    a = alpha[:n] * eps
    f0_max = 3.0 * 2.0 ** (3.0 / p)
    checks: List[CheckResult] = []
    discrepancies: List[Discrepancy] = []

    drops = f0[:-1] - f0[1:]
    worst = int(np.argmin(drops))
    checks.append(CheckResult(
        name="monotone_decrease", passed=bool(drops[worst] > 0.0),
        measured=float(drops[worst]), bound=0.0, index=worst, detail="f_k - f_{k+1} > 0",
    ))
    checks.append(_upper_check("obj_bound_upper", f0, np.full(n + 1, f0_max), tol, "f_k <= 3 * 2^(3/p)"))
    checks.append(_lower_check("obj_bound_lower", f0, np.zeros(n + 1), tol, "f_k >= 0"))

    taylor = np.asarray(seq.taylor)
    checks.append(_lower_check("predicted_decrease", f0[:-1] - taylor, s ** 3 / 4.0, tol,
                               "f_k - T_{f,2}(x_k, s_k) >= s_k^3 / 4"))
    relation = np.array([relation_beta(q, b) for b in schedule.beta_q[:n]])
    checks.append(_lower_check("relation_beta_lower", relation, np.full(n, 0.25), tol))
    checks.append(_upper_check("relation_beta_upper", relation, np.full(n, 1.25), tol))
    checks.append(_upper_check("f0_cond", np.abs(f0[1:] - taylor), (1.0 - eta1) / 4.0 * s ** 3, tol,
                               "|f_{k+1} - T_{f,2}(x_k, s_k)| <= (1 - eta1)/4 s_k^3"))

    # Per-step drop bounds
    drop_scale = a ** (3.0 / p)
    c_q = 1.0 if q == 1 else 0.25
    checks.append(_lower_check("drop_lower", drops, drop_scale * (c_q - (1.0 - eta1) / 4.0), tol))
    checks.append(_upper_check("drop_upper", drops, np.full(n, 1.5 * (2.0 * eps) ** (3.0 / p)), tol))
    short = np.flatnonzero(drops < drop_scale - tol)
    if short.size:
        k = int(short[0])
        discrepancies.append(Discrepancy(
            check="drop_lower", iteration=k,
            message=f"{short.size} step(s) drop less than (alpha_k eps)^(3/p); the stated lower bound ignores beta_0 > 0",
            values={"drop": float(drops[k]), "stated_bound": float(drop_scale[k]), "beta0_next": schedule.beta0[k + 1]},
        ))

    # Taylor gaps at the next knot
    gap1 = np.abs(np.asarray(seq.f1[1:]) - np.asarray(seq.taylor_d1))
    gap2 = np.abs(np.asarray(seq.f2[1:]) - np.asarray(seq.taylor_d2))
    checks.append(_upper_check("diffall_first", gap1, 4.5 * s ** 2, tol, "|f'_{k+1} - T'| <= 9/2 s_k^2"))
    checks.append(_upper_check("diffall_second", gap2, 4.5 * s, tol, "|f''_{k+1} - T''| <= 9/2 s_k"))

    deriv_max = np.max(np.abs([seq.f0, seq.f1, seq.f2]), axis=0)
    checks.append(_upper_check("fkj_bound", deriv_max, np.full(n + 1, max(2.5, f0_max)), tol))
    checks.append(_upper_check("step_bound", np.abs(s), np.ones(n), tol))

    # Knot positions
    checks.append(_lower_check("xkinter_lower", x, np.zeros(n + 1), tol))
    x_bound = seq.k_eps * max(0.5, (2.0 * eps) ** (1.0 / p))
    checks.append(_upper_check("xkinter", x, np.full(n + 1, x_bound), tol,
                               "x_k <= k_eps * max(1/2, (2 eps)^(1/p))"))
    if x.max() > 0.5 * seq.k_eps + tol:
        k = int(np.argmax(x > 0.5 * seq.k_eps + tol))
        discrepancies.append(Discrepancy(
            check="xkinter", iteration=k,
            message="knot beyond k_eps / 2; the stated interval needs (2 eps)^(1/p) <= 1/2",
            values={"x": float(x[k]), "stated_bound": 0.5 * seq.k_eps},
        ))

    recursion = np.abs(x[1:] - (x[:-1] + s))
    step_def = np.abs(s - a ** (1.0 / p))
    checks.append(_upper_check("knot_recursion", np.maximum(recursion, step_def), np.zeros(n), tol,
                               "x_{k+1} = x_k + s_k, s_k = (alpha_k eps)^(1/p)"))

    if n >= 2:
        ratio = (s[1:] / s[:-1]) ** p
        checks.append(_upper_check("step_ratio", ratio[: n - 1], np.full(n - 1, 2.0), tol))

    residuals = np.array([abs(model_stationarity_check(seq, k)) for k in range(n)])
    checks.append(_upper_check("model_stationarity", residuals, np.zeros(n), settings.STATIONARITY_TOL))

    # Step 1 continuation test at every knot before k_eps, termination at k_eps
    margins = []
    for k in range(n):
        p1, p2 = _phis(seq, k)
        margin = p1 - eps
        if q == 2:
            margin = max(margin, p2 - eps / 2.0)
        margins.append(margin)
    checks.append(_lower_check("termination_continue", margins, np.zeros(n), 0.0,
                               "phi_j >= eps_j / j for some j <= q, k < k_eps"))
    if not seq.truncated:
        p1, p2 = _phis(seq, n)
        final = max(p1 - eps, p2 - eps / 2.0) if q == 2 else p1 - eps
        checks.append(CheckResult(
            name="termination_stop", passed=final < 0.0, measured=final, bound=0.0, index=n,
            detail="phi_j < eps_j / j for all j <= q at k_eps",
        ))

    for d in discrepancies:
        logger.warning(f"paper_discrepancy [{d.check}] at k={d.iteration}: {d.message}")
    return VerificationReport(checks=checks, discrepancies=discrepancies, k_eps_expected=seq.k_eps)


def run_config(schedule: PerturbationSchedule, mode: Mode = "paper") -> AR2Config:
    """sigma0 = 2 with the keep policy; half-line steps in paper mode."""
    return AR2Config(
        q=schedule.q, eps1=schedule.eps, eps2=schedule.eps,
        sigma0=2.0, eta1=schedule.eta1,
        sigma_policy="keep",
        step_domain="nonnegative" if mode == "paper" else "full_line",
        max_iters=settings.MAX_ITERS_FACTOR * schedule.k_eps,
    )


def subproblem_audit(
    seq: ExampleSequences,
    schedule: PerturbationSchedule,
    domain: Literal["full_line", "nonnegative"],
) -> List[Discrepancy]:
    """
    Compares the exact model minimizer at every knot with the prescribed
    step s_k and records each departure.
    """
    found = []
    for k in range(seq.n_steps):
        model = ModelData(f0=seq.f0[k], g=seq.f1[k], h=seq.f2[k], sigma=seq.sigma)
        solution = minimize_model(model, domain)
        s_k = seq.s[k]
        if abs(solution.step - s_k) <= settings.TRAJECTORY_TOL * max(1.0, s_k):
            continue
        values: Dict[str, float] = {
            "minimizer": solution.step,
            "s_k": s_k,
            "model_at_minimizer": solution.model_value,
            "model_at_s_k": model.value_at(s_k),
            "model_gap": model.decrease_at(s_k) + solution.model_decrease,
            "m_s_k_minus_f0": model.decrease_at(s_k),
        }
        if seq.q == 2:
            # closed form of m(s_k) - f_k for q = 2
            a = schedule.alpha[k] * seq.eps
            values["closed_form_m_s_k_minus_f0"] = a ** 3 * (schedule.beta_q[k] / 2.0 - 1.0 / 6.0)
        found.append(Discrepancy(
            check=f"subproblem_{domain}", iteration=k,
            message=(
                f"the {domain} model minimizer is {solution.step:.6g}, not s_k={s_k:.6g}; "
                f"m(s_k) - m(min) = {values['model_gap']:.3e}"
            ),
            values=values,
        ))
    return found


def verify_run(
    interpolant: PiecewiseQuintic,
    schedule: PerturbationSchedule,
    config: Optional[AR2Config] = None,
    mode: Mode = "paper",
    seq: Optional[ExampleSequences] = None,
) -> VerificationReport:
    """
    Runs AR2 from x_0 = 0 and checks the iteration count, the trajectory,
    the ratio test, sigma and the evaluation counts.

    In strict mode, departures of the full-line minimizer from s_k are
    recorded as paper discrepancies and the run checks become informational.
    """
    if len(interpolant.segments) != schedule.k_eps or schedule.truncated:
        raise ValueError(
            f"interpolant has {len(interpolant.segments)} segments but the schedule needs k_eps={schedule.k_eps}"
        )
    seq = seq if seq is not None else build_sequences(schedule)
    config = config if config is not None else run_config(schedule, mode)
    k_eps = schedule.k_eps

    domain = "nonnegative" if mode == "paper" else "full_line"
    discrepancies = subproblem_audit(seq, schedule, domain)
    enforced = mode == "paper" or not discrepancies
    for d in discrepancies:
        logger.warning(f"paper_discrepancy [{d.check}] at k={d.iteration}: {d.message}")

    checks: List[CheckResult] = []
    try:
        trace = run_ar2(interpolant, seq.x[0], config)
        aborted = None
    except AR2Abort as e:
        trace = e.trace
        aborted = str(e)
    checks.append(CheckResult(name="run_completed", passed=aborted is None, enforced=enforced, detail=aborted))

    k_obs = trace.termination_index if trace.terminated_by == "criticality" else None
    checks.append(CheckResult(
        name="termination_count", passed=k_obs == k_eps,
        measured=float(trace.termination_index), bound=float(k_eps), enforced=enforced,
        detail=f"terminated_by={trace.terminated_by}",
    ))

    accepted_x = [r.x for r in trace.records if r.accepted] + [trace.final_x]
    m = min(len(accepted_x), len(seq.x))
    deviations = np.abs(np.asarray(accepted_x[:m]) - np.asarray(seq.x[:m]))
    max_dev = float(deviations.max()) if m else float("inf")
    trajectory = _upper_check("trajectory", deviations, np.zeros(m), settings.TRAJECTORY_TOL,
                              "|x_k observed - x_k prescribed|")
    if len(accepted_x) != len(seq.x):
        trajectory = trajectory.model_copy(update={"passed": False, "detail": "iterate count differs from knot count"})
    checks.append(trajectory.model_copy(update={"enforced": enforced}))

    rhos = [r.rho for r in trace.records]
    checks.append(_lower_check("all_successful", rhos, np.full(len(rhos), config.eta1), 0.0,
                               "rho_k >= eta1").model_copy(update={"enforced": enforced}))
    sigmas = [abs(r.sigma - config.sigma0) for r in trace.records]
    checks.append(_upper_check("sigma_constant", sigmas, np.zeros(len(sigmas)), settings.CHECK_SLACK)
                  .model_copy(update={"enforced": enforced}))

    K = trace.termination_index
    expected = (K + 1, K + 1, K + 1 if config.q == 2 else K)
    observed = trace.counters.as_tuple()
    checks.append(CheckResult(
        name="evaluation_counts", passed=observed == expected, enforced=enforced,
        detail=f"observed (value, deriv1, deriv2) = {observed}, expected {expected}",
    ))

    return VerificationReport(
        checks=checks, discrepancies=discrepancies,
        k_eps_expected=k_eps, k_eps_observed=k_obs, mode=mode,
        trajectory_max_deviation=max_dev, counters=trace.counters,
    )


def certify_example(
    seq: ExampleSequences,
    schedule: PerturbationSchedule,
    interpolant: PiecewiseQuintic,
    mode: Mode = "paper",
) -> VerificationReport:
    """Sequence checks and run checks on stored data, merged."""
    return verify_sequences(seq, schedule).merged_with(
        verify_run(interpolant, schedule, mode=mode, seq=seq)
    )


def certify(schedule: PerturbationSchedule, mode: Mode = "paper") -> VerificationReport:
    """Builds the example for one schedule and certifies it."""
    seq = build_sequences(schedule)
    return certify_example(seq, schedule, build_interpolant(seq), mode)


# --- Sampling experiment ---

def sample_seeds(seed: int, n_samples: int) -> List[int]:
    """Independent per-sample seeds derived from one base seed."""
    children = np.random.SeedSequence(seed).spawn(n_samples)
    return [int(child.generate_state(1)[0]) for child in children]


def certify_sample(index: int, seed: int, q: int, eps: float, constraints: SampleConstraints) -> SampleResult:
    schedule = random_schedule(
        q, eps, eta1=constraints.eta1, seed=seed,
        beta_q_max=constraints.resolved_beta_q_max(q),
        beta0_enabled=constraints.beta0_enabled,
    )
    report = certify(schedule, constraints.mode)
    return SampleResult(
        index=index, seed=seed, passed=report.passed,
        k_obs=report.k_eps_observed, max_dev=report.trajectory_max_deviation,
        failed_checks=report.failed_checks,
    )


def certify_sample_or_error(index: int, seed: int, q: int, eps: float, constraints: SampleConstraints) -> SampleResult:
    """Like certify_sample, but an exception is recorded in the result instead of raised."""
    try:
        return certify_sample(index, seed, q, eps, constraints)
    except Exception as e:
        logger.error(f"Sample {index} (seed={seed}) failed: {e}")
        return SampleResult(index=index, seed=seed, passed=False, error=str(e))


def _summarize(q: int, eps: float, seed: int, results: List[SampleResult]) -> SampleSummary:
    results = sorted(results, key=lambda r: r.index)
    histogram = Counter(name for r in results for name in r.failed_checks)
    histogram.update("error" for r in results if r.error)
    devs = np.array([r.max_dev for r in results if r.max_dev is not None and math.isfinite(r.max_dev)])
    stats = {}
    if devs.size:
        stats = {
            "min": float(devs.min()),
            "median": float(np.median(devs)),
            "p95": float(np.quantile(devs, 0.95)),
            "max": float(devs.max()),
        }
    return SampleSummary(
        q=q, eps=eps, seed=seed, n_samples=len(results),
        n_passed=sum(r.passed for r in results),
        failure_histogram=dict(sorted(histogram.items())),
        deviation_stats=stats, samples=results,
    )


def measure_experiment(
    q: int,
    eps: float,
    n_samples: int,
    seed: int,
    constraints: Optional[SampleConstraints] = None,
    backend: Optional[str] = None,
) -> SampleSummary:
    """
    Certifies n_samples random schedules and summarizes pass counts,
    failing checks and trajectory deviations. Samples run in-process or
    as Celery tasks; the summary is ordered by sample index either way.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    k_epsilon(q, eps)  # rejects bad (q, eps) before any sample runs
    constraints = constraints or SampleConstraints()
    backend = backend or settings.SAMPLE_BACKEND
    seeds = sample_seeds(seed, n_samples)
    logger.info(f"Sampling {n_samples} schedules (q={q}, eps={eps}, seed={seed}, backend={backend})")

    if backend == "local":
        results = [certify_sample_or_error(i, s, q, eps, constraints) for i, s in enumerate(seeds)]
    elif backend == "celery":
        from celery import group

        from ..tasks.sample_tasks import certify_sample_task

        job = group(
            certify_sample_task.s(i, s, q, eps, constraints.model_dump(mode="json"))
            for i, s in enumerate(seeds)
        )
        results = [SampleResult.model_validate(r) for r in job.apply_async().get()]
    else:
        raise ValueError(f"unknown sample backend {backend!r}")

    summary = _summarize(q, eps, seed, results)
    logger.info(f"Sampling done: pass {summary.n_passed}/{summary.n_samples}")
    return summary
