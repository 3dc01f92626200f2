import pytest

from app.construction.hermite import build_interpolant
from app.construction.slow_example import build_sequences, default_schedule, random_schedule
from app.schemas import PerturbationSchedule, SampleConstraints
from app.verification import harness
from app.verification.harness import (
    certify,
    measure_experiment,
    sample_seeds,
    subproblem_audit,
    verify_run,
    verify_sequences,
)


def _beta_half_q2():
    return PerturbationSchedule(
        q=2, eps=0.25, k_eps=64,
        alpha=[1.0] * 64 + [0.0], beta_q=[0.5] * 64 + [0.0], beta0=[0.0] * 65,
    )


def test_unperturbed_sequences_pass(unperturbed_q1):
    schedule, seq, _ = unperturbed_q1
    report = verify_sequences(seq, schedule)
    assert report.passed, report.failed_checks
    assert report.check("model_stationarity").passed


def test_book_q2_sequences_pass(book_q2):
    schedule, seq, _ = book_q2
    assert verify_sequences(seq, schedule).passed


def test_corrupted_value_fails_monotonicity(unperturbed_q1):
    schedule, seq, _ = unperturbed_q1
    f0 = list(seq.f0)
    f0[5] += 1.0
    report = verify_sequences(seq.model_copy(update={"f0": f0}), schedule)
    assert not report.passed
    assert "monotone_decrease" in report.failed_checks
    assert report.check("monotone_decrease").index == 4


# Each case corrupts one entry of the q = 1, eps = 1/4 example. Some quantities feed
# several conditions, so the expected set lists every check they couple to:
# f1 and f2 at an interior knot also enter the model stationarity residual, a
# large f0 change breaks the value bounds and both neighbouring drops.
FAULTS = [
    ("f0", 5, 1.0, {"monotone_decrease", "obj_bound_upper", "f0_cond", "drop_lower", "drop_upper", "fkj_bound"}),
    ("f0", 5, 0.05, {"f0_cond", "drop_lower"}),
    ("f1", 3, 0.05, {"model_stationarity", "termination_continue"}),
    ("f1", 8, -0.3, {"termination_stop"}),
    ("f2", 3, 1.0, {"model_stationarity"}),
    ("f2", 3, 3.0, {"model_stationarity", "diffall_second"}),
    ("x", 4, 0.1, {"knot_recursion"}),
    ("taylor", 2, -0.05, {"f0_cond"}),
]


@pytest.mark.parametrize("field, index, delta, expected", FAULTS)
def test_single_fault_fails_matching_checks(unperturbed_q1, field, index, delta, expected):
    schedule, seq, _ = unperturbed_q1
    values = list(getattr(seq, field))
    values[index] += delta
    report = verify_sequences(seq.model_copy(update={field: values}), schedule)
    assert set(report.failed_checks) == expected


def test_unperturbed_run_passes(unperturbed_q1):
    schedule, seq, interpolant = unperturbed_q1
    report = verify_run(interpolant, schedule, seq=seq)
    assert report.passed, report.failed_checks
    assert report.k_eps_observed == 8
    assert report.trajectory_max_deviation < 1e-10
    assert report.counters.as_tuple() == (9, 9, 8)


def test_book_q1_run_passes():
    report = certify(default_schedule(1, 0.1, kind="book"))
    assert report.passed, report.failed_checks
    assert report.k_eps_observed == 32
    assert not any(d.check == "xkinter" for d in report.discrepancies)


def test_book_q1_large_steps_pass_half_k_eps():
    # sum of sqrt(alpha_k / 4) is about 4.98 > k_eps / 2 = 4; recorded, not failed
    report = certify(default_schedule(1, 0.25, kind="book"))
    assert report.passed, report.failed_checks
    assert report.check("xkinter").passed
    assert any(d.check == "xkinter" for d in report.discrepancies)


def test_book_q2_certified(book_q2):
    schedule, seq, interpolant = book_q2
    report = verify_sequences(seq, schedule).merged_with(verify_run(interpolant, schedule, seq=seq))
    assert report.passed, report.failed_checks
    assert report.k_eps_observed == 64
    assert report.counters.as_tuple() == (65, 65, 65)


@pytest.mark.parametrize("q, eps, k_eps", [(1, 0.05, 90), (2, 0.2, 125)])
def test_unperturbed_acceptance(q, eps, k_eps):
    report = certify(default_schedule(q, eps))
    assert report.passed, report.failed_checks
    assert report.k_eps_observed == k_eps


def test_mismatched_interpolant_rejected(unperturbed_q1):
    _, _, interpolant = unperturbed_q1
    with pytest.raises(ValueError):
        verify_run(interpolant, default_schedule(1, 0.1))


def test_strict_mode_flags_q2_negative_minimizer():
    schedule = _beta_half_q2()
    seq = build_sequences(schedule)
    report = verify_run(build_interpolant(seq), schedule, mode="strict", seq=seq)
    found = [d for d in report.discrepancies if d.check == "subproblem_full_line"]
    assert found and found[0].iteration == 0
    values = found[0].values
    assert values["minimizer"] < 0.0
    assert values["model_gap"] > 0.0
    assert values["closed_form_m_s_k_minus_f0"] == pytest.approx(0.25 ** 3 * (0.25 - 1.0 / 6.0))
    assert values["m_s_k_minus_f0"] == pytest.approx(values["closed_form_m_s_k_minus_f0"], rel=1e-12)
    # Run checks are informational once a departure is recorded
    assert all(not c.enforced for c in report.checks)
    assert report.passed


def test_paper_mode_q2_beta_half_stalls_at_origin():
    schedule = _beta_half_q2()
    seq = build_sequences(schedule)
    assert subproblem_audit(seq, schedule, "nonnegative")[0].values["minimizer"] == 0.0
    report = verify_run(build_interpolant(seq), schedule, seq=seq)
    assert not report.passed
    assert "run_completed" in report.failed_checks


# --- Sampling experiment ---

def test_sample_seeds_are_reproducible():
    assert sample_seeds(7, 5) == sample_seeds(7, 5)
    assert len(set(sample_seeds(7, 100))) == 100


def test_single_sample_is_reproducible():
    a = measure_experiment(1, 0.25, 1, seed=3)
    b = measure_experiment(1, 0.25, 1, seed=3)
    assert a == b


def test_random_q1_samples_pass():
    summary = measure_experiment(1, 0.25, 100, seed=7)
    assert summary.n_passed == 100
    assert summary.failure_histogram == {}
    assert summary.deviation_stats["max"] < 1e-8


@pytest.mark.parametrize("eps", [0.25, 0.1, 0.05])
@pytest.mark.parametrize("seed", range(20))
def test_full_range_random_schedules_certify(eps, seed):
    report = certify(random_schedule(1, eps, seed=seed, beta_q_max=0.5, beta0_enabled=True))
    assert report.passed, report.failed_checks
    assert report.k_eps_observed == report.k_eps_expected


@pytest.mark.slow
def test_random_q1_samples_with_value_perturbations_pass():
    summary = measure_experiment(1, 0.1, 100, seed=11, constraints=SampleConstraints(beta0_enabled=True))
    assert summary.n_passed == 100, summary.failure_histogram


def test_q2_samples_default_to_unperturbed_hessian():
    summary = measure_experiment(2, 0.25, 3, seed=5)
    assert summary.n_passed == 3


def test_random_schedule_certifies_with_perturbations():
    assert certify(random_schedule(1, 0.25, seed=21, beta0_enabled=True)).passed


def test_rejects_empty_experiment():
    with pytest.raises(ValueError):
        measure_experiment(1, 0.25, 0, seed=1)


def test_rejects_bad_accuracy_before_sampling():
    with pytest.raises(ValueError):
        measure_experiment(1, 0.3, 5, seed=1)


def test_local_sample_errors_are_recorded(monkeypatch):
    real = harness.certify_sample

    def flaky(index, seed, q, eps, constraints):
        if index == 1:
            raise RuntimeError("worker lost")
        return real(index, seed, q, eps, constraints)

    monkeypatch.setattr(harness, "certify_sample", flaky)
    summary = measure_experiment(1, 0.25, 3, seed=2, backend="local")
    assert summary.n_samples == 3
    assert summary.n_passed == 2
    assert summary.failure_histogram == {"error": 1}
    failed = summary.samples[1]
    assert not failed.passed
    assert failed.error == "worker lost"
