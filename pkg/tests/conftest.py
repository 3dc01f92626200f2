import pytest

from app.construction.hermite import build_interpolant
from app.construction.slow_example import build_sequences, default_schedule


@pytest.fixture
def unperturbed_q1():
    """q = 1, eps = 1/4, alpha = 1: k_eps = 8 steps of length 1/2."""
    schedule = default_schedule(1, 0.25)
    seq = build_sequences(schedule)
    return schedule, seq, build_interpolant(seq)


@pytest.fixture
def book_q2():
    schedule = default_schedule(2, 0.25, kind="book")
    seq = build_sequences(schedule)
    return schedule, seq, build_interpolant(seq)
