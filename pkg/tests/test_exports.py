import pytest

from app.numerics.ar2 import run_ar2
from app.reporting.exports import RunReport, dense_grid, load_document, make_document, trace_frame, write_json
from app.verification.harness import run_config


def test_trace_frame_columns(unperturbed_q1):
    schedule, _, interpolant = unperturbed_q1
    trace = run_ar2(interpolant, 0.0, run_config(schedule))
    frame = trace_frame(trace)
    assert list(frame["k"]) == list(range(8))
    assert frame["accepted"].all()
    report = RunReport.from_trace(trace)
    assert (report.n_value, report.n_deriv1, report.n_deriv2) == (9, 9, 8)


def test_document_round_trip(unperturbed_q1, tmp_path):
    schedule, seq, interpolant = unperturbed_q1
    path = write_json(make_document(schedule, seq, interpolant), tmp_path / "doc" / "e.json")
    doc = load_document(path)
    assert doc.schedule == schedule
    assert doc.sequences == seq
    assert doc.metadata.k_eps == 8


def test_load_document_missing(tmp_path):
    with pytest.raises(ValueError):
        load_document(tmp_path / "absent.json")


def test_dense_grid_shares_endpoints():
    xs = dense_grid([0.0, 1.0, 3.0], 4)
    assert list(xs) == [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0]
