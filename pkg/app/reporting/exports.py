"""
File formats: trace and sample CSVs, JSON reports and example documents.
"""
import logging
import os
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..construction.hermite import PiecewiseQuintic
from ..schemas import ExampleDocument, ExampleMetadata, ExampleSequences, PerturbationSchedule, RunTrace, SampleSummary

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

TRACE_COLUMNS = ["k", "x", "f", "g", "h", "sigma", "step", "rho", "phi1", "phi2", "accepted"]


def _ensure_parent(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(model: BaseModel, path: PathLike) -> Path:
    path = _ensure_parent(path)
    path.write_text(model.model_dump_json(indent=2))
    logger.info(f"Wrote {path}")
    return path


# --- Traces ---

def trace_frame(trace: RunTrace) -> pd.DataFrame:
    rows = [r.model_dump() for r in trace.records]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def write_trace_csv(trace: RunTrace, path: PathLike) -> Path:
    """One row per iteration; an absent phi2 is written as an empty field."""
    path = _ensure_parent(path)
    trace_frame(trace).to_csv(path, index=False)
    logger.info(f"Wrote trace with {len(trace.records)} rows to {path}")
    return path


class RunReport(BaseModel):
    """Counters and termination metadata of one run."""
    termination_index: int
    terminated_by: str
    n_value: int
    n_deriv1: int
    n_deriv2: int
    final_x: float
    final_f: float
    final_phi1: float
    final_phi2: Optional[float] = None

    @classmethod
    def from_trace(cls, trace: RunTrace) -> "RunReport":
        return cls(
            termination_index=trace.termination_index,
            terminated_by=trace.terminated_by,
            n_value=trace.counters.n_value,
            n_deriv1=trace.counters.n_deriv1,
            n_deriv2=trace.counters.n_deriv2,
            final_x=trace.final_x,
            final_f=trace.final_f,
            final_phi1=trace.final_phi1,
            final_phi2=trace.final_phi2,
        )


# --- Sampling experiment ---

def write_samples_csv(summary: SampleSummary, path: PathLike) -> Path:
    path = _ensure_parent(path)
    frame = pd.DataFrame(
        [(r.seed, r.passed, r.k_obs, r.max_dev) for r in summary.samples],
        columns=["seed", "pass", "k_obs", "max_dev"],
    )
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} sample rows to {path}")
    return path


# --- Example documents ---

def make_document(schedule: PerturbationSchedule, seq: ExampleSequences, interpolant: PiecewiseQuintic) -> ExampleDocument:
    return ExampleDocument(
        metadata=ExampleMetadata(q=schedule.q, eps=schedule.eps, k_eps=schedule.k_eps, kind=schedule.kind, seed=schedule.seed),
        schedule=schedule,
        sequences=seq,
        interpolant=interpolant.model,
    )


def load_document(path: PathLike) -> ExampleDocument:
    """
    Reads an example document. A missing or malformed file is a ValueError.
    """
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ValueError(f"example file not found: {path}")
    return ExampleDocument.model_validate_json(text)


# --- Dense samples of an interpolant ---

def dense_grid(knots, points_per_segment: int) -> np.ndarray:
    """points_per_segment points on each knot interval, shared endpoints once."""
    pieces = [
        np.linspace(a, b, points_per_segment, endpoint=False)
        for a, b in zip(knots[:-1], knots[1:])
    ]
    return np.concatenate(pieces + [np.asarray(knots[-1:], dtype=float)])


def dense_frame(interpolant: PiecewiseQuintic, points_per_segment: int = 200) -> pd.DataFrame:
    xs = dense_grid(interpolant.model.knots, points_per_segment)
    f, f1, f2 = interpolant.sample(xs)
    return pd.DataFrame({"x": xs, "f": f, "f1": f1, "f2": f2})


def write_dense_csv(interpolant: PiecewiseQuintic, path: PathLike, points_per_segment: int = 200) -> Path:
    path = _ensure_parent(path)
    dense_frame(interpolant, points_per_segment).to_csv(path, index=False)
    logger.info(f"Wrote dense samples to {path}")
    return path
