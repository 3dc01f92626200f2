"""
Command-line entry point: python -m app.main {generate,run,verify,sample,plot}

Exit codes: 0 pass, 1 verification failure, 2 bad input, 3 I/O error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .construction.hermite import PiecewiseQuintic, build_interpolant
from .construction.slow_example import build_sequences, default_schedule, kappa_f, random_schedule
from .core.config import settings
from .numerics.ar2 import AR2Abort, run_ar2
from .plotting.figures import PRESETS, write_figure
from .reporting.exports import RunReport, load_document, make_document, write_dense_csv, write_json, write_samples_csv, write_trace_csv
from .schemas import SampleConstraints
from .verification.harness import certify_example, measure_experiment, run_config, subproblem_audit

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_IO_ERROR = 3


# --- Subcommands ---

def cmd_generate(args: argparse.Namespace) -> int:
    if args.schedule == "random":
        schedule = random_schedule(
            args.q, args.eps, seed=args.seed,
            beta_q_max=args.beta_q_max if args.beta_q_max is not None else (0.5 if args.q == 1 else 0.0),
            beta0_enabled=args.beta0,
        )
    else:
        if args.beta0 or args.beta_q_max is not None:
            raise ValueError("--beta0 and --beta-q-max apply to --schedule random only")
        schedule = default_schedule(args.q, args.eps, kind=args.schedule)

    seq = build_sequences(schedule)
    interpolant = build_interpolant(seq)
    write_json(make_document(schedule, seq, interpolant), args.out)
    if args.dense:
        write_dense_csv(interpolant, args.dense)

    kappa, kappa_closed_form = kappa_f(args.q)
    print(f"k_eps={schedule.k_eps}")
    print(f"kappa_f={kappa:g} (closed form {kappa_closed_form:g})")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    doc = load_document(args.example)
    interpolant = PiecewiseQuintic(doc.interpolant)
    config = run_config(doc.schedule, args.mode)

    if args.mode == "strict":
        for d in subproblem_audit(doc.sequences, doc.schedule, "full_line"):
            print(f"warning: paper_discrepancy at iteration {d.iteration}: {d.message}", file=sys.stderr)

    try:
        trace = run_ar2(interpolant, doc.sequences.x[0], config)
        status = EXIT_OK
    except AR2Abort as e:
        print(f"aborted: {e}", file=sys.stderr)
        trace = e.trace
        status = EXIT_FAILED

    if args.trace:
        write_trace_csv(trace, args.trace)
        write_json(RunReport.from_trace(trace), Path(args.trace).with_suffix(".json"))

    n_value, n_deriv1, n_deriv2 = trace.counters.as_tuple()
    print(f"terminated k={trace.termination_index} ({trace.terminated_by})")
    print(f"evaluations: f={n_value} f'={n_deriv1} f''={n_deriv2}")
    return status


def cmd_verify(args: argparse.Namespace) -> int:
    doc = load_document(args.example)
    interpolant = PiecewiseQuintic(doc.interpolant)
    report = certify_example(doc.sequences, doc.schedule, interpolant, "strict" if args.strict else "paper")

    if args.report:
        write_json(report, args.report)
    else:
        print(report.model_dump_json(indent=2))
    for name in report.failed_checks:
        print(f"FAILED: {name}", file=sys.stderr)
    print(f"{'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks, {len(report.discrepancies)} discrepancies)", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_sample(args: argparse.Namespace) -> int:
    constraints = SampleConstraints(beta_q_max=args.beta_q_max, beta0_enabled=args.beta0)
    summary = measure_experiment(args.q, args.eps, args.n, args.seed, constraints, backend=args.backend)

    if args.out:
        write_json(summary, Path(f"{args.out}.json"))
        write_samples_csv(summary, Path(f"{args.out}.csv"))
    print(f"pass {summary.n_passed}/{summary.n_samples}")
    for name, count in summary.failure_histogram.items():
        print(f"  {name}: {count}")
    return EXIT_OK if summary.n_passed == summary.n_samples else EXIT_FAILED


def cmd_plot(args: argparse.Namespace) -> int:
    for path in write_figure(args.out, args.q, args.eps, args.iters, args.preset):
        print(path)
    return EXIT_OK


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ar2-slow", description="Slow-convergence examples for adaptive cubic regularization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="Build an example and write it as JSON")
    p.add_argument("--q", type=int, choices=[1, 2], required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--schedule", choices=["book", "unperturbed", "random"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta-q-max", type=float, default=None)
    p.add_argument("--beta0", action="store_true", help="Draw the function value perturbations too")
    p.add_argument("--out", required=True)
    p.add_argument("--dense", default=None, help="Also write x,f,f1,f2 samples to this CSV")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("run", help="Run AR2 on a stored example")
    p.add_argument("--example", required=True)
    p.add_argument("--mode", choices=["paper", "strict"], default="paper")
    p.add_argument("--trace", default=None)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("verify", help="Check a stored example")
    p.add_argument("--example", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--report", default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sample", help="Certify randomly perturbed examples")
    p.add_argument("--q", type=int, choices=[1, 2], required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--beta0", action="store_true")
    p.add_argument("--beta-q-max", type=float, default=None)
    p.add_argument("--out", default=None, help="Prefix for the .json summary and .csv rows")
    p.add_argument("--backend", choices=["local", "celery"], default=None)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("plot", help="Write the slow-convergence figure")
    p.add_argument("--q", type=int, choices=[1, 2], required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), default="fig1")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_plot)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=settings.LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
