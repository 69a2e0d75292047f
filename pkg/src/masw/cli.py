"""Command-line interface.

Exit codes: 0 success, 1 computation failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from . import bench, io
from .batched import DEFAULT_MEMORY_BUDGET, MemoryBudgetExceeded
from .dispersion import NoSignChange
from .engines import compute_curve, evaluate
from .io import EngineConfig, FormatError
from .model import DEFAULT_SWEEP, DispersionCurve, ModelValidationError, SweepError, VelocitySweep
from .parallel import PartitionStrategy
from .stiffness import TermsCache

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _add_sweep(p):
    p.add_argument("--vmin", type=float, default=DEFAULT_SWEEP.v_min, help="lowest test velocity, m/s")
    p.add_argument("--vmax", type=float, default=DEFAULT_SWEEP.v_max, help="highest test velocity, m/s")
    p.add_argument("--vstep", type=float, default=DEFAULT_SWEEP.v_step, help="test velocity step, m/s")


def _add_engine(p, default=None):
    p.add_argument("--engine", choices=("serial", "parallel", "batched"), default=default)
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("--strategy", choices=[s.value for s in PartitionStrategy], default=None)
    p.add_argument("--block-size", type=_positive_int, default=None)
    p.add_argument("--memory-budget", type=_positive_int, default=DEFAULT_MEMORY_BUDGET,
                   help="bytes available to the batched engine (default 2 GiB)")
    p.add_argument("--deterministic", action="store_true",
                   help="omit timing information so outputs are byte-identical across runs")


def _engine_from_args(args, base: EngineConfig | None = None) -> EngineConfig:
    base = base or EngineConfig()
    return EngineConfig(
        kind=args.engine or base.kind,
        workers=args.workers or base.workers,
        strategy=PartitionStrategy.parse(args.strategy) if args.strategy else base.strategy,
        block_size=args.block_size or base.block_size,
    )


def _sweep_from_args(args) -> VelocitySweep:
    sweep = VelocitySweep(args.vmin, args.vmax, args.vstep)
    sweep.materialize()
    return sweep


def cmd_curve(args) -> int:
    model = io.read_model(args.model)
    if (args.wavelengths is None) == (args.curve is None):
        raise UsageError("give exactly one of --wavelengths or --curve")
    if args.curve is not None:
        experimental = io.read_curve(args.curve, require_velocities=False)
    else:
        experimental = DispersionCurve(args.wavelengths)
        if not experimental.wavelengths or any(not w > 0 for w in experimental.wavelengths):
            raise UsageError("--wavelengths must be positive numbers")
    sweep = _sweep_from_args(args)
    engine = _engine_from_args(args)

    t0 = time.perf_counter()
    if experimental.velocities:
        result = evaluate(engine, model, experimental, sweep, memory_budget=args.memory_budget)
        curve = result.curve
        summary = (f"misfit {result.misfit:.6g} ({100 * result.misfit:.4f} %), "
                   f"{result.determinants_computed} determinants")
    else:
        curve = compute_curve(engine, model, experimental.wavelengths, sweep,
                              memory_budget=args.memory_budget)
        summary = f"{len(curve)} wavelengths"
    elapsed = time.perf_counter() - t0
    footer = None if args.deterministic else f"elapsed_seconds={elapsed:.6f}"
    text = io.format_curve(curve, footer)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(summary, file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_invert(args) -> int:
    spec = io.read_inversion_spec(args.spec)
    experimental = io.read_curve(spec.experimental_curve)
    engine = _engine_from_args(args, spec.engine)
    sweep = spec.sweep
    sweep.materialize()
    cache = TermsCache()

    rows = []
    for cid, model in enumerate(spec.candidates):
        t0 = time.perf_counter()
        try:
            res = evaluate(engine, model, experimental, sweep, cache, args.memory_budget)
        except NoSignChange as exc:
            rows.append((cid, None, None, time.perf_counter() - t0, str(exc)))
            continue
        rows.append((cid, res.misfit, res.determinants_computed, time.perf_counter() - t0, ""))

    ok = [r for r in rows if r[1] is not None]
    best = min(ok, key=lambda r: (r[1], r[0]))[0] if ok else None

    lines = ["id,misfit,misfit_percent,dets,seconds"]
    for cid, m, dets, secs, _ in rows:
        t = "-" if args.deterministic else f"{secs:.6f}"
        if m is None:
            lines.append(f"{cid},unavailable,unavailable,-,{t}")
        else:
            lines.append(f"{cid},{io.fmt(m)},{100 * m:.6f},{dets},{t}")
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    if args.output:
        Path(args.output).write_text(table, encoding="utf-8")
    for cid, m, _, _, err in rows:
        if m is None:
            print(f"candidate {cid}: {err}", file=sys.stderr)
    if best is None:
        print("no candidate produced a complete dispersion curve", file=sys.stderr)
        return EXIT_FAILURE
    print(f"best candidate: {best} (misfit {rows[best][1]:.6g})", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.length is not None and args.length < 1:
        raise UsageError(f"--length must be >= 1, got {args.length}")
    if args.dataset == "uniform":
        if args.tier not in io.TIERS:
            raise UsageError(f"--tier must be one of {io.TIERS}")
        curve = io.gen_uniform(1000 if args.length is None else args.length, args.tier)
    else:
        curve = io.gen_variable(io.VARIABLE_LENGTH if args.length is None else args.length)
    text = io.format_curve(curve)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.model_out:
        io.write_model(args.model_out, io.reference_model())
    return EXIT_OK


def cmd_bench(args) -> int:
    mode = args.mode
    if mode == "elimination":
        text = bench.elimination_to_csv(bench.bench_elimination(args.orders, args.reps))
    else:
        if mode == "strong":
            curve = bench.dataset(args.dataset, args.length)
            records = bench.bench_strong(curve, args.workers, args.strategy, args.reps,
                                         dataset_name=args.dataset)
        elif mode == "weak":
            records = bench.bench_weak(args.base_length, args.workers, args.reps,
                                       strategy=args.strategy)
        elif mode == "engines":
            curve = bench.dataset(args.dataset, args.length)
            records = bench.bench_batched(curve, args.block_sizes, args.reps, args.dataset)
        else:
            curve = bench.dataset(args.dataset, args.length)
            records = bench.bench_backends(curve, args.reps, args.dataset)
        text = bench.records_to_csv(records)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="theoretical dispersion curve for one model")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--wavelengths", type=_float_list, help="comma-separated wavelengths, m")
    p.add_argument("--curve", help="curve CSV; its wavelengths are used and, if present, "
                                   "its velocities give the misfit")
    p.add_argument("-o", "--output", help="output curve CSV (default stdout)")
    _add_sweep(p)
    _add_engine(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("invert", help="rank candidate models by misfit")
    p.add_argument("spec", help="inversion spec JSON")
    p.add_argument("-o", "--output", help="also write the report CSV here")
    _add_engine(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("gen", help="generate the uniform or variable dataset")
    p.add_argument("--dataset", choices=("uniform", "variable"), required=True)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--tier", type=int, default=238, help="uniform target velocity: 72, 238 or 256")
    p.add_argument("-o", "--output")
    p.add_argument("--model-out", help="also write the bundled reference model here")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="scaling and kernel benchmarks (CSV)")
    p.add_argument("mode", choices=("strong", "weak", "elimination", "engines", "backends"))
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--dataset", choices=("uniform", "variable"), default="uniform")
    p.add_argument("--strategy", choices=[s.value for s in PartitionStrategy], default="modular")
    p.add_argument("--length", type=_positive_int, default=None)
    p.add_argument("--base-length", type=_positive_int, default=1000)
    p.add_argument("--block-sizes", type=_int_list, default=[2, 16, 256])
    p.add_argument("--orders", type=_int_list, default=[4, 14, 30, 62])
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (FormatError, ModelValidationError, SweepError, MemoryBudgetExceeded, ValueError) as exc:
        print(f"masw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoSignChange as exc:
        print(f"masw: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
