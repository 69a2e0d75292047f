"""Desk-scale scaling experiments.

Every timed run is checked against the serial engine before its timing is
kept. Timings are medians over ``reps`` runs after one discarded warm-up.
"""
from __future__ import annotations

import csv
import io as _io
import statistics
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import kernels
from .batched import batched_evaluate
from .dispersion import evaluate_model
from .io import gen_uniform, gen_variable, reference_model, reference_sweep
from .model import DispersionCurve, LayeredEarthModel, VelocitySweep
from .parallel import PartitionStrategy, parallel_evaluate
from .stiffness import BandedStiffnessMatrix, dense_determinant_flops

CSV_COLUMNS = ("experiment", "engine", "dataset", "workers", "strategy", "block_size",
               "length", "reps", "median_seconds", "dets", "speedup")


class BenchMismatch(AssertionError):
    """A benchmarked run disagreed with the serial engine."""


@dataclass
class BenchRecord:
    experiment: str
    engine: str
    dataset: str
    workers: int
    strategy: str
    block_size: int
    length: int
    reps: int
    median_seconds: float
    dets: int
    speedup: float = 1.0


def dataset(name: str, length: int | None = None, tier: int = 238) -> DispersionCurve:
    if name == "uniform":
        return gen_uniform(1000 if length is None else length, tier)
    if name == "variable":
        return gen_variable(40 if length is None else length)
    raise ValueError(f"unknown dataset {name!r}; choose 'uniform' or 'variable'")


def time_median(fn, reps: int) -> tuple[float, object]:
    result = fn()  # warm-up, discarded
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def _checked(result, oracle):
    if result.curve != oracle.curve or result.misfit != oracle.misfit:
        raise BenchMismatch("engine result differs from the serial engine")
    return result


def bench_strong(curve: DispersionCurve, worker_counts, strategy=PartitionStrategy.MODULAR,
                 reps: int = 5, model: LayeredEarthModel | None = None,
                 sweep: VelocitySweep | None = None, dataset_name: str = "custom",
                 experiment: str = "strong") -> list[BenchRecord]:
    """Parallel engine timings for a fixed curve; speedup is t(1)/t(s)."""
    if reps < 3:
        raise ValueError("reps must be >= 3")
    model = model or reference_model()
    sweep = sweep or reference_sweep()
    strategy = PartitionStrategy.parse(strategy)
    oracle = evaluate_model(model, curve, sweep)
    counts = sorted(set(int(s) for s in worker_counts) | {1})
    timings = {}
    for s in counts:
        t, res = time_median(lambda: parallel_evaluate(model, curve, sweep, s, strategy), reps)
        _checked(res, oracle)
        timings[s] = (t, res.determinants_computed)
    base = timings[1][0]
    return [BenchRecord(experiment, "parallel", dataset_name, s, strategy.value, 0, len(curve),
                        reps, timings[s][0], timings[s][1], base / timings[s][0])
            for s in sorted(set(int(s) for s in worker_counts))]


def bench_weak(base_length: int, worker_counts, reps: int = 5, tier: int = 238,
               strategy=PartitionStrategy.MODULAR) -> list[BenchRecord]:
    """Uniform data of length ``base_length * s`` on ``s`` workers.

    ``speedup`` holds t(1)/t(s), which is 1 for perfect weak scaling.
    """
    if reps < 3:
        raise ValueError("reps must be >= 3")
    model, sweep = reference_model(), reference_sweep()
    strategy = PartitionStrategy.parse(strategy)
    records = []
    base = None
    for s in sorted(set(int(s) for s in worker_counts) | {1}):
        curve = gen_uniform(base_length * s, tier)
        oracle = evaluate_model(model, curve, sweep)
        t, res = time_median(lambda: parallel_evaluate(model, curve, sweep, s, strategy), reps)
        _checked(res, oracle)
        if s == 1:
            base = t
        records.append(BenchRecord("weak", "parallel", "uniform", s, strategy.value, 0, len(curve),
                                   reps, t, res.determinants_computed, base / t))
    wanted = set(int(s) for s in worker_counts)
    return [r for r in records if r.workers in wanted]


def bench_batched(curve: DispersionCurve, block_sizes, reps: int = 5,
                  dataset_name: str = "custom") -> list[BenchRecord]:
    model, sweep = reference_model(), reference_sweep()
    oracle_t, oracle = time_median(lambda: evaluate_model(model, curve, sweep), reps)
    records = [BenchRecord("engines", "serial", dataset_name, 1, "", 0, len(curve), reps,
                           oracle_t, oracle.determinants_computed, 1.0)]
    for bs in block_sizes:
        t, res = time_median(lambda: batched_evaluate(model, curve, sweep, block_size=bs), reps)
        _checked(res, oracle)
        records.append(BenchRecord("engines", "batched", dataset_name, 1, "", bs, len(curve), reps,
                                   t, res.determinants_computed, oracle_t / t))
    return records


def random_band_matrix(order: int, rng) -> BandedStiffnessMatrix:
    bands = rng.standard_normal((order, 7)) + 1j * rng.standard_normal((order, 7))
    bands[:, 3] += 4.0
    for i in range(order):
        for d in range(7):
            if not 0 <= i + d - 3 < order:
                bands[i, d] = 0
    return BandedStiffnessMatrix(order, bands)


def bench_elimination(orders=(4, 14, 30, 62), reps: int = 5, backend=None,
                      batch: int = 200, seed: int = 0) -> list[dict]:
    """Banded versus dense-pivoting determinant time on the same backend.

    Returns one row per order with median times per matrix, their ratio
    (dense / banded), and the flop-count ratio.
    """
    be = backend or kernels.backend
    rng = np.random.default_rng(seed)
    rows = []
    for order in orders:
        mats = [random_band_matrix(order, rng) for _ in range(batch)]
        dense = [m.to_dense() for m in mats]
        t_band, _ = time_median(lambda: [be.band_det(m.bands) for m in mats], reps)
        t_dense, _ = time_median(lambda: [be.dense_det(d) for d in dense], reps)
        banded_flops = sum(1 + min(3, order - k - 1) * (1 + min(3, order - k - 1)) for k in range(order))
        rows.append({
            "order": order,
            "backend": be.NAME,
            "banded_seconds": t_band / batch,
            "dense_seconds": t_dense / batch,
            "ratio": t_dense / t_band,
            "flop_ratio": dense_determinant_flops(order) / banded_flops,
        })
    return rows


def bench_backends(curve: DispersionCurve, reps: int = 3, dataset_name: str = "custom") -> list[BenchRecord]:
    """Serial engine on the compiled kernels versus the pure-Python fallback."""
    model, sweep = reference_model(), reference_sweep()
    out = []
    reference = None
    times = {}
    for name in ("compiled", "python"):
        try:
            be = kernels.get_backend(name)
        except ImportError:
            continue
        t, res = time_median(lambda: evaluate_model(model, curve, sweep, backend=be), reps)
        if reference is None:
            reference = res
        else:
            _checked(res, reference)
        times[name] = (t, res.determinants_computed)
    slowest = max(t for t, _ in times.values())
    for name, (t, dets) in times.items():
        out.append(BenchRecord("backends", f"serial-{name}", dataset_name, 1, "", 0, len(curve),
                               reps, t, dets, slowest / t))
    return out


def records_to_csv(records) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        row = asdict(r)
        writer.writerow([format(row[c], ".6g") if isinstance(row[c], float) else row[c]
                         for c in CSV_COLUMNS])
    return buf.getvalue()


def elimination_to_csv(rows) -> str:
    buf = _io.StringIO()
    cols = ["order", "backend", "banded_seconds", "dense_seconds", "ratio", "flop_ratio"]
    writer = csv.DictWriter(buf, cols, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: format(v, ".6g") if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()
