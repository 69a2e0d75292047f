"""Partitioned multi-worker engine.

Wavelengths are split statically across ``s`` workers. Workers share the
read-only scan inputs, write disjoint slots of the output arrays, and meet
once at the end, where per-worker relative errors are reduced in worker
order. The partition itself carries no threading assumptions, so a
message-passing backend could consume it unchanged.
"""
from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dispersion import CurveResult, NoSignChange, ScanSetup, combine_errors, relative_errors
from .model import DispersionCurve, LayeredEarthModel, VelocitySweep, check_curve


class PartitionStrategy(enum.Enum):
    CONTIGUOUS = "contiguous"
    MODULAR = "modular"

    @classmethod
    def parse(cls, value) -> "PartitionStrategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown partition strategy {value!r}; "
                             f"choose from {[s.value for s in cls]}") from None


@dataclass(frozen=True)
class Partition:
    assignments: tuple[tuple[int, ...], ...]
    workers: int
    total: int
    strategy: PartitionStrategy

    def sizes(self) -> list[int]:
        return [len(a) for a in self.assignments]


def partition_wavelengths(total: int, workers: int, strategy=PartitionStrategy.MODULAR) -> Partition:
    """Assign wavelength indices ``0..total-1`` to ``workers`` workers.

    Contiguous gives each worker one run of indices, earlier workers taking
    the extra element; modular gives worker k every index congruent to k.
    """
    strategy = PartitionStrategy.parse(strategy)
    if total < 1:
        raise ValueError(f"need at least one wavelength, got {total}")
    if workers < 1:
        raise ValueError(f"need at least one worker, got {workers}")
    if strategy is PartitionStrategy.MODULAR:
        parts = tuple(tuple(range(k, total, workers)) for k in range(workers))
    else:
        base, extra = divmod(total, workers)
        parts, start = [], 0
        for k in range(workers):
            size = base + (1 if k < extra else 0)
            parts.append(tuple(range(start, start + size)))
            start += size
        parts = tuple(parts)
    return Partition(parts, workers, total, strategy)


@dataclass(frozen=True)
class WorkerStats:
    worker: int
    wavelengths: int
    determinants: int
    seconds: float


@dataclass(frozen=True)
class ParallelResult(CurveResult):
    workers: tuple[WorkerStats, ...] = ()
    partition: Partition | None = None


def _run(setup: ScanSetup, partition: Partition, backend=None):
    out_n, out_count = setup.outputs()
    seconds = [0.0] * partition.workers

    def work(k):
        t0 = time.perf_counter()
        setup.scan(partition.assignments[k], out_n, out_count, backend)
        seconds[k] = time.perf_counter() - t0

    if partition.workers == 1:
        work(0)
    else:
        with ThreadPoolExecutor(max_workers=partition.workers) as pool:
            for f in [pool.submit(work, k) for k in range(partition.workers)]:
                f.result()
    return out_n, out_count, seconds


def parallel_evaluate(model: LayeredEarthModel, experimental: DispersionCurve, sweep: VelocitySweep,
                      workers: int = 1, strategy=PartitionStrategy.MODULAR, cache=None,
                      backend=None) -> ParallelResult:
    check_curve(experimental)
    setup = ScanSetup(model, experimental.wavelengths, sweep, cache)
    partition = partition_wavelengths(len(setup), workers, strategy)
    out_n, out_count, seconds = _run(setup, partition, backend)
    curve = setup.to_curve(out_n)

    partials = []
    for part in partition.assignments:
        partials.append(relative_errors([curve.velocities[i] for i in part],
                                        [experimental.velocities[i] for i in part]) if part else [])
    value = combine_errors(partials, len(setup))

    counts = out_count.tolist()
    stats = tuple(WorkerStats(k, len(part), sum(counts[i] for i in part), seconds[k])
                  for k, part in enumerate(partition.assignments))
    return ParallelResult(curve, value, sum(counts), tuple(counts), stats, partition)


def parallel_dispersion_curve(model, wavelengths, sweep, workers=1,
                              strategy=PartitionStrategy.MODULAR, cache=None,
                              backend=None) -> DispersionCurve:
    setup = ScanSetup(model, wavelengths, sweep, cache)
    partition = partition_wavelengths(len(setup), workers, strategy)
    out_n, _, _ = _run(setup, partition, backend)
    return setup.to_curve(out_n)


def load_balance_report(result: ParallelResult) -> list[dict]:
    """One row per worker: wavelengths assigned, determinants, elapsed seconds."""
    return [{"worker": w.worker, "wavelengths": w.wavelengths,
             "determinants": w.determinants, "seconds": w.seconds}
            for w in result.workers]


def imbalance_ratio(counts) -> float:
    """max/min per-worker determinant count; workers with no work are ignored."""
    counts = [c for c in counts if c > 0]
    return max(counts) / min(counts)


def worker_determinants(per_wavelength, partition: Partition) -> list[int]:
    """Re-aggregate serial per-wavelength counts onto a partition."""
    per_wavelength = np.asarray(per_wavelength)
    return [int(per_wavelength[list(part)].sum()) if part else 0 for part in partition.assignments]
