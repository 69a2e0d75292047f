"""Acceptance suite: one test per criterion, each reporting PASS, FAIL or WARN.

Scaling criteria (6, 7) are environment sensitive: when the machine has fewer
cores than workers requested, a miss is reported as WARN and does not fail.
Run standalone with ``python tests/test_acceptance.py``.
"""
import math
import os
import random
import time
import warnings

import numpy as np
import pytest

from conftest import rayleigh_root, record
from masw import bench, io
from masw.batched import batched_evaluate, fill_grid, memory_estimate
from masw.dispersion import evaluate_model, misfit, theoretical_dispersion_curve
from masw.model import DispersionCurve, LayeredEarthModel, VelocitySweep
from masw.parallel import (PartitionStrategy, imbalance_ratio, parallel_evaluate, partition_wavelengths,
                           worker_determinants)
from masw.stiffness import assemble, banded_determinant, dense_bytes, dense_determinant


def cores() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def report(criterion, ok, detail):
    record(criterion, "PASS" if ok else "FAIL", detail)
    assert ok, detail


def soft(criterion, ok, detail, needed_cores):
    """Assert, or downgrade to a warning on machines too small to show scaling."""
    if ok:
        record(criterion, "PASS", detail)
        return
    if cores() < needed_cores:
        msg = f"{detail} (only {cores()} cores, needs {needed_cores}; environment-sensitive)"
        record(criterion, "WARN", msg)
        warnings.warn(msg)
        return
    record(criterion, "FAIL", detail)
    pytest.fail(detail)


def test_criterion_01_determinant_oracle():
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(200):
        n = 1 + i % 10
        vs = rng.uniform(50, 400, n + 1)
        vp = vs * rng.uniform(1.5, 2.5, n + 1)
        model = LayeredEarthModel(n, rng.uniform(0.5, 10, n), rng.uniform(1500, 2300, n + 1), vp, vs)
        m = assemble(model, rng.uniform(0.5, 100), rng.uniform(40, 500))
        oracle = dense_determinant(m.to_dense())
        worst = max(worst, abs(banded_determinant(m) - oracle) / abs(oracle))
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-10 and elapsed < 1.0,
           f"200 banded vs dense determinants, worst rel err {worst:.2e} (<= 1e-10), {elapsed:.2f}s (< 1s)")


def test_criterion_02_homogeneous_halfspace():
    vs = 200.0
    vp = vs * math.sqrt(3.0)
    model = LayeredEarthModel.homogeneous(vs, vp, 1800.0)
    sweep = VelocitySweep(100.0, 199.75, 0.25)
    wavelengths = [1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 15.0, 20.0, 50.0, 100.0]
    t0 = time.perf_counter()
    ct = theoretical_dispersion_curve(model, wavelengths, sweep).velocities
    elapsed = time.perf_counter() - t0
    root = rayleigh_root(vs, vp)
    ok = len(set(ct)) == 1 and abs(ct[0] - root) <= 0.25 and elapsed < 5.0
    report(2, ok, f"Ct {sorted(set(ct))} vs Rayleigh root {root:.4f} ({root / vs:.4f} vs), "
                  f"step 0.25, {elapsed:.2f}s (< 5s)")


def test_criterion_03_engine_equivalence(ref_model, ref_sweep, variable40, uniform200):
    t0 = time.perf_counter()
    checked = 0
    mismatches = []
    for name, data in (("variable-40", variable40), ("uniform-200", uniform200)):
        # Perturb Ce so the misfit is a nontrivial sum.
        ce = DispersionCurve(data.wavelengths, [v * (1 + 0.003 * (i % 7)) for i, v in enumerate(data.velocities)])
        serial = evaluate_model(ref_model, ce, ref_sweep)
        runs = {}
        for s in (1, 2, 3, 4, 8):
            for strategy in PartitionStrategy:
                runs[f"parallel s={s} {strategy.value}"] = parallel_evaluate(ref_model, ce, ref_sweep, s, strategy)
        for bs in (2, 16, 256):
            runs[f"batched bs={bs}"] = batched_evaluate(ref_model, ce, ref_sweep, block_size=bs)
        for label, res in runs.items():
            checked += 1
            if res.curve != serial.curve or res.misfit != serial.misfit:
                mismatches.append(f"{name} {label}")
    elapsed = time.perf_counter() - t0
    report(3, not mismatches and elapsed < 30.0,
           f"{checked} engine configurations bitwise equal to serial (mismatches: {mismatches or 'none'}), "
           f"{elapsed:.1f}s (< 30s)")


def test_criterion_04_partition_laws():
    t0 = time.perf_counter()
    violations = 0
    for strategy in PartitionStrategy:
        for total in range(1, 201):
            for workers in range(1, total + 1):
                p = partition_wavelengths(total, workers, strategy)
                flat = [i for part in p.assignments for i in part]
                sizes = p.sizes()
                if len(flat) != total or set(flat) != set(range(total)) or max(sizes) - min(sizes) > 1:
                    violations += 1
    sizes = partition_wavelengths(40, 3, PartitionStrategy.CONTIGUOUS).sizes()
    elapsed = time.perf_counter() - t0
    report(4, violations == 0 and sizes == [14, 13, 13] and elapsed < 5.0,
           f"{violations} violations over 1 <= s <= W <= 200, W=40 s=3 contiguous sizes {sizes}, "
           f"{elapsed:.2f}s (< 5s)")


def test_criterion_05_load_balance(ref_model, ref_sweep, variable40):
    t0 = time.perf_counter()
    ratios = {}
    for strategy in PartitionStrategy:
        res = parallel_evaluate(ref_model, variable40, ref_sweep, 4, strategy)
        ratios[strategy.value] = imbalance_ratio([w.determinants for w in res.workers])
    elapsed = time.perf_counter() - t0
    report(5, ratios["modular"] <= ratios["contiguous"] and elapsed < 5.0,
           f"max/min determinants per worker, s=4: modular {ratios['modular']:.3f} <= "
           f"contiguous {ratios['contiguous']:.3f}, {elapsed:.2f}s (< 5s)")


@pytest.mark.env_sensitive
def test_criterion_06_strong_scaling(ref_model, ref_sweep, variable40):
    t0 = time.perf_counter()
    uniform = bench.bench_strong(io.gen_uniform(1000, 238), [1, 4, 8], "modular", reps=5,
                                 dataset_name="uniform")
    speed = {r.workers: r.speedup for r in uniform}
    var = {}
    for strategy in PartitionStrategy:
        rec = bench.bench_strong(variable40, [1, 8], strategy, reps=5, dataset_name="variable")
        var[strategy.value] = rec[-1].speedup
    elapsed = time.perf_counter() - t0
    ok = (speed[4] >= 3.0 and speed[8] >= 5.5 and var["modular"] > var["contiguous"]
          and elapsed < 180.0)
    soft(6, ok, f"uniform-1000 speedup s=4 {speed[4]:.2f} (>= 3.0), s=8 {speed[8]:.2f} (>= 5.5); "
                f"variable-40 s=8 modular {var['modular']:.2f} > contiguous {var['contiguous']:.2f}; "
                f"{elapsed:.0f}s (< 180s)", needed_cores=8)


@pytest.mark.env_sensitive
def test_criterion_07_weak_scaling():
    recs = bench.bench_weak(1000, [1, 2, 4], reps=5)
    t = {r.workers: r.median_seconds for r in recs}
    ratio = t[4] / t[1]
    soft(7, ratio <= 1.3, f"weak scaling, length 1000*s: t(s=4)/t(s=1) = {ratio:.2f} (<= 1.3); "
                          f"medians {', '.join(f's={s} {v:.3f}s' for s, v in sorted(t.items()))}",
         needed_cores=4)


def test_criterion_08_memory_estimate():
    total, one = memory_estimate(500, 1000, 6), memory_estimate(1, 1, 6)
    report(8, total == 1_568_000_000 and one == 3136 and dense_bytes(6) == 3136,
           f"memory_estimate(500, 1000, 6) = {total:,} bytes, per matrix {one} bytes")


def test_criterion_09_misfit():
    rnd = random.Random(99)
    worst = 0.0
    ct = [150.0, 200.0, 250.0]
    exact = misfit(ct, ct) == 0.0 and misfit([110.0], [100.0]) == 0.10
    for _ in range(100):
        n = rnd.randint(1, 50)
        a = [rnd.uniform(50, 500) for _ in range(n)]
        b = [rnd.uniform(50, 500) for _ in range(n)]
        m = misfit(a, b)
        k = rnd.uniform(0.01, 100)
        perm = list(range(n))
        rnd.shuffle(perm)
        worst = max(worst,
                    abs(misfit([x * k for x in a], [x * k for x in b]) - m),
                    abs(misfit([a[i] for i in perm], [b[i] for i in perm]) - m))
    report(9, exact and worst <= 1e-12,
           f"misfit(Ct, Ct) = 0 and misfit([110], [100]) = 0.10 exactly: {exact}; "
           f"scale/permutation worst deviation {worst:.1e} (<= 1e-12) over 100 pairs")


def test_criterion_10_early_exit(ref_model, ref_sweep, variable40):
    t0 = time.perf_counter()
    serial = evaluate_model(ref_model, variable40, ref_sweep)
    signs = fill_grid(ref_model, variable40.wavelengths, ref_sweep).signs()
    oracle = sum(int(np.argmax(row[1:] != row[:-1])) + 2 for row in signs)
    full = signs.size
    elapsed = time.perf_counter() - t0
    ok = serial.determinants_computed == oracle < full and elapsed < 10.0
    report(10, ok, f"serial determinants {serial.determinants_computed} == full-grid oracle {oracle} "
                   f"< l*|V| = {full}, {elapsed:.2f}s (< 10s)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s", "-p", "no:cacheprovider"]))
