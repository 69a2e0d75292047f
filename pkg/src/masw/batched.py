"""Batched grid engine with the phase structure of a GPU kernel pipeline.

Phases, each a set of independent tasks separated by a barrier:

1. fill: one logical task per (wavelength, velocity) stiffness matrix,
   assembled and eliminated in place;
2. block search: for each (wavelength, block) the first in-block index whose
   determinant sign differs from the next one;
3. block reduce: per wavelength, the first block that recorded a change;
4. misfit.

Everything runs on the CPU; only the decomposition is kept.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dispersion import CurveResult, NoSignChange, ScanSetup, misfit
from .model import DispersionCurve, LayeredEarthModel, VelocitySweep, check_curve, materialize_sweep
from .stiffness import BYTES_PER_ENTRY

DEFAULT_BLOCK_SIZE = 256
DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3
SENTINEL = -1
#: Matrices per chunk handed to one pool worker during the fill phase.
FILL_CHUNK = 4096


class MemoryBudgetExceeded(MemoryError):
    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(f"grid needs {required} bytes, budget is {budget} bytes")


def memory_estimate(n_wavelengths: int, n_velocities: int, n_layers: int) -> int:
    """Bytes to hold every stiffness matrix densely as complex doubles."""
    if n_wavelengths < 1 or n_velocities < 1 or n_layers < 0:
        raise ValueError("memory_estimate needs positive counts")
    order = 2 * (n_layers + 1)
    return n_wavelengths * n_velocities * order * order * BYTES_PER_ENTRY


@dataclass(frozen=True, eq=False)
class DeterminantGrid:
    """Row = wavelength, column = test velocity.

    ``values`` holds complex determinants, or int8 signs in compact mode.
    """

    values: np.ndarray
    block_size: int = DEFAULT_BLOCK_SIZE
    tasks: int = 0

    @property
    def compact(self) -> bool:
        return self.values.dtype == np.int8

    def signs(self) -> np.ndarray:
        if self.compact:
            return self.values
        re = self.values.real
        return ((re > 0).astype(np.int8) - (re < 0).astype(np.int8))


@dataclass(frozen=True, eq=False)
class BlockResultMatrix:
    """(n_wavelengths, n_blocks) first in-block change index or SENTINEL."""

    indices: np.ndarray
    block_size: int
    n_velocities: int


def fill_grid(model: LayeredEarthModel, wavelengths, sweep: VelocitySweep,
              block_size: int = DEFAULT_BLOCK_SIZE, memory_budget: int = DEFAULT_MEMORY_BUDGET,
              workers: int = 1, compact: bool = False, cache=None, backend=None,
              chunk: int = FILL_CHUNK, order=None) -> DeterminantGrid:
    """Compute the determinant of every (wavelength, velocity) matrix.

    The budget is checked against :func:`memory_estimate` before anything is
    allocated. ``order`` optionally permutes the chunk schedule; results do
    not depend on it.
    """
    if block_size < 1:
        raise ValueError(f"block_size must be positive, got {block_size}")
    n_w = len(wavelengths)
    n_v = len(materialize_sweep(sweep))
    required = memory_estimate(n_w, n_v, model.n_layers)
    if required > memory_budget:
        raise MemoryBudgetExceeded(required, memory_budget)

    setup = ScanSetup(model, wavelengths, sweep, cache)
    be = backend or kernels.backend
    grid = np.empty((n_w, n_v), dtype=np.complex128)
    tasks = n_w * n_v
    chunks = [(a, min(a + chunk, tasks)) for a in range(0, tasks, chunk)]
    if order is not None:
        chunks = [chunks[i] for i in order]

    def work(bounds):
        be.fill(setup.h, setup.table, setup.ks, bounds[0], bounds[1], grid)

    if workers <= 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))

    values = grid
    if compact:
        values = DeterminantGrid(grid).signs().copy()
    values.flags.writeable = False
    return DeterminantGrid(values, block_size, tasks)


def block_search(grid: DeterminantGrid) -> BlockResultMatrix:
    """First sign change inside each velocity block.

    Block k owns pairs (n, n+1) with ``k*bs <= n < (k+1)*bs``, so the pair
    straddling a block boundary belongs to the lower block. The last velocity
    starts no pair.
    """
    signs = grid.signs()
    n_w, n_v = signs.shape
    bs = grid.block_size
    n_blocks = math.ceil(n_v / bs)
    changes = np.zeros((n_w, n_blocks * bs), dtype=bool)
    changes[:, :n_v - 1] = signs[:, :-1] != signs[:, 1:]
    changes = changes.reshape(n_w, n_blocks, bs)
    first = changes.argmax(axis=2)
    found = changes.any(axis=2)
    indices = np.where(found, first, SENTINEL).astype(np.int64)
    return BlockResultMatrix(indices, bs, n_v)


def reduce_blocks(blocks: BlockResultMatrix, sweep: VelocitySweep, wavelengths) -> DispersionCurve:
    """Velocity after the first recorded change, per wavelength."""
    velocities = materialize_sweep(sweep)
    out = []
    for w, row in enumerate(blocks.indices.tolist()):
        for k, j in enumerate(row):
            if j != SENTINEL:
                out.append(float(velocities[k * blocks.block_size + j + 1]))
                break
        else:
            raise NoSignChange(float(wavelengths[w]), w)
    return DispersionCurve(wavelengths, out)


def global_indices(blocks: BlockResultMatrix) -> np.ndarray:
    """Index n of the velocity returned per wavelength, -1 if none."""
    out = np.full(blocks.indices.shape[0], -1, dtype=np.int64)
    for w, row in enumerate(blocks.indices.tolist()):
        for k, j in enumerate(row):
            if j != SENTINEL:
                out[w] = k * blocks.block_size + j + 1
                break
    return out


def batched_dispersion_curve(model, wavelengths, sweep, block_size=DEFAULT_BLOCK_SIZE,
                             memory_budget=DEFAULT_MEMORY_BUDGET, workers=1,
                             cache=None, backend=None) -> DispersionCurve:
    grid = fill_grid(model, wavelengths, sweep, block_size, memory_budget, workers,
                     compact=True, cache=cache, backend=backend)
    return reduce_blocks(block_search(grid), sweep, tuple(float(w) for w in wavelengths))


def batched_evaluate(model: LayeredEarthModel, experimental: DispersionCurve, sweep: VelocitySweep,
                     block_size=DEFAULT_BLOCK_SIZE, memory_budget=DEFAULT_MEMORY_BUDGET,
                     workers=1, cache=None, backend=None) -> CurveResult:
    check_curve(experimental)
    grid = fill_grid(model, experimental.wavelengths, sweep, block_size, memory_budget,
                     workers, compact=True, cache=cache, backend=backend)
    curve = reduce_blocks(block_search(grid), sweep, experimental.wavelengths)
    n_v = grid.values.shape[1]
    per = (n_v,) * len(experimental)
    return CurveResult(curve, misfit(curve, experimental), grid.tasks, per)
