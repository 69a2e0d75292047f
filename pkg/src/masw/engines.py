"""Uniform entry points over the three engines."""
from __future__ import annotations

from .batched import DEFAULT_MEMORY_BUDGET, batched_dispersion_curve, batched_evaluate
from .dispersion import CurveResult, evaluate_model, theoretical_dispersion_curve
from .io import EngineConfig
from .model import DispersionCurve, LayeredEarthModel, VelocitySweep
from .parallel import parallel_dispersion_curve, parallel_evaluate


def compute_curve(engine: EngineConfig, model: LayeredEarthModel, wavelengths, sweep: VelocitySweep,
                  cache=None, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> DispersionCurve:
    if engine.kind == "serial":
        return theoretical_dispersion_curve(model, wavelengths, sweep, cache)
    if engine.kind == "parallel":
        return parallel_dispersion_curve(model, wavelengths, sweep, engine.workers, engine.strategy, cache)
    return batched_dispersion_curve(model, wavelengths, sweep, engine.block_size, memory_budget,
                                    engine.workers, cache)


def evaluate(engine: EngineConfig, model: LayeredEarthModel, experimental: DispersionCurve,
             sweep: VelocitySweep, cache=None, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> CurveResult:
    if engine.kind == "serial":
        return evaluate_model(model, experimental, sweep, cache)
    if engine.kind == "parallel":
        return parallel_evaluate(model, experimental, sweep, engine.workers, engine.strategy, cache)
    return batched_evaluate(model, experimental, sweep, engine.block_size, memory_budget,
                            engine.workers, cache)
