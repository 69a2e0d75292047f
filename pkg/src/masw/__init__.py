"""Rayleigh-wave dispersion curves for layered earth models.

Theoretical phase velocities come from the first sign change of the
stiffness-matrix determinant over a test-velocity sweep. Three engines
compute identical results: serial with early exit, partitioned across
workers, and a batched full-grid pipeline.
"""
from .batched import (BlockResultMatrix, DeterminantGrid, MemoryBudgetExceeded, batched_dispersion_curve,
                      batched_evaluate, block_search, fill_grid, memory_estimate, reduce_blocks)
from .dispersion import (CurveResult, NoSignChange, evaluate_model, find_first_sign_change, misfit,
                         theoretical_dispersion_curve)
from .model import (DEFAULT_SWEEP, DispersionCurve, LayeredEarthModel, ModelValidationError, SweepError,
                    VelocitySweep, materialize_sweep, validate_model)
from .parallel import (Partition, PartitionStrategy, load_balance_report, parallel_dispersion_curve,
                       parallel_evaluate, partition_wavelengths)
from .stiffness import (BandedStiffnessMatrix, TermsCache, assemble, banded_determinant, determinant,
                        determinant_sign, precompute_velocity_terms)

__version__ = "0.1.0"

__all__ = [
    "BandedStiffnessMatrix", "BlockResultMatrix", "CurveResult", "DEFAULT_SWEEP", "DeterminantGrid",
    "DispersionCurve", "LayeredEarthModel", "MemoryBudgetExceeded", "ModelValidationError",
    "NoSignChange", "Partition", "PartitionStrategy", "SweepError", "TermsCache", "VelocitySweep",
    "assemble", "banded_determinant", "batched_dispersion_curve", "batched_evaluate", "block_search",
    "determinant", "determinant_sign", "evaluate_model", "fill_grid", "find_first_sign_change",
    "load_balance_report", "materialize_sweep", "memory_estimate", "misfit", "parallel_dispersion_curve",
    "parallel_evaluate", "partition_wavelengths", "precompute_velocity_terms", "reduce_blocks",
    "theoretical_dispersion_curve", "validate_model",
]
