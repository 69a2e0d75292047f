"""Domain types shared by every engine.

Units are SI throughout: meters, m/s and kg/m^3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ModelValidationError(ValueError):
    """Raised when a model or curve violates its invariants."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SweepError(ValueError):
    pass


def _floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class LayeredEarthModel:
    """N finite layers over a halfspace.

    ``thickness`` has one entry per finite layer; ``density``, ``vp`` and
    ``vs`` have ``n_layers + 1`` entries, the last one describing the
    halfspace. Construction does not validate, use :func:`validate_model`.
    """

    n_layers: int
    thickness: tuple[float, ...]
    density: tuple[float, ...]
    vp: tuple[float, ...]
    vs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "n_layers", int(self.n_layers))
        for name in ("thickness", "density", "vp", "vs"):
            object.__setattr__(self, name, _floats(getattr(self, name)))

    @classmethod
    def homogeneous(cls, vs: float, vp: float, density: float,
                    thickness: float = 1.0) -> "LayeredEarthModel":
        """A halfspace with one dummy layer carrying the same properties."""
        return cls(1, [thickness], [density] * 2, [vp] * 2, [vs] * 2)

    @property
    def order(self) -> int:
        return 2 * (self.n_layers + 1)

    def arrays(self):
        """(thickness, density, vp, vs) as float64 arrays."""
        return (np.asarray(self.thickness, dtype=np.float64),
                np.asarray(self.density, dtype=np.float64),
                np.asarray(self.vp, dtype=np.float64),
                np.asarray(self.vs, dtype=np.float64))

    def to_dict(self) -> dict:
        return {
            "n_layers": self.n_layers,
            "thickness": list(self.thickness),
            "density": list(self.density),
            "vp": list(self.vp),
            "vs": list(self.vs),
        }


def validate_model(model: LayeredEarthModel) -> list[str]:
    """Return every violated invariant; an empty list means the model is ok."""
    errors = []
    n = model.n_layers
    if n < 1:
        errors.append(f"n_layers must be a positive integer, got {n}")
    if len(model.thickness) != n:
        errors.append(f"thickness has {len(model.thickness)} entries, expected n_layers={n}")
    for name in ("density", "vp", "vs"):
        got = len(getattr(model, name))
        if got != n + 1:
            errors.append(f"{name} has {got} entries, expected n_layers+1={n + 1}")

    def positive(name):
        for i, v in enumerate(getattr(model, name)):
            if not (v > 0 and math.isfinite(v)):
                errors.append(f"nonpositive {name} at index {i}: {v!r}")

    positive("thickness")
    positive("density")
    positive("vs")
    for i, (p, s) in enumerate(zip(model.vp, model.vs)):
        if not p > s:
            errors.append(f"vp must exceed vs at index {i}: vp={p!r}, vs={s!r}")
    return errors


def check_model(model: LayeredEarthModel) -> LayeredEarthModel:
    errors = validate_model(model)
    if errors:
        raise ModelValidationError(errors)
    return model


@dataclass(frozen=True)
class DispersionCurve:
    """Paired wavelength (m) and phase velocity (m/s) samples."""

    wavelengths: tuple[float, ...]
    velocities: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "wavelengths", _floats(self.wavelengths))
        object.__setattr__(self, "velocities", _floats(self.velocities))

    def __len__(self):
        return len(self.wavelengths)

    def reversed(self) -> "DispersionCurve":
        return DispersionCurve(self.wavelengths[::-1], self.velocities[::-1])


def validate_curve(curve: DispersionCurve, require_velocities: bool = True) -> list[str]:
    errors = []
    if len(curve.wavelengths) == 0:
        errors.append("empty curve")
    if require_velocities and len(curve.velocities) != len(curve.wavelengths):
        errors.append(f"{len(curve.wavelengths)} wavelengths but "
                      f"{len(curve.velocities)} velocities")
    for i, w in enumerate(curve.wavelengths):
        if not (w > 0 and math.isfinite(w)):
            errors.append(f"nonpositive wavelength at row {i}: {w!r}")
    for i, v in enumerate(curve.velocities):
        if not (v > 0 and math.isfinite(v)):
            errors.append(f"nonpositive velocity at row {i}: {v!r}")
    return errors


def check_curve(curve: DispersionCurve, require_velocities: bool = True) -> DispersionCurve:
    errors = validate_curve(curve, require_velocities)
    if errors:
        raise ModelValidationError(errors)
    return curve


@dataclass(frozen=True)
class VelocitySweep:
    v_min: float
    v_max: float
    v_step: float

    def __post_init__(self):
        for name in ("v_min", "v_max", "v_step"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def materialize(self) -> np.ndarray:
        return materialize_sweep(self)

    def __len__(self):
        return len(materialize_sweep(self))


#: 1000 test velocities on a 0.5 m/s grid; hits 72, 238 and 256 exactly.
DEFAULT_SWEEP = VelocitySweep(50.0, 549.5, 0.5)


def materialize_sweep(sweep: VelocitySweep) -> np.ndarray:
    """Test velocities ``v_min + i*v_step`` up to and including ``v_max``.

    Each entry is computed from its index rather than accumulated, so the
    grid is reproducible and the endpoint never overshoots ``v_max``.
    """
    v_min, v_max, v_step = sweep.v_min, sweep.v_max, sweep.v_step
    if not (math.isfinite(v_min) and math.isfinite(v_max) and math.isfinite(v_step)):
        raise SweepError(f"non-finite sweep parameters: {sweep}")
    if v_min <= 0:
        raise SweepError(f"v_min must be positive, got {v_min}")
    if v_step <= 0:
        raise SweepError(f"v_step must be positive, got {v_step}")
    if v_max <= v_min:
        raise SweepError(f"v_max must exceed v_min, got {v_min}..{v_max}")
    count = int(math.floor((v_max - v_min) / v_step)) + 1
    # floor() can be off by one when the span is an exact multiple of the step
    while count > 1 and v_min + (count - 1) * v_step > v_max:
        count -= 1
    while v_min + count * v_step <= v_max:
        count += 1
    if count < 2:
        raise SweepError(f"sweep {v_min}..{v_max} step {v_step} has fewer than 2 points")
    grid = v_min + np.arange(count, dtype=np.float64) * v_step
    grid.flags.writeable = False
    return grid
