"""Serial engine: theoretical dispersion curves and misfit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .model import (DispersionCurve, LayeredEarthModel, VelocitySweep, check_curve,
                    check_model, materialize_sweep)
from .stiffness import TermsCache, determinant, determinant_sign, velocity_table, wavenumber, \
    precompute_velocity_terms


class NoSignChange(RuntimeError):
    """No determinant sign change across the whole velocity sweep."""

    def __init__(self, wavelength: float, index: int | None = None):
        self.wavelength = wavelength
        self.index = index
        where = f" (row {index})" if index is not None else ""
        super().__init__(f"no determinant sign change for wavelength {wavelength!r} m{where}")


@dataclass(frozen=True)
class CurveResult:
    curve: DispersionCurve
    misfit: float
    determinants_computed: int
    per_wavelength_determinants: tuple[int, ...] = field(default=(), repr=False)


def first_sign_change(dets: Iterable[complex]) -> tuple[int, int]:
    """Index of the first determinant whose sign differs from its predecessor.

    ``dets`` is consumed lazily, so a generator stops being evaluated at the
    change. Returns ``(index, determinants_consumed)``; index is -1 when the
    sign never changes.
    """
    it = iter(dets)
    try:
        old = determinant_sign(next(it))
    except StopIteration:
        return -1, 0
    count = 1
    for n, d in enumerate(it, start=1):
        count += 1
        new = determinant_sign(d)
        if new != old:
            return n, count
        old = new
    return -1, count


def find_first_sign_change(model: LayeredEarthModel, wavelength: float, velocities: Sequence[float],
                           terms: Callable[[int], object] | None = None) -> tuple[int, float, int]:
    """Scan ``velocities`` upward for one wavelength.

    ``terms`` maps a velocity index to its precomputed
    :class:`~masw.stiffness.VelocityTerms`; by default they are computed on
    demand. Returns ``(n, velocities[n], determinants_computed)``.
    """
    if len(velocities) < 2:
        raise ValueError("need at least two test velocities")
    if terms is None:
        def terms(n):
            return precompute_velocity_terms(model, velocities[n])
    dets = (determinant(model, wavelength, velocities[n], terms(n)) for n in range(len(velocities)))
    n, count = first_sign_change(dets)
    if n < 0:
        raise NoSignChange(float(wavelength))
    return n, float(velocities[n]), count


class ScanSetup:
    """Inputs shared read-only by every worker scanning one model."""

    def __init__(self, model: LayeredEarthModel, wavelengths, sweep: VelocitySweep,
                 cache: TermsCache | None = None):
        check_model(model)
        self.model = model
        self.wavelengths = tuple(float(w) for w in wavelengths)
        for w in self.wavelengths:
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"wavelengths must be positive, got {w!r}")
        self.velocities = materialize_sweep(sweep)
        self.table = velocity_table(model, self.velocities, cache=cache)
        self.h = np.asarray(model.thickness, dtype=np.float64)
        self.h.flags.writeable = False
        self.ks = np.array([wavenumber(w) for w in self.wavelengths], dtype=np.float64)
        self.ks.flags.writeable = False

    def __len__(self):
        return len(self.wavelengths)

    def outputs(self):
        n = len(self.wavelengths)
        return np.full(n, -2, dtype=np.int64), np.zeros(n, dtype=np.int64)

    def scan(self, indices, out_n, out_count, backend=None):
        be = backend or kernels.backend
        idx = np.ascontiguousarray(indices, dtype=np.int64)
        be.scan(self.h, self.table, self.ks, idx, out_n, out_count)

    def to_curve(self, out_n) -> DispersionCurve:
        """Curve from scan results; the lowest failing row raises NoSignChange."""
        velocities = []
        for i, n in enumerate(out_n.tolist()):
            if n < 0:
                raise NoSignChange(self.wavelengths[i], i)
            velocities.append(float(self.velocities[n]))
        return DispersionCurve(self.wavelengths, velocities)


def _scan_all(model, wavelengths, sweep, cache=None, backend=None):
    setup = ScanSetup(model, wavelengths, sweep, cache)
    out_n, out_count = setup.outputs()
    setup.scan(np.arange(len(setup), dtype=np.int64), out_n, out_count, backend)
    return setup, out_n, out_count


def theoretical_dispersion_curve(model: LayeredEarthModel, wavelengths, sweep: VelocitySweep,
                                 cache: TermsCache | None = None, backend=None) -> DispersionCurve:
    """Phase velocity at the first determinant sign change, per wavelength."""
    setup, out_n, _ = _scan_all(model, wavelengths, sweep, cache, backend)
    return setup.to_curve(out_n)


def relative_errors(theoretical: Sequence[float], experimental: Sequence[float]) -> list[float]:
    if len(theoretical) != len(experimental):
        raise ValueError(f"curve lengths differ: {len(theoretical)} vs {len(experimental)}")
    if len(experimental) == 0:
        raise ValueError("misfit of an empty curve")
    errors = []
    for t, e in zip(theoretical, experimental):
        if not e > 0:
            raise ValueError(f"experimental velocities must be positive, got {e!r}")
        errors.append(abs(t - e) / e)
    return errors


def combine_errors(partials: Iterable[Sequence[float]], length: int) -> float:
    """Exactly rounded mean of relative errors, whatever the grouping.

    ``math.fsum`` is order independent, so any partition of the errors over
    workers reduces to the same bits as the serial sum.
    """
    return math.fsum(e for part in partials for e in part) / length


def misfit(theoretical, experimental) -> float:
    """Average relative error ``mean(|Ct - Ce| / Ce)`` as a fraction.

    Both arguments are velocity sequences or :class:`DispersionCurve`.
    """
    if isinstance(theoretical, DispersionCurve):
        theoretical = theoretical.velocities
    if isinstance(experimental, DispersionCurve):
        experimental = experimental.velocities
    errors = relative_errors(list(theoretical), list(experimental))
    return combine_errors([errors], len(errors))


def evaluate_model(model: LayeredEarthModel, experimental: DispersionCurve, sweep: VelocitySweep,
                   cache: TermsCache | None = None, backend=None) -> CurveResult:
    check_curve(experimental)
    setup, out_n, out_count = _scan_all(model, experimental.wavelengths, sweep, cache, backend)
    curve = setup.to_curve(out_n)
    counts = tuple(out_count.tolist())
    return CurveResult(curve, misfit(curve, experimental), sum(counts), counts)
