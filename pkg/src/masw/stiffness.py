"""Stiffness matrix assembly and O(N) determinants.

Each finite layer contributes a symmetric 4x4 complex element block on
global rows/cols ``2i .. 2i+3``; the halfspace adds a 2x2 block on the last
two. Blocks overlap by two rows, which yields a heptadiagonal matrix of order
``2(N+1)``. Element coefficients follow the closed forms used by MASWaves
(Olafsdottir et al., 2018), based on Kausel's stiffness-matrix method.

Band storage is row oriented: ``bands[i, j - i + 3]`` holds entry ``(i, j)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import LayeredEarthModel

#: Test velocities this close (m/s) to a layer vp or vs are singular ...
SINGULAR_TOLERANCE = 1e-9
#: ... and are shifted upward by this amount until clear.
SINGULAR_SHIFT = 1e-6

BAND_WIDTH = 7
TERMS_PER_LAYER = 8
BYTES_PER_ENTRY = 16


def wavenumber(wavelength: float) -> float:
    return 2.0 * math.pi / float(wavelength)


def effective_velocity(model: LayeredEarthModel, velocity: float) -> float:
    """Shift ``velocity`` off any layer P or S velocity it coincides with."""
    c = float(velocity)
    speeds = model.vp + model.vs
    while any(abs(c - v) < SINGULAR_TOLERANCE for v in speeds):
        c += SINGULAR_SHIFT
    return c


def _radicals(a, b, c):
    r = cmath.sqrt(complex(1.0 - (c * c) / (a * a), 0.0))
    s = cmath.sqrt(complex(1.0 - (c * c) / (b * b), 0.0))
    return r, s


def layer_terms(rho: float, a: float, b: float, c: float) -> tuple:
    """Velocity-only subexpressions of a finite layer's element block."""
    r, s = _radicals(a, b, c)
    rs = r * s
    return (r, s, 1.0 / r, 1.0 / s, 1.0 / rs + rs, rs,
            complex(rho * c * c, 0.0), rho * b * b * (1.0 + s * s))


def halfspace_terms(rho: float, a: float, b: float, c: float) -> tuple:
    """Halfspace block per unit wavenumber: (k11, k12, k22, 0, ...)."""
    r, s = _radicals(a, b, c)
    q = rho * b * b
    denom = 1.0 - r * s
    s2 = 1.0 - s * s
    return (q * (r * s2) / denom, q * s2 / denom - 2.0 * q, q * (s * s2) / denom,
            0j, 0j, 0j, 0j, 0j)


@dataclass(frozen=True, eq=False)
class VelocityTerms:
    """Per-velocity subexpressions reused for every wavelength.

    ``table`` is a read-only complex array of shape (n_layers + 1, 8): one
    row per finite layer, the last row for the halfspace.
    """

    velocity: float
    effective_velocity: float
    table: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, VelocityTerms):
            return NotImplemented
        return (self.velocity == other.velocity
                and self.effective_velocity == other.effective_velocity
                and self.table.shape == other.table.shape
                and self.table.tobytes() == other.table.tobytes())

    __hash__ = None


def _terms_rows(model: LayeredEarthModel, c: float) -> list:
    n = model.n_layers
    rows = [layer_terms(model.density[i], model.vp[i], model.vs[i], c) for i in range(n)]
    rows.append(halfspace_terms(model.density[n], model.vp[n], model.vs[n], c))
    return rows


def precompute_velocity_terms(model: LayeredEarthModel, velocity: float) -> VelocityTerms:
    if not velocity > 0:
        raise ValueError(f"velocity must be positive, got {velocity!r}")
    c = effective_velocity(model, velocity)
    table = np.array(_terms_rows(model, c), dtype=np.complex128)
    table.flags.writeable = False
    return VelocityTerms(float(velocity), c, table)


class TermsCache:
    """Velocity-term tables keyed per layer, shared across candidate models.

    Candidates in an inversion often share layers; their term columns are
    computed once. The tables are identical to calling
    :func:`precompute_velocity_terms` per velocity.
    """

    def __init__(self):
        self._columns = {}
        self.hits = 0
        self.misses = 0

    def _column(self, kind, rho, a, b, eff):
        key = (kind, rho, a, b, eff.tobytes())
        col = self._columns.get(key)
        if col is None:
            self.misses += 1
            fn = layer_terms if kind == "layer" else halfspace_terms
            col = np.array([fn(rho, a, b, c) for c in eff.tolist()], dtype=np.complex128)
            self._columns[key] = col
        else:
            self.hits += 1
        return col

    def table(self, model: LayeredEarthModel, velocities) -> np.ndarray:
        return velocity_table(model, velocities, cache=self)


def velocity_table(model: LayeredEarthModel, velocities, cache: TermsCache | None = None) -> np.ndarray:
    """Terms for every test velocity, shape (n_velocities, n_layers + 1, 8)."""
    velocities = np.asarray(velocities, dtype=np.float64)
    eff = np.array([effective_velocity(model, c) for c in velocities.tolist()], dtype=np.float64)
    n = model.n_layers
    out = np.empty((len(velocities), n + 1, TERMS_PER_LAYER), dtype=np.complex128)
    if cache is None:
        for j, c in enumerate(eff.tolist()):
            out[j] = _terms_rows(model, c)
    else:
        for i in range(n + 1):
            kind = "layer" if i < n else "halfspace"
            out[:, i, :] = cache._column(kind, model.density[i], model.vp[i], model.vs[i], eff)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class BandedStiffnessMatrix:
    order: int
    bands: np.ndarray

    def to_dense(self) -> np.ndarray:
        n = self.order
        dense = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            for d in range(BAND_WIDTH):
                j = i + d - 3
                if 0 <= j < n:
                    dense[i, j] = self.bands[i, d]
        return dense

    @classmethod
    def from_dense(cls, dense) -> "BandedStiffnessMatrix":
        dense = np.asarray(dense, dtype=np.complex128)
        n = dense.shape[0]
        bands = np.zeros((n, BAND_WIDTH), dtype=np.complex128)
        for i in range(n):
            for j in range(max(0, i - 3), min(n, i + 4)):
                bands[i, j - i + 3] = dense[i, j]
        return cls(n, bands)

    def entry(self, i: int, j: int) -> complex:
        if abs(i - j) > 3:
            return 0j
        return complex(self.bands[i, j - i + 3])


def assemble(model: LayeredEarthModel, wavelength: float, velocity: float,
             terms: VelocityTerms | None = None, backend=None) -> BandedStiffnessMatrix:
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    if terms is None:
        terms = precompute_velocity_terms(model, velocity)
    elif terms.velocity != float(velocity):
        raise ValueError(f"terms were computed for v={terms.velocity}, not {velocity}")
    be = backend or kernels.backend
    h = np.asarray(model.thickness, dtype=np.float64)
    bands = be.assemble(h, terms.table, wavenumber(wavelength))
    return BandedStiffnessMatrix(model.order, bands)


def assemble_naive(model: LayeredEarthModel, wavelength: float, velocity: float) -> BandedStiffnessMatrix:
    """Reference assembly: every coefficient computed inline, nothing cached."""
    k = wavenumber(wavelength)
    c = effective_velocity(model, velocity)
    n = model.n_layers
    order = model.order
    band = [[0j] * BAND_WIDTH for _ in range(order)]

    def add(i, j, v):
        band[i][j - i + 3] += v

    for L in range(n):
        rho, a, b, h = model.density[L], model.vp[L], model.vs[L], model.thickness[L]
        r = cmath.sqrt(complex(1.0 - (c * c) / (a * a), 0.0))
        s = cmath.sqrt(complex(1.0 - (c * c) / (b * b), 0.0))
        x = complex(k * h, 0.0)
        Cr, Sr = cmath.cosh(x * r), cmath.sinh(x * r)
        Cs, Ss = cmath.cosh(x * s), cmath.sinh(x * s)
        D = 2.0 * (1.0 - Cr * Cs) + (1.0 / (r * s) + r * s) * Sr * Ss
        f = k * complex(rho * c * c, 0.0) / D
        k11 = f * ((1.0 / s) * Cr * Ss - r * Sr * Cs)
        k12 = f * (Cr * Cs - (r * s) * Sr * Ss - 1.0) - k * (rho * b * b * (1.0 + s * s))
        k13 = f * (r * Sr - (1.0 / s) * Ss)
        k14 = f * (Cs - Cr)
        k22 = f * ((1.0 / r) * Sr * Cs - s * Cr * Ss)
        k24 = f * (s * Ss - (1.0 / r) * Sr)
        ke = [[k11, k12, k13, k14],
              [k12, k22, -k14, k24],
              [k13, -k14, k11, -k12],
              [k14, k24, -k12, k22]]
        for p in range(4):
            for q in range(4):
                add(2 * L + p, 2 * L + q, ke[p][q])

    rho, a, b = model.density[n], model.vp[n], model.vs[n]
    r = cmath.sqrt(complex(1.0 - (c * c) / (a * a), 0.0))
    s = cmath.sqrt(complex(1.0 - (c * c) / (b * b), 0.0))
    q = rho * b * b
    h11 = q * (r * (1.0 - s * s)) / (1.0 - r * s)
    h12 = q * (1.0 - s * s) / (1.0 - r * s) - 2.0 * q
    h22 = q * (s * (1.0 - s * s)) / (1.0 - r * s)
    hs = [[k * h11, k * h12], [k * h12, k * h22]]
    for p in range(2):
        for q_ in range(2):
            add(2 * n + p, 2 * n + q_, hs[p][q_])
    return BandedStiffnessMatrix(order, np.array(band, dtype=np.complex128))


def banded_determinant(matrix: BandedStiffnessMatrix, backend=None) -> complex:
    """Determinant by elimination inside the band, O(order).

    No row exchanges; an exact zero pivot means the matrix is singular and
    0 is returned.
    """
    be = backend or kernels.backend
    return complex(be.band_det(matrix.bands))


def banded_determinant_counted(matrix: BandedStiffnessMatrix) -> tuple[complex, int]:
    """Same elimination as :func:`banded_determinant`, also counting flops.

    One complex multiply, divide or multiply-subtract counts as one flop.
    """
    band = matrix.bands.tolist()
    order = matrix.order
    det = complex(1.0, 0.0)
    flops = 0
    for kk in range(order):
        piv = band[kk][3]
        if not piv:
            return 0j, flops
        det = det * piv
        flops += 1
        stop = min(kk + 4, order)
        for i in range(kk + 1, stop):
            l = band[i][kk - i + 3] / piv
            flops += 1
            for j in range(kk + 1, stop):
                band[i][j - i + 3] = band[i][j - i + 3] - l * band[kk][j - kk + 3]
                flops += 1
    return det, flops


def dense_determinant(a) -> complex:
    """Gaussian elimination with partial pivoting on a dense matrix."""
    return kernels._pycore.dense_det(a)


def dense_determinant_flops(order: int) -> int:
    """Flop count of :func:`dense_determinant` on a full matrix, same units."""
    return sum(1 + (order - k - 1) * (1 + (order - k - 1)) for k in range(order))


def determinant(model: LayeredEarthModel, wavelength: float, velocity: float,
                terms: VelocityTerms | None = None, backend=None) -> complex:
    if terms is None:
        terms = precompute_velocity_terms(model, velocity)
    be = backend or kernels.backend
    h = np.asarray(model.thickness, dtype=np.float64)
    return complex(be.det(h, terms.table, wavenumber(wavelength)))


def determinant_sign(det: complex) -> int:
    """Sign of the real part: -1, 0 or +1."""
    x = complex(det).real
    return (x > 0) - (x < 0)


def dense_bytes(n_layers: int) -> int:
    """Dense footprint of one stiffness matrix of complex doubles."""
    order = 2 * (n_layers + 1)
    return order * order * BYTES_PER_ENTRY
