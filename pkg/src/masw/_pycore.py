"""Pure-Python kernels, selected when the compiled extension is unavailable.

Every expression is written in the same operation order as
``_core_impl.h`` so both backends agree bit for bit.
"""
import cmath
import math

import numpy as np

NAME = "python"

_NAN = complex(math.nan, math.nan)


def _sign(x):
    return (x > 0) - (x < 0)


def _assemble_rows(n_layers, h, rows, k):
    """Band rows as nested lists: band[i][j - i + 3] is entry (i, j)."""
    order = 2 * (n_layers + 1)
    band = [[0j] * 7 for _ in range(order)]
    for L in range(n_layers):
        r, s, inv_r, inv_s, g, rs, pc2, pbs = rows[L]
        x = complex(k * h[L], 0.0)
        xr = x * r
        xs = x * s
        Cr = cmath.cosh(xr)
        Sr = cmath.sinh(xr)
        Cs = cmath.cosh(xs)
        Ss = cmath.sinh(xs)
        D = 2.0 * (1.0 - Cr * Cs) + g * Sr * Ss
        f = k * pc2 / D if D else _NAN
        k11 = f * (inv_s * Cr * Ss - r * Sr * Cs)
        k12 = f * (Cr * Cs - rs * Sr * Ss - 1.0) - k * pbs
        k13 = f * (r * Sr - inv_s * Ss)
        k14 = f * (Cs - Cr)
        k22 = f * (inv_r * Sr * Cs - s * Cr * Ss)
        k24 = f * (s * Ss - inv_r * Sr)
        m14 = -k14
        m12 = -k12
        ke = ((k11, k12, k13, k14),
              (k12, k22, m14, k24),
              (k13, m14, k11, m12),
              (k14, k24, m12, k22))
        o = 2 * L
        for p in range(4):
            row = band[o + p]
            kp = ke[p]
            for q in range(4):
                row[q - p + 3] += kp[q]
    hk11, hk12, hk22 = rows[n_layers][:3]
    hs = ((k * hk11, k * hk12), (k * hk12, k * hk22))
    o = 2 * n_layers
    for p in range(2):
        row = band[o + p]
        for q in range(2):
            row[q - p + 3] += hs[p][q]
    return band


def _band_det_rows(band):
    order = len(band)
    det = complex(1.0, 0.0)
    for kk in range(order):
        bk = band[kk]
        piv = bk[3]
        if not piv:
            return 0j
        det = det * piv
        stop = min(kk + 4, order)
        for i in range(kk + 1, stop):
            bi = band[i]
            l = bi[kk - i + 3] / piv
            for j in range(kk + 1, stop):
                bi[j - i + 3] = bi[j - i + 3] - l * bk[j - kk + 3]
    return det


def _dense_det_rows(a):
    n = len(a)
    det = complex(1.0, 0.0)
    for kk in range(n):
        p = kk
        best = abs(a[kk][kk])
        for i in range(kk + 1, n):
            m = abs(a[i][kk])
            if m > best:
                best, p = m, i
        if best == 0.0:
            return 0j
        if p != kk:
            a[kk], a[p] = a[p], a[kk]
            det = -det
        piv = a[kk][kk]
        det = det * piv
        ak = a[kk]
        for i in range(kk + 1, n):
            ai = a[i]
            l = ai[kk] / piv
            for j in range(kk + 1, n):
                ai[j] = ai[j] - l * ak[j]
    return det


def assemble(h, terms, k):
    rows = np.asarray(terms, dtype=np.complex128).tolist()
    return np.array(_assemble_rows(len(h), list(h), rows, float(k)), dtype=np.complex128)


def band_det(band):
    return _band_det_rows(np.asarray(band, dtype=np.complex128).tolist())


def dense_det(a):
    return _dense_det_rows(np.asarray(a, dtype=np.complex128).tolist())


def det(h, terms, k):
    rows = np.asarray(terms, dtype=np.complex128).tolist()
    return _band_det_rows(_assemble_rows(len(h), list(h), rows, float(k)))


def scan(h, tables, ks, idx, out_n, out_count):
    n_vel = len(tables)
    if len(idx) == 0:
        return
    if n_vel < 2:
        raise ValueError("need at least two test velocities")
    h = list(h)
    n_layers = len(h)
    rows = np.asarray(tables, dtype=np.complex128).tolist()
    for w in np.asarray(idx).tolist():
        k = float(ks[w])
        d = _band_det_rows(_assemble_rows(n_layers, h, rows[0], k))
        s_old = _sign(d.real)
        count = 1
        found = -1
        for n in range(1, n_vel):
            d = _band_det_rows(_assemble_rows(n_layers, h, rows[n], k))
            count += 1
            s_new = _sign(d.real)
            if s_new != s_old:
                found = n
                break
            s_old = s_new
        out_n[w] = found
        out_count[w] = count


def fill(h, tables, ks, start, stop, out):
    n_vel = len(tables)
    h = list(h)
    n_layers = len(h)
    rows = np.asarray(tables, dtype=np.complex128).tolist()
    flat = out.reshape(-1)
    for cell in range(start, stop):
        w, n = divmod(cell, n_vel)
        flat[cell] = _band_det_rows(_assemble_rows(n_layers, h, rows[n], float(ks[w])))
