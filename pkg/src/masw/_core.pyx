# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors masw._pycore function for function."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from "_core_impl.h" nogil:
    ctypedef struct cpx:
        double re
        double im
    int TERMS_PER_LAYER
    int BAND_WIDTH
    int sign_of(double x)
    void assemble_band(int n_layers, const double *h, const cpx *terms,
                       double k, cpx *band)
    cpx band_det_inplace(int order, cpx *band)
    cpx det_at(int n_layers, const double *h, const cpx *terms,
               double k, cpx *scratch)
    cpx dense_det_inplace(int n, cpx *a)

NAME = "compiled"


cdef inline const cpx* _cpx_ptr(const double[::1] flat):
    return <const cpx*> &flat[0]


def assemble(const double[::1] h, terms, double k):
    """Banded (order, 7) complex matrix for one velocity's terms row."""
    cdef int n_layers = h.shape[0]
    cdef int order = 2 * (n_layers + 1)
    cdef const double[::1] t = np.ascontiguousarray(terms, dtype=np.complex128).reshape(-1).view(np.float64)
    out = np.empty((order, 7), dtype=np.complex128)
    cdef double[::1] o = out.reshape(-1).view(np.float64)
    assemble_band(n_layers, &h[0], _cpx_ptr(t), k, <cpx*> &o[0])
    return out


def band_det(band):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] work = np.array(band, dtype=np.complex128, order="C")
    cdef int order = work.shape[0]
    cdef double[::1] w = work.reshape(-1).view(np.float64)
    cdef cpx d = band_det_inplace(order, <cpx*> &w[0])
    return complex(d.re, d.im)


def dense_det(a):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] work = np.array(a, dtype=np.complex128, order="C")
    cdef int n = work.shape[0]
    if n == 0:
        return 1 + 0j
    cdef double[::1] w = work.reshape(-1).view(np.float64)
    cdef cpx d = dense_det_inplace(n, <cpx*> &w[0])
    return complex(d.re, d.im)


def det(const double[::1] h, terms, double k):
    cdef int n_layers = h.shape[0]
    cdef const double[::1] t = np.ascontiguousarray(terms, dtype=np.complex128).reshape(-1).view(np.float64)
    cdef cpx *scratch = <cpx*> malloc(sizeof(cpx) * 2 * (n_layers + 1) * 7)
    cdef cpx d
    try:
        d = det_at(n_layers, &h[0], _cpx_ptr(t), k, scratch)
    finally:
        free(scratch)
    return complex(d.re, d.im)


def scan(const double[::1] h, tables, const double[::1] ks,
         const long long[::1] idx, long long[::1] out_n, long long[::1] out_count):
    """First sign change per listed wavelength, evaluating velocities lazily.

    ``tables`` has shape (n_velocities, n_layers + 1, 8). ``out_n[w]`` gets
    the index of the first velocity whose determinant sign differs from its
    predecessor (-1 if none) and ``out_count[w]`` the determinants computed.
    Only the slots listed in ``idx`` are written.
    """
    cdef int n_layers = h.shape[0]
    cdef Py_ssize_t n_vel = tables.shape[0]
    cdef Py_ssize_t stride = (n_layers + 1) * 8
    cdef const double[::1] t = np.ascontiguousarray(tables, dtype=np.complex128).reshape(-1).view(np.float64)
    cdef const cpx *tp = _cpx_ptr(t)
    cdef cpx *scratch
    cdef Py_ssize_t m, n, w
    cdef long long found, count
    cdef int s_old, s_new
    cdef cpx d
    if idx.shape[0] == 0:
        return
    if n_vel < 2:
        raise ValueError("need at least two test velocities")
    scratch = <cpx*> malloc(sizeof(cpx) * 2 * (n_layers + 1) * 7)
    with nogil:
        for m in range(idx.shape[0]):
            w = idx[m]
            d = det_at(n_layers, &h[0], tp, ks[w], scratch)
            s_old = sign_of(d.re)
            count = 1
            found = -1
            for n in range(1, n_vel):
                d = det_at(n_layers, &h[0], tp + n * stride, ks[w], scratch)
                count += 1
                s_new = sign_of(d.re)
                if s_new != s_old:
                    found = n
                    break
                s_old = s_new
            out_n[w] = found
            out_count[w] = count
    free(scratch)


def fill(const double[::1] h, tables, const double[::1] ks,
         Py_ssize_t start, Py_ssize_t stop, out):
    """Determinants for flat grid cells [start, stop) of out (n_wavelengths, n_velocities)."""
    cdef int n_layers = h.shape[0]
    cdef Py_ssize_t n_vel = tables.shape[0]
    cdef Py_ssize_t stride = (n_layers + 1) * 8
    cdef const double[::1] t = np.ascontiguousarray(tables, dtype=np.complex128).reshape(-1).view(np.float64)
    cdef const cpx *tp = _cpx_ptr(t)
    if out.dtype != np.complex128 or not out.flags.c_contiguous:
        raise ValueError("out must be a C-contiguous complex128 array")
    cdef double[::1] o = out.reshape(-1).view(np.float64)
    cdef cpx *op = <cpx*> &o[0]
    cdef cpx *scratch
    cdef Py_ssize_t cell, w, n
    if stop <= start:
        return
    scratch = <cpx*> malloc(sizeof(cpx) * 2 * (n_layers + 1) * 7)
    with nogil:
        for cell in range(start, stop):
            w = cell // n_vel
            n = cell - w * n_vel
            op[cell] = det_at(n_layers, &h[0], tp + n * stride, ks[w], scratch)
    free(scratch)
