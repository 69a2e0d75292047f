/* Stiffness assembly and banded elimination on plain C doubles.
 *
 * Complex operations replicate CPython's own (complex product, quotient,
 * cmath.cosh/sinh) operation for operation so the compiled kernels and the
 * pure-Python fallback in _pycore.py produce identical bits. Build with
 * -ffp-contract=off; FMA contraction would break that. CPython's cmath
 * gets sin/cos fused into sincos by the compiler, and glibc's sincos can
 * differ from cos in the last ulp, so sincos is called explicitly.
 */
#ifndef MASW_CORE_IMPL_H
#define MASW_CORE_IMPL_H

#ifndef _GNU_SOURCE
#define _GNU_SOURCE
#endif

#include <math.h>
#include <float.h>
#include <string.h>

typedef struct { double re, im; } cpx;

#define TERMS_PER_LAYER 8
#define BAND_WIDTH 7
#define CM_LOG_LARGE_DOUBLE (log(DBL_MAX / 4.))

static inline cpx mk(double re, double im) { cpx z = {re, im}; return z; }
static inline cpx c_add(cpx a, cpx b) { return mk(a.re + b.re, a.im + b.im); }
static inline cpx c_sub(cpx a, cpx b) { return mk(a.re - b.re, a.im - b.im); }
static inline cpx c_neg(cpx a) { return mk(-a.re, -a.im); }
static inline cpx c_mul(cpx a, cpx b) {
    return mk(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}
/* Same branch structure as CPython's _Py_c_quot; b == 0 yields 0 there
 * (with an error flag), callers never divide by an exact zero. */
static inline cpx c_div(cpx a, cpx b) {
    double abs_breal = b.re < 0 ? -b.re : b.re;
    double abs_bimag = b.im < 0 ? -b.im : b.im;
    if (abs_breal >= abs_bimag) {
        if (abs_breal == 0.0) {
            return mk(NAN, NAN);
        }
        double ratio = b.im / b.re;
        double denom = b.re + b.im * ratio;
        return mk((a.re + a.im * ratio) / denom, (a.im - a.re * ratio) / denom);
    }
    else if (abs_bimag >= abs_breal) {
        double ratio = b.re / b.im;
        double denom = b.re * ratio + b.im;
        return mk((a.re * ratio + a.im) / denom, (a.im * ratio - a.re) / denom);
    }
    return mk(NAN, NAN);
}
static inline cpx c_cosh(cpx z) {
    double s, c;
    sincos(z.im, &s, &c);
    if (fabs(z.re) > CM_LOG_LARGE_DOUBLE) {
        double x = z.re - copysign(1., z.re);
        return mk(c * cosh(x) * M_E, s * sinh(x) * M_E);
    }
    return mk(c * cosh(z.re), s * sinh(z.re));
}
static inline cpx c_sinh(cpx z) {
    double s, c;
    sincos(z.im, &s, &c);
    if (fabs(z.re) > CM_LOG_LARGE_DOUBLE) {
        double x = z.re - copysign(1., z.re);
        return mk(c * sinh(x) * M_E, s * cosh(x) * M_E);
    }
    return mk(c * sinh(z.re), s * cosh(z.re));
}
static inline int sign_of(double x) { return (x > 0) - (x < 0); }

/* band[i*7 + (j - i + 3)] holds entry (i, j) of an order-n heptadiagonal. */
static inline void band_add(cpx *band, int i, int j, cpx v) {
    cpx *slot = band + i * BAND_WIDTH + (j - i + 3);
    *slot = c_add(*slot, v);
}

static void assemble_band(int n_layers, const double *h, const cpx *terms,
                          double k, cpx *band)
{
    const int order = 2 * (n_layers + 1);
    const cpx K = mk(k, 0.0), ONE = mk(1.0, 0.0), TWO = mk(2.0, 0.0);
    memset(band, 0, sizeof(cpx) * order * BAND_WIDTH);

    for (int L = 0; L < n_layers; ++L) {
        const cpx *t = terms + L * TERMS_PER_LAYER;
        cpx r = t[0], s = t[1], inv_r = t[2], inv_s = t[3];
        cpx g = t[4], rs = t[5], pc2 = t[6], pbs = t[7];
        cpx x = mk(k * h[L], 0.0);
        cpx xr = c_mul(x, r), xs = c_mul(x, s);
        cpx Cr = c_cosh(xr), Sr = c_sinh(xr), Cs = c_cosh(xs), Ss = c_sinh(xs);

        cpx D = c_add(c_mul(TWO, c_sub(ONE, c_mul(Cr, Cs))),
                      c_mul(c_mul(g, Sr), Ss));
        cpx f = c_div(c_mul(K, pc2), D);
        cpx k11 = c_mul(f, c_sub(c_mul(c_mul(inv_s, Cr), Ss), c_mul(c_mul(r, Sr), Cs)));
        cpx k12 = c_sub(c_mul(f, c_sub(c_sub(c_mul(Cr, Cs), c_mul(c_mul(rs, Sr), Ss)), ONE)),
                        c_mul(K, pbs));
        cpx k13 = c_mul(f, c_sub(c_mul(r, Sr), c_mul(inv_s, Ss)));
        cpx k14 = c_mul(f, c_sub(Cs, Cr));
        cpx k22 = c_mul(f, c_sub(c_mul(c_mul(inv_r, Sr), Cs), c_mul(c_mul(s, Cr), Ss)));
        cpx k24 = c_mul(f, c_sub(c_mul(s, Ss), c_mul(inv_r, Sr)));
        cpx m14 = c_neg(k14), m12 = c_neg(k12);

        cpx ke[4][4] = {
            {k11, k12, k13, k14},
            {k12, k22, m14, k24},
            {k13, m14, k11, m12},
            {k14, k24, m12, k22},
        };
        const int o = 2 * L;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
                band_add(band, o + p, o + q, ke[p][q]);
    }

    const cpx *t = terms + n_layers * TERMS_PER_LAYER;
    cpx hs[2][2] = {
        {c_mul(K, t[0]), c_mul(K, t[1])},
        {c_mul(K, t[1]), c_mul(K, t[2])},
    };
    const int o = 2 * n_layers;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            band_add(band, o + p, o + q, hs[p][q]);
}

/* Elimination in natural order, destroys band. An exact zero pivot means
 * the matrix is treated as singular. */
static cpx band_det_inplace(int order, cpx *band)
{
    cpx det = mk(1.0, 0.0);
    for (int kk = 0; kk < order; ++kk) {
        cpx *bk = band + kk * BAND_WIDTH;
        cpx piv = bk[3];
        if (piv.re == 0.0 && piv.im == 0.0)
            return mk(0.0, 0.0);
        det = c_mul(det, piv);
        int stop = kk + 4 < order ? kk + 4 : order;
        for (int i = kk + 1; i < stop; ++i) {
            cpx *bi = band + i * BAND_WIDTH;
            cpx l = c_div(bi[kk - i + 3], piv);
            for (int j = kk + 1; j < stop; ++j)
                bi[j - i + 3] = c_sub(bi[j - i + 3], c_mul(l, bk[j - kk + 3]));
        }
    }
    return det;
}

static inline cpx det_at(int n_layers, const double *h, const cpx *terms,
                         double k, cpx *scratch)
{
    assemble_band(n_layers, h, terms, k, scratch);
    return band_det_inplace(2 * (n_layers + 1), scratch);
}

/* Dense elimination with partial pivoting; reference cost O(n^3). */
static cpx dense_det_inplace(int n, cpx *a)
{
    cpx det = mk(1.0, 0.0);
    for (int kk = 0; kk < n; ++kk) {
        int p = kk;
        double best = hypot(a[kk * n + kk].re, a[kk * n + kk].im);
        for (int i = kk + 1; i < n; ++i) {
            double m = hypot(a[i * n + kk].re, a[i * n + kk].im);
            if (m > best) { best = m; p = i; }
        }
        if (best == 0.0)
            return mk(0.0, 0.0);
        if (p != kk) {
            for (int j = 0; j < n; ++j) {
                cpx tmp = a[kk * n + j]; a[kk * n + j] = a[p * n + j]; a[p * n + j] = tmp;
            }
            det = c_neg(det);
        }
        cpx piv = a[kk * n + kk];
        det = c_mul(det, piv);
        for (int i = kk + 1; i < n; ++i) {
            cpx l = c_div(a[i * n + kk], piv);
            for (int j = kk + 1; j < n; ++j)
                a[i * n + j] = c_sub(a[i * n + j], c_mul(l, a[kk * n + j]));
        }
    }
    return det;
}

#endif
