# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Sturm-count and bisection kernels for tridiagonal and periodic matrices."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmax
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "compiled"

cdef double SPLIT = 0.5 + 0.0137 * 0.6180339887498949


cdef inline double _pivmin(const double[::1] e) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = 1.0
    for i in range(e.shape[0]):
        m = fmax(m, e[i] * e[i])
    return 2.2250738585072014e-308 * m


cdef Py_ssize_t _count_tri(const double[::1] d, const double[::1] e,
                           double x, double pivmin) noexcept nogil:
    cdef Py_ssize_t i, n = d.shape[0], neg = 0
    cdef double q = d[0] - x
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0:
        neg += 1
    for i in range(1, n):
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0:
            neg += 1
    return neg


cdef double _solve_w(const double[::1] d, const double[::1] e, double c, double x,
                     double pivmin, double* dd, double* du, double* du2,
                     double* dl, double* b, int* piv) noexcept nogil:
    # w = v^T (T' - x)^{-1} v with v = e_1 + e_n, by tridiagonal LU with
    # partial pivoting (the gttrf/gttrs scheme). A backward-stable solve keeps
    # w accurate even when v is orthogonal to a near-null vector of T' - x.
    cdef Py_ssize_t i, n = d.shape[0]
    cdef double fact, temp
    for i in range(n):
        dd[i] = d[i] - x
        b[i] = 0.0
    dd[0] -= c
    dd[n - 1] -= c
    b[0] = 1.0
    b[n - 1] += 1.0
    for i in range(n - 1):
        du[i] = e[i]
        dl[i] = e[i]
        du2[i] = 0.0
    for i in range(n - 1):
        if fabs(dd[i]) >= fabs(dl[i]):
            piv[i] = 0
            if dd[i] == 0.0:
                dd[i] = pivmin
            fact = dl[i] / dd[i]
            dl[i] = fact
            dd[i + 1] -= fact * du[i]
        else:
            piv[i] = 1
            fact = dd[i] / dl[i]
            dd[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = dd[i + 1]
            dd[i + 1] = temp - fact * dd[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
    if dd[n - 1] == 0.0:
        dd[n - 1] = pivmin
    for i in range(n - 1):
        if piv[i] == 0:
            b[i + 1] -= dl[i] * b[i]
        else:
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - dl[i] * b[i]
    b[n - 1] /= dd[n - 1]
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i]
    return b[0] + b[n - 1]


cdef Py_ssize_t _count_periodic(const double[::1] d, const double[::1] e, double c,
                                double x, double pivmin, double* work, int* piv) noexcept nogil:
    # A = T' + c v v^T with v = e_1 + e_n and T' tridiagonal with ends d - c.
    # Inertia of the bordered matrix [[T' - x, v], [v^T, -1/c]] gives
    # nu(A - x) = nu(T' - x) + nu(-1/c - w) - nu(-1/c).
    cdef Py_ssize_t i, n = d.shape[0], neg = 0
    cdef double q, w, s0
    q = d[0] - c - x
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0:
        neg += 1
    for i in range(1, n):
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if i == n - 1:
            q -= c
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0:
            neg += 1
    w = _solve_w(d, e, c, x, pivmin, work, work + n, work + 2 * n, work + 3 * n, work + 4 * n, piv)
    s0 = -1.0 / c
    if s0 - w < 0:
        neg += 1
    if s0 < 0:
        neg -= 1
    return neg


def sturm_count(double[::1] d, double[::1] e, double x):
    """Number of eigenvalues of tridiag(e, d, e) strictly below ``x``."""
    cdef double pm = _pivmin(e)
    cdef Py_ssize_t r
    with nogil:
        r = _count_tri(d, e, x, pm)
    return r


def sturm_count_periodic(double[::1] d, double[::1] e, double c, double x):
    """Number of eigenvalues below ``x`` of tridiag(e, d, e) plus corner ``c``."""
    cdef double pm = fmax(_pivmin(e), 2.2250738585072014e-308 * c * c)
    cdef Py_ssize_t r, n = d.shape[0]
    cdef double* work = <double*> malloc(5 * n * sizeof(double))
    cdef int* piv = <int*> malloc(n * sizeof(int))
    try:
        with nogil:
            r = _count_periodic(d, e, c, x, pm, work, piv)
    finally:
        free(work)
        free(piv)
    return r


def bisect_tridiag(double[::1] d, double[::1] e, long[::1] idx,
                   double lo, double hi, double rtol, double atol):
    cdef Py_ssize_t j, k, m = idx.shape[0]
    cdef double a, b, mid, pm = _pivmin(e)
    out = np.empty(m)
    cdef double[::1] ov = out
    with nogil:
        for j in range(m):
            k = idx[j]
            a = lo
            b = hi
            while b - a > fmax(rtol * fmax(fabs(a), fabs(b)), atol):
                mid = 0.5 * (a + b)
                if _count_tri(d, e, mid, pm) > k:
                    b = mid
                else:
                    a = mid
            ov[j] = 0.5 * (a + b)
    return out


def bisect_periodic(double[::1] d, double[::1] e, double c, long[::1] idx,
                    double lo, double hi, double rtol, double atol):
    cdef Py_ssize_t j, k, m = idx.shape[0]
    cdef double a, b, mid, pm = fmax(_pivmin(e), 2.2250738585072014e-308 * c * c)
    cdef Py_ssize_t n = d.shape[0]
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef double* work = <double*> malloc(5 * n * sizeof(double))
    cdef int* piv = <int*> malloc(n * sizeof(int))
    try:
        with nogil:
            for j in range(m):
                k = idx[j]
                a = lo
                b = hi
                while b - a > fmax(rtol * fmax(fabs(a), fabs(b)), atol):
                    # off-centre split: dyadic points of flat spectra can sit
                    # exactly on an eigenvalue of the split matrix
                    mid = a + SPLIT * (b - a)
                    if _count_periodic(d, e, c, mid, pm, work, piv) > k:
                        b = mid
                    else:
                        a = mid
                ov[j] = 0.5 * (a + b)
    finally:
        free(work)
        free(piv)
    return out
