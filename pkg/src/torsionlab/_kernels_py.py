"""NumPy fallback for the compiled Sturm kernels.

Counts are vectorized over many shifts at once, so bisection for a block of
eigenvalue indices costs one pass over the matrix per halving step.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_TINY = np.finfo(float).tiny
# off-centre split for the periodic bisection (see the compiled kernel)
SPLIT = 0.5 + 0.0137 * 0.6180339887498949


def _pivmin(*offdiags) -> float:
    m = 1.0
    for e in offdiags:
        if len(e):
            m = max(m, float(np.max(e * e)))
    return _TINY * m


def _fix(q, pivmin):
    return np.where(np.abs(q) < pivmin, -pivmin, q)


def _count_tri(d, e, x, pivmin):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = e * e
    q = _fix(d[0] - x, pivmin)
    neg = (q < 0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = _fix(d[i] - x - e2[i - 1] / q, pivmin)
        neg += q < 0
    return neg


def _solve_w(d, e, c, x, pivmin):
    # w = v^T (T' - x)^{-1} v, v = e_1 + e_n, by pivoted tridiagonal LU
    n = d.shape[0]
    m = x.shape[0]
    dd = d[:, None] - x[None, :]
    dd[0] -= c
    dd[-1] -= c
    du = np.repeat(e[:, None], m, axis=1)
    dl = du.copy()
    du2 = np.zeros_like(du)
    piv = np.zeros((n - 1, m), dtype=bool)
    for i in range(n - 1):
        swap = np.abs(dd[i]) < np.abs(dl[i])
        piv[i] = swap
        di = np.where(dd[i] == 0.0, pivmin, dd[i])
        fact_ns = dl[i] / di
        fact_s = di / np.where(swap, dl[i], 1.0)
        dd_next_ns = dd[i + 1] - fact_ns * du[i]
        dd_next_s = du[i] - fact_s * dd[i + 1]
        du_s = dd[i + 1].copy()
        dd[i] = np.where(swap, dl[i], di)
        dl[i] = np.where(swap, fact_s, fact_ns)
        if i < n - 2:
            du2[i] = np.where(swap, du[i + 1], 0.0)
            du[i + 1] = np.where(swap, -fact_s * du[i + 1], du[i + 1])
        du[i] = np.where(swap, du_s, du[i])
        dd[i + 1] = np.where(swap, dd_next_s, dd_next_ns)
    dd[-1] = np.where(dd[-1] == 0.0, pivmin, dd[-1])
    b = np.zeros((n, m))
    b[0] = 1.0
    b[-1] += 1.0
    for i in range(n - 1):
        bi, bn = b[i].copy(), b[i + 1].copy()
        b[i] = np.where(piv[i], bn, bi)
        b[i + 1] = np.where(piv[i], bi - dl[i] * bn, bn - dl[i] * bi)
    b[-1] /= dd[-1]
    b[-2] = (b[-2] - du[-1] * b[-1]) / dd[-2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i]
    return b[0] + b[-1]


def _count_periodic(d, e, c, x, pivmin):
    # bordered-matrix inertia for A = T' + c v v^T; see the compiled kernel
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = d.shape[0]
    e2 = e * e
    q = _fix(d[0] - c - x, pivmin)
    neg = (q < 0).astype(np.int64)
    for i in range(1, n):
        q = _fix(d[i] - x - e2[i - 1] / q - (c if i == n - 1 else 0.0), pivmin)
        neg += q < 0
    w = _solve_w(d, e, c, x, pivmin)
    s0 = -1.0 / c
    neg += s0 - w < 0
    neg -= int(s0 < 0)
    return neg


def sturm_count(d, e, x):
    """Number of eigenvalues of tridiag(e, d, e) strictly below ``x``."""
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    return int(_count_tri(d, e, x, _pivmin(e))[0])


def sturm_count_periodic(d, e, c, x):
    """Number of eigenvalues below ``x`` of tridiag(e, d, e) plus corner ``c``."""
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    return int(_count_periodic(d, e, float(c), x, max(_pivmin(e), _TINY * c * c))[0])


def _bisect(counter, idx, lo, hi, rtol, atol, split=0.5):
    idx = np.asarray(idx, dtype=np.int64)
    a = np.full(idx.shape, float(lo))
    b = np.full(idx.shape, float(hi))
    while True:
        tol = np.maximum(rtol * np.maximum(np.abs(a), np.abs(b)), atol)
        active = (b - a) > tol
        if not active.any():
            break
        mid = a + split * (b - a)
        above = counter(mid[active]) > idx[active]
        am, bm = a[active], b[active]
        bm = np.where(above, mid[active], bm)
        am = np.where(above, am, mid[active])
        a[active], b[active] = am, bm
    return 0.5 * (a + b)


def bisect_tridiag(d, e, idx, lo, hi, rtol, atol):
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    pm = _pivmin(e)
    return _bisect(lambda x: _count_tri(d, e, x, pm), idx, lo, hi, rtol, atol)


def bisect_periodic(d, e, c, idx, lo, hi, rtol, atol):
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    pm = max(_pivmin(e), _TINY * c * c)
    return _bisect(lambda x: _count_periodic(d, e, float(c), x, pm), idx, lo, hi, rtol, atol, SPLIT)
