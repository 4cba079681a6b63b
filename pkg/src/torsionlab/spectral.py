"""Eigenvalues, eigenvectors and zeta-regularized determinants of 1D operators.

Determinants are normalized so that ``det(-d^2, Dirichlet on [0, L]) = 2L``.
In that normalization the Gel'fand-Yaglom formulas read, with ``y'' = V y``:

====  ===========================  ==========
bc    initial data ``(y, y')``     det
====  ===========================  ==========
DD    (0, 1)                       2 y(b)
ND    (1, 0)                       2 y(b)
DN    (0, 1)                       2 y'(b)
NN    (1, 0)                       2 y'(b)
P     both unit solutions          y1(b) + y2'(b) - 2
====  ===========================  ==========

A zero mode is removed by differentiating in the spectral shift ``mu``:
``det' = d/dmu det(A + mu)`` at ``mu = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eig_banded, eigh_tridiagonal, solve_banded

from ._backend import kernels
from .deformation import DeformationProfile, evaluate
from .operator1d import BC, BoundarySpec, DiscreteOperator

__all__ = [
    "SpectrumResult",
    "LogDet",
    "ZeroModeError",
    "eigenvalues",
    "eigenpairs",
    "eigenvalues_below",
    "eigenvector",
    "gelfand_yaglom_logdet",
    "regularized_logdet",
    "flat_logdet",
    "ratio_series_logdet",
    "richardson",
    "witten_potential_fn",
]

_EPS = np.finfo(float).eps


class ZeroModeError(ValueError):
    """Raised when an unregularized determinant meets a kernel."""


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    grid_h: float
    kernel_threshold: float
    multiplicity_tolerance: float = 1e-8
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def kernel_dim(self) -> int:
        return int(np.count_nonzero(self.eigenvalues < self.kernel_threshold))

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues >= self.kernel_threshold]


@dataclass(frozen=True)
class LogDet:
    value: float
    zero_modes_removed: int = 0
    method: str = "gelfand_yaglom"
    error: float = 0.0


# ---------------------------------------------------------------------------
# eigenvalues


def _zigzag(n: int) -> np.ndarray:
    """Ordering of cycle vertices giving a bandwidth-2 matrix."""
    order = [0]
    lo, hi = 1, n - 1
    while lo <= hi:
        order.append(lo)
        if hi != lo:
            order.append(hi)
        lo += 1
        hi -= 1
    return np.array(order)


def periodic_to_banded(op: DiscreteOperator):
    """Permute a periodic operator to symmetric pentadiagonal form.

    Returns ``(perm, d, e1, e2)`` with ``A[perm][:, perm]`` having diagonal
    ``d`` and first/second super-diagonals ``e1``/``e2``.
    """
    n = op.n
    perm = _zigzag(n)
    pos = np.empty(n, dtype=np.int64)
    pos[perm] = np.arange(n)
    e1 = np.zeros(n - 1)
    e2 = np.zeros(n - 2)
    u = np.arange(n)
    v = np.append(np.arange(1, n), 0)
    vals = np.append(op.offdiag, op.corner)
    pu, pv = pos[u], pos[v]
    first = np.minimum(pu, pv)
    gap = np.abs(pv - pu)
    assert np.all(gap <= 2)
    np.add.at(e1, first[gap == 1], vals[gap == 1])
    np.add.at(e2, first[gap == 2], vals[gap == 2])
    return perm, op.diag[perm].copy(), e1, e2


def _default_threshold(op: DiscreteOperator, ev: np.ndarray) -> float:
    lo, hi = op.gershgorin()
    noise = 64.0 * _EPS * max(abs(lo), abs(hi))
    pos = ev[ev > max(noise * 1e3, 1e-6)]
    ref = float(pos[0]) if pos.size else 1.0
    return max(1e-8 * ref, noise * 1e2)


def eigenvalues(
    op: DiscreteOperator,
    k: int,
    method: str = "auto",
    rtol: float = 1e-12,
    kernel_threshold: float | None = None,
) -> SpectrumResult:
    """Lowest ``k`` eigenvalues, ascending.

    ``method`` is ``"bisect"`` (Sturm bisection in the active backend),
    ``"lapack"`` (scipy band solvers) or ``"auto"`` (bisection when the
    compiled kernels are present, LAPACK otherwise).
    """
    n = op.n
    if k > n:
        raise ValueError(f"requested {k} eigenvalues of a {n}x{n} operator")
    if k <= 0:
        return SpectrumResult(np.empty(0), op.h, kernel_threshold or 0.0)
    if method == "auto":
        method = "bisect" if kernels.BACKEND == "compiled" else "lapack"
    lo, hi = op.gershgorin()
    atol = 4.0 * _EPS * max(abs(lo), abs(hi))
    idx = np.arange(k, dtype=np.int64)
    if op.periodic:
        if method == "bisect":
            ev = kernels.bisect_periodic(op.diag, op.offdiag, op.corner, idx, lo, hi, rtol, atol)
        else:
            _, d, e1, e2 = periodic_to_banded(op)
            ab = np.vstack([d, np.append(e1, 0.0), np.append(e2, [0.0, 0.0])])
            ev = eig_banded(ab, lower=True, eigvals_only=True, select="i", select_range=(0, k - 1))
    else:
        if method == "bisect":
            ev = kernels.bisect_tridiag(op.diag, op.offdiag, idx, lo, hi, rtol, atol)
        else:
            ev = eigh_tridiagonal(op.diag, op.offdiag, eigvals_only=True, select="i", select_range=(0, k - 1))
    ev = np.sort(np.asarray(ev, dtype=float))
    thr = kernel_threshold if kernel_threshold is not None else _default_threshold(op, ev)
    return SpectrumResult(ev, op.h, thr)


def eigenvalues_below(op: DiscreteOperator, upper: float, method: str = "auto") -> np.ndarray:
    """All eigenvalues below ``upper``, ascending."""
    if method == "auto":
        method = "lapack"
    if method == "bisect":
        if op.periodic:
            raise NotImplementedError("count-based selection is tridiagonal only")
        m = kernels.sturm_count(op.diag, op.offdiag, upper)
        return eigenvalues(op, m, method="bisect").eigenvalues if m else np.empty(0)
    if op.periodic:
        _, d, e1, e2 = periodic_to_banded(op)
        ab = np.vstack([d, np.append(e1, 0.0), np.append(e2, [0.0, 0.0])])
        return eig_banded(ab, lower=True, eigvals_only=True, select="v", select_range=(-np.inf, upper))
    return eigh_tridiagonal(op.diag, op.offdiag, eigvals_only=True, select="v", select_range=(-np.inf, upper))


def eigenpairs(op: DiscreteOperator, k: int | None = None, upper: float | None = None) -> SpectrumResult:
    """Eigenvalues with ``h``-weighted orthonormal nodal eigenvectors.

    Either the lowest ``k`` or all eigenvalues below ``upper``. Vectors are
    normalized so that ``h * sum(w * u**2) = 1`` with the trapezoid weights.
    """
    if op.periodic:
        perm, d, e1, e2 = periodic_to_banded(op)
        ab = np.vstack([d, np.append(e1, 0.0), np.append(e2, [0.0, 0.0])])
        if upper is not None:
            w, v = eig_banded(ab, lower=True, select="v", select_range=(-np.inf, upper))
        else:
            w, v = eig_banded(ab, lower=True, select="i", select_range=(0, k - 1))
        vec = np.empty_like(v)
        vec[perm] = v
    else:
        if upper is not None:
            w, vec = eigh_tridiagonal(op.diag, op.offdiag, select="v", select_range=(-np.inf, upper))
        else:
            w, vec = eigh_tridiagonal(op.diag, op.offdiag, select="i", select_range=(0, k - 1))
    u = op.to_nodal(vec) / math.sqrt(op.h)
    return SpectrumResult(w, op.h, _default_threshold(op, w), eigenvectors=u)


def _banded_shifted(op: DiscreteOperator, lam: float):
    if op.periodic:
        perm, d, e1, e2 = periodic_to_banded(op)
        ab = np.zeros((5, op.n))
        ab[2] = d - lam
        ab[1, 1:] = e1
        ab[3, :-1] = e1
        ab[0, 2:] = e2
        ab[4, :-2] = e2
        return (2, 2), ab, perm
    ab = np.zeros((3, op.n))
    ab[1] = op.diag - lam
    ab[0, 1:] = op.offdiag
    ab[2, :-1] = op.offdiag
    return (1, 1), ab, None


def eigenvector(op: DiscreteOperator, lam: float, max_iter: int = 20, seed: int = 0) -> np.ndarray:
    """Nodal eigenvector for ``lam`` by inverse iteration.

    Normalized in the ``h``-weighted trapezoid norm and sign-fixed so that
    its largest entry is positive.
    """
    lo, hi = op.gershgorin()
    scale = max(abs(lo), abs(hi))
    shift = lam - 16.0 * _EPS * scale  # keep the shifted matrix nonsingular
    lu, ab, perm = _banded_shifted(op, shift)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.n)
    v /= np.linalg.norm(v)
    tol = max(1e-8, 1e-12 * scale)
    for _ in range(max_iter):
        rhs = v[perm] if perm is not None else v
        w = solve_banded(lu, ab, rhs)
        if perm is not None:
            x = np.empty_like(w)
            x[perm] = w
            w = x
        v = w / np.linalg.norm(w)
        res = np.linalg.norm(op.matvec(v) - lam * v)
        if res <= tol:
            break
    else:
        raise RuntimeError(f"inverse iteration did not converge at lambda={lam!r} (residual {res:.3e})")
    u = op.to_nodal(v) / math.sqrt(op.h)
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    return u


# ---------------------------------------------------------------------------
# Gel'fand-Yaglom determinants


def witten_potential_fn(profile: DeformationProfile, sign: int, twist: float = 1.0) -> Callable[[float], float]:
    """Scalar callable ``s -> f'^2 + sign * twist * f''``."""
    sgn = float(sign) * float(twist)

    def V(s: float) -> float:
        _, f1, f2 = evaluate(profile, s)
        return f1 * f1 + sgn * f2

    return V


def _zero(_s: float) -> float:
    return 0.0


_INIT = {BC.DIRICHLET: (0.0, 1.0), BC.NEUMANN: (1.0, 0.0)}


def _propagate(V, a, b, y0, mu, with_sensitivity, breakpoints, rtol):
    """Integrate ``y'' = (V + mu) y`` and optionally ``z'' = (V + mu) z + y``."""
    knots = [a]
    if breakpoints is not None:
        knots += [float(p) for p in np.sort(np.asarray(breakpoints, dtype=float)) if a < p < b]
    knots.append(b)

    def rhs(s, w):
        q = V(s) + mu
        if with_sensitivity:
            return [w[1], q * w[0], w[3], q * w[2] + w[0]]
        return [w[1], q * w[0]]

    state = list(y0) + ([0.0, 0.0] if with_sensitivity else [])
    for p, q in zip(knots[:-1], knots[1:]):
        if q - p <= 0.0:
            continue
        sol = solve_ivp(rhs, (p, q), state, method="DOP853", rtol=rtol, atol=1e-14 * (1.0 + np.abs(state).max()))
        if not sol.success:
            raise RuntimeError(f"initial-value solve failed on [{p}, {q}]: {sol.message}")
        state = sol.y[:, -1]
    return np.asarray(state, dtype=float)


def _gy_value(V, a, b, bc: BoundarySpec, mu, sensitivity, breakpoints, rtol, slopes=(0.0, 0.0)):
    """Return ``(det, d det / dmu)`` (the derivative only when requested).

    ``slopes`` turns Neumann ends into Robin ends ``u' = kappa u`` (``kappa``
    in the coordinate direction at both ends).
    """
    if bc.periodic:
        s1 = _propagate(V, a, b, (1.0, 0.0), mu, sensitivity, breakpoints, rtol)
        s2 = _propagate(V, a, b, (0.0, 1.0), mu, sensitivity, breakpoints, rtol)
        det = s1[0] + s2[1] - 2.0
        ddet = s1[2] + s2[3] if sensitivity else None
        return det, ddet
    ka, kb = slopes
    y0 = (0.0, 1.0) if bc.left is BC.DIRICHLET else (1.0, ka)
    st = _propagate(V, a, b, y0, mu, sensitivity, breakpoints, rtol)
    if bc.right is BC.DIRICHLET:
        det, ddet = 2.0 * st[0], (2.0 * st[2] if sensitivity else None)
    else:
        det = 2.0 * (st[1] - kb * st[0])
        ddet = 2.0 * (st[3] - kb * st[2]) if sensitivity else None
    return det, ddet


def gelfand_yaglom_logdet(
    V: Callable[[float], float] | None,
    a: float,
    b: float,
    bc: BoundarySpec,
    breakpoints: Sequence[float] | None = None,
    rtol: float = 1e-11,
    zero_tol: float = 1e-8,
    slopes: tuple[float, float] = (0.0, 0.0),
) -> LogDet:
    """``log det(-d^2 + V)`` on ``[a, b]`` without kernel.

    Raises :class:`ZeroModeError` when ``|det|`` is below ``zero_tol`` times
    the determinant scale, which means :func:`regularized_logdet` is needed.
    Neumann ends become Robin ends ``u' = kappa u`` through ``slopes``.
    """
    V = V or _zero
    det, _ = _gy_value(V, a, b, bc, 0.0, False, breakpoints, rtol, slopes)
    scale = 2.0 * (b - a) if bc.tag == "DD" else 2.0
    if bc.periodic:
        scale = (b - a) ** 2
    if abs(det) < zero_tol * scale:
        raise ZeroModeError(f"operator with {bc.tag} conditions has a zero mode; use regularized_logdet")
    if det < 0:
        raise ValueError("negative determinant: operator is not positive")
    return LogDet(math.log(det), 0, "gelfand_yaglom")


def regularized_logdet(
    V: Callable[[float], float] | None,
    a: float,
    b: float,
    bc: BoundarySpec,
    breakpoints: Sequence[float] | None = None,
    rtol: float = 1e-11,
    slopes: tuple[float, float] = (0.0, 0.0),
) -> LogDet:
    """``log det'`` for an operator with a one-dimensional kernel."""
    V = V or _zero
    det, ddet = _gy_value(V, a, b, bc, 0.0, True, breakpoints, rtol, slopes)
    if ddet <= 0:
        raise ValueError("regularized determinant is not positive")
    return LogDet(math.log(ddet), 1, "gelfand_yaglom")


def flat_logdet(L: float, bc: BoundarySpec | str) -> LogDet:
    """Closed-form ``log det'`` of ``-d^2`` on an interval or circle of length ``L``."""
    if isinstance(bc, str):
        bc = BoundarySpec.parse(bc)
    if bc.periodic:
        return LogDet(2.0 * math.log(L), 1, "exact_flat")
    tag = bc.tag
    if tag in ("DD", "NN"):
        return LogDet(math.log(2.0 * L), int(tag == "NN"), "exact_flat")
    return LogDet(math.log(2.0), 0, "exact_flat")


def ratio_series_logdet(
    eig_T: np.ndarray,
    eig_ref: np.ndarray,
    logdet_ref: float,
    tol: float = 1e-9,
) -> LogDet:
    """``log det'(A_T) = log det'(A_ref) + sum log(lambda_k(T) / lambda_k(ref))``.

    Both arrays hold nonzero eigenvalues in matching order. The tail is
    estimated from the last summands assuming ``O(1/k^2)`` decay.
    """
    m = min(len(eig_T), len(eig_ref))
    terms = np.log(np.asarray(eig_T[:m]) / np.asarray(eig_ref[:m]))
    total = float(np.sum(terms))
    k_tail = max(1, m // 10)
    tail_est = float(np.abs(terms[-k_tail:]).mean()) * m if m else 0.0
    return LogDet(logdet_ref + total, 0, "ratio_series", error=max(tail_est, tol))


# ---------------------------------------------------------------------------
# Richardson extrapolation


@dataclass(frozen=True)
class RichardsonResult:
    value: float
    error: float
    monotone: bool

    def __iter__(self):
        return iter((self.value, self.error))


def richardson(values: Sequence[float], order: int = 2) -> RichardsonResult:
    """Extrapolate values on grids ``h, h/2, h/4`` assuming an ``h^order`` error.

    The error estimate is the gap between the two extrapolants; a sign change
    in consecutive differences flags non-monotone convergence.
    """
    v1, v2, v3 = (float(x) for x in values)
    r = 2.0**order
    e1 = (r * v2 - v1) / (r - 1.0)
    e2 = (r * v3 - v2) / (r - 1.0)
    d1, d2 = v2 - v1, v3 - v2
    monotone = d1 * d2 >= 0.0 and abs(d2) <= abs(d1) + 1e-15 * max(1.0, abs(v3))
    return RichardsonResult(e2, abs(e2 - e1), monotone)
