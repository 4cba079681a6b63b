"""Deformation potentials f_T, p_T, q_T and the induced Witten potentials.

The odd profile f_T on [-2, 2] is built from three pieces on [0, 2]:

* ``[0, 1/2]``: odd quintic ``T (29/32 s - 3/4 s^3 + 1/2 s^5)``, which joins
  ``f(0) = 0`` to the quadratic zone with matching value, slope and curvature;
* ``[1/2, 1]``: ``T/2 - T rho(x) (1 - s)^2 / 2`` with ``x = (1 - s) / w``,
  ``rho`` a quintic smoothstep ramp, ``w`` the mollifier width;
* ``[1, 2]``: the plateau ``T/2``.

``p_T`` (period 8) and ``q_T`` (even on [-2, 2]) are reflections of ``f_T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ProfileKind",
    "DeformationProfile",
    "WittenPotentialPair",
    "make_profile",
    "evaluate",
    "witten_potentials",
    "cell_average_potentials",
    "alpha_integral",
]

DEFAULT_CUTOFF_WIDTH = 1e-6
DEFAULT_CUTOFF_WIDTH_MIN = 1e-6

# quintic blend on [0, 1/2], in units of T
_BLEND = (29.0 / 32.0, -0.75, 0.5)


class ProfileKind(str, Enum):
    INTERVAL_ODD = "interval_odd"
    CIRCLE_PERIODIC = "circle_periodic"
    INTERVAL_EVEN = "interval_even"


def _smoothstep(y):
    y = np.clip(y, 0.0, 1.0)
    return y**3 * (10.0 - 15.0 * y + 6.0 * y * y)


def _smoothstep_d1(y):
    inside = (y > 0.0) & (y < 1.0)
    return np.where(inside, 30.0 * y * y * (1.0 - y) ** 2, 0.0)


def _smoothstep_d2(y):
    inside = (y > 0.0) & (y < 1.0)
    return np.where(inside, 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y), 0.0)


def rho(x):
    """Mollifier ramp: 0 for x <= 1/2, 1 for x >= 3/4, C^2 in between."""
    return _smoothstep(4.0 * np.asarray(x, dtype=float) - 2.0)


def _rho_derivs(x):
    y = 4.0 * x - 2.0
    return _smoothstep(y), 4.0 * _smoothstep_d1(y), 16.0 * _smoothstep_d2(y)


@dataclass(frozen=True)
class DeformationProfile:
    """Immutable description of one member of the deformation family.

    ``width`` is the mollifier scale actually used near ``|s| = 1``:
    ``min(cutoff_width, max(exp(-T^2), cutoff_width_min))``.
    """

    T: float
    kind: ProfileKind = ProfileKind.INTERVAL_ODD
    cutoff_width: float = DEFAULT_CUTOFF_WIDTH
    cutoff_width_min: float = DEFAULT_CUTOFF_WIDTH_MIN
    constants: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def width(self) -> float:
        w = math.exp(-self.T * self.T) if self.T < 30.0 else 0.0
        return min(self.cutoff_width, max(w, self.cutoff_width_min))

    @property
    def domain(self) -> tuple[float, float]:
        if self.kind is ProfileKind.CIRCLE_PERIODIC:
            return (-2.0, 6.0)
        return (-2.0, 2.0)

    @property
    def period(self) -> float | None:
        return 8.0 if self.kind is ProfileKind.CIRCLE_PERIODIC else None

    def breakpoints(self) -> np.ndarray:
        """Positions where the closed-form pieces of the profile change."""
        w = self.width
        half = np.array([0.0, 0.5, 1.0 - 0.75 * w, 1.0 - 0.5 * w, 1.0, 2.0])
        base = np.unique(np.concatenate([-half, half]))
        if self.kind is ProfileKind.INTERVAL_ODD:
            return base
        if self.kind is ProfileKind.CIRCLE_PERIODIC:
            return np.unique(np.concatenate([base, 4.0 - base]))
        return np.unique(np.concatenate([half - 2.0, 2.0 - half]))

    def __call__(self, s):
        return evaluate(self, s)

    def to_dict(self) -> dict:
        return {"T": self.T, "kind": self.kind.value, "cutoff_width": self.cutoff_width}

    @classmethod
    def from_dict(cls, data: dict) -> "DeformationProfile":
        return make_profile(
            float(data["T"]),
            data.get("kind", "interval_odd"),
            float(data.get("cutoff_width", DEFAULT_CUTOFF_WIDTH)),
        )


def _half_profile(T: float, w: float, a):
    """Profile g on [0, 2] and its first two derivatives in ``a = |s|``."""
    a = np.asarray(a, dtype=float)
    c1, c3, c5 = _BLEND
    g = np.empty_like(a)
    g1 = np.empty_like(a)
    g2 = np.empty_like(a)

    blend = a <= 0.5
    ab = a[blend]
    g[blend] = T * (c1 * ab + c3 * ab**3 + c5 * ab**5)
    g1[blend] = T * (c1 + 3.0 * c3 * ab**2 + 5.0 * c5 * ab**4)
    g2[blend] = T * (6.0 * c3 * ab + 20.0 * c5 * ab**3)

    quad = (a > 0.5) & (a < 1.0)
    u = 1.0 - a[quad]
    x = u / w
    r, r1, r2 = _rho_derivs(x)
    g[quad] = 0.5 * T - 0.5 * T * r * u * u
    g1[quad] = T * u * (0.5 * r1 * x + r)
    g2[quad] = -T * (0.5 * r2 * x * x + 2.0 * r1 * x + r)

    plateau = a >= 1.0
    g[plateau] = 0.5 * T
    g1[plateau] = 0.0
    g2[plateau] = 0.0
    return g, g1, g2


def _odd(T, w, s):
    s = np.asarray(s, dtype=float)
    sgn = np.where(s < 0.0, -1.0, 1.0)
    g, g1, g2 = _half_profile(T, w, np.abs(s))
    return sgn * g, g1, sgn * g2


def evaluate(profile: DeformationProfile, s):
    """Return ``(f, f', f'')`` at ``s`` using the analytic piece derivatives."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    T, w = profile.T, profile.width
    kind = profile.kind
    if kind is ProfileKind.CIRCLE_PERIODIC:
        x = np.mod(s + 2.0, 8.0) - 2.0
        left = x <= 2.0
        f = np.empty_like(x)
        f1 = np.empty_like(x)
        f2 = np.empty_like(x)
        a, a1, a2 = _odd(T, w, x[left])
        f[left], f1[left], f2[left] = a, a1, a2
        b, b1, b2 = _odd(T, w, 4.0 - x[~left])
        f[~left], f1[~left], f2[~left] = b, -b1, b2
    else:
        lo, hi = profile.domain
        tol = 1e-12
        if np.any(s < lo - tol) or np.any(s > hi + tol):
            raise ValueError(f"position outside domain [{lo}, {hi}]")
        s = np.clip(s, lo, hi)
        if kind is ProfileKind.INTERVAL_ODD:
            f, f1, f2 = _odd(T, w, s)
        else:
            a = np.minimum(s, -s) + 2.0  # s+2 on the left half, 2-s on the right
            f, f1, f2 = _odd(T, w, a)
            f1 = np.where(s > 0.0, -f1, f1)
    if scalar:
        return float(f[0]), float(f1[0]), float(f2[0])
    return f, f1, f2


def _profile_constants(T: float, w: float) -> dict:
    """Concrete values of the bound constants for this blend and ramp."""
    sb = np.linspace(0.0, 0.5, 2001)
    c1, c3, c5 = _BLEND
    d1 = c1 + 3 * c3 * sb**2 + 5 * c5 * sb**4
    d2 = 6 * c3 * sb + 20 * c5 * sb**3
    x = np.linspace(0.5, 0.75, 4001)
    r, r1, r2 = _rho_derivs(x)
    return {
        "C1": 0.25,
        "slope_min_over_T": float(d1.min()),
        "slope_max_over_T": float(d1.max()),
        "C2": float(np.abs(d2).max()),
        "C3": float(np.abs(0.5 * r1 * x + r).max()),
        "C4": float(np.abs(0.5 * r2 * x * x + 2 * r1 * x + r).max()),
        "delta1": float(np.abs(r1).max()),
        "delta2": float(np.abs(r2).max()),
        "width": w,
    }


def make_profile(
    T: float,
    kind: ProfileKind | str = ProfileKind.INTERVAL_ODD,
    cutoff_width: float = DEFAULT_CUTOFF_WIDTH,
    cutoff_width_min: float = DEFAULT_CUTOFF_WIDTH_MIN,
) -> DeformationProfile:
    if T < 0:
        raise ValueError("deformation strength T must be >= 0")
    if not (0.0 < cutoff_width < 0.25):
        raise ValueError("cutoff_width must lie in (0, 1/4)")
    if not (0.0 < cutoff_width_min <= cutoff_width):
        raise ValueError("cutoff_width_min must lie in (0, cutoff_width]")
    kind = ProfileKind(kind)
    prof = DeformationProfile(float(T), kind, float(cutoff_width), float(cutoff_width_min))
    prof.constants.update(_profile_constants(prof.T, prof.width))
    return prof


@dataclass(frozen=True)
class WittenPotentialPair:
    v_minus: np.ndarray
    v_plus: np.ndarray
    grid: np.ndarray


def witten_potentials(profile: DeformationProfile, grid) -> WittenPotentialPair:
    """Sample ``V_{T,-} = f'^2 - f''`` and ``V_{T,+} = f'^2 + f''`` at the nodes."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    _, f1, f2 = evaluate(profile, grid)
    sq = np.atleast_1d(f1) ** 2
    f2 = np.atleast_1d(f2)
    return WittenPotentialPair(sq - f2, sq + f2, grid)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _integrate_sq_slope(profile: DeformationProfile, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integral of f'^2 over each [a_i, b_i], split at breakpoints."""
    bps = profile.breakpoints()
    if profile.period is not None:
        lo = math.floor((a.min() + 2.0) / 8.0) * 8.0
        hi = math.ceil((b.max() + 2.0) / 8.0) * 8.0
        shifts = np.arange(lo, hi + 1e-9, 8.0)
        bps = np.unique((bps[None, :] + shifts[:, None]).ravel())
    edges = np.unique(np.concatenate([a, b, bps[(bps > a.min()) & (bps < b.max())]]))
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    pts = mid[:, None] + rad[:, None] * _GL_X[None, :]
    _, f1, _ = evaluate(profile, pts.ravel())
    seg = (np.asarray(f1).reshape(pts.shape) ** 2 * _GL_W[None, :]).sum(axis=1) * rad
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    ia = np.searchsorted(edges, a)
    ib = np.searchsorted(edges, b)
    return cum[ib] - cum[ia]


def cell_average_potentials(
    profile: DeformationProfile, lo: float, hi: float, n: int, periodic: bool = False
) -> WittenPotentialPair:
    """Cell averages of ``V_{T,-+}`` over the dual cells of a uniform grid.

    The ``f''`` part is integrated exactly through ``f'`` at the cell faces, so a
    collar narrower than the grid spacing is still captured to O(h^2).
    """
    h = (hi - lo) / n
    nodes = lo + h * np.arange(n if periodic else n + 1)
    a = nodes - 0.5 * h
    b = nodes + 0.5 * h
    if not periodic:
        a[0] = lo
        b[-1] = hi
    width = b - a
    sq = _integrate_sq_slope(profile, a, b) / width
    _, fa, _ = evaluate(profile, a if periodic else np.clip(a, lo, hi))
    _, fb, _ = evaluate(profile, b if periodic else np.clip(b, lo, hi))
    curv = (np.asarray(fb) - np.asarray(fa)) / width
    return WittenPotentialPair(sq - curv, sq + curv, nodes)


def alpha_integral(profile: DeformationProfile, sign: float = 1.0) -> float:
    """``int exp(2 sign f)`` over the profile's domain, by piecewise Gauss quadrature."""
    lo, hi = profile.domain
    bps = profile.breakpoints()
    bps = np.unique(np.concatenate([[lo, hi], bps[(bps > lo) & (bps < hi)]]))
    # refine each piece so the Gaussian tails near the plateau are resolved
    fine = np.unique(np.concatenate([np.linspace(p, q, 65) for p, q in zip(bps[:-1], bps[1:])]))
    mid = 0.5 * (fine[1:] + fine[:-1])
    rad = 0.5 * (fine[1:] - fine[:-1])
    pts = mid[:, None] + rad[:, None] * _GL_X[None, :]
    f, _, _ = evaluate(profile, pts.ravel())
    shift = 0.5 * profile.T
    vals = np.exp(2.0 * sign * np.asarray(f).reshape(pts.shape) - 2.0 * shift)
    return float(math.exp(2.0 * shift) * ((vals * _GL_W).sum(axis=1) * rad).sum())
