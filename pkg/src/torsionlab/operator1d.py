"""Finite-difference discretizations of ``-d^2/ds^2 + V`` in one dimension.

Interval operators are symmetric tridiagonal. Neumann ends use a mirror ghost
node; the resulting non-symmetric row is symmetrized by the trapezoid weight
``1/2`` at the end node, which turns the boundary off-diagonal into
``-sqrt(2)/h^2``. Periodic operators keep a single corner entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .deformation import DeformationProfile, cell_average_potentials, witten_potentials

__all__ = [
    "BC",
    "BoundarySpec",
    "DegreeBoundaryMap",
    "DiscreteOperator",
    "Grid",
    "assemble_interval",
    "assemble_circle",
    "assemble_witten_pair",
    "degree_boundary_map",
]


class BC(str, Enum):
    DIRICHLET = "D"
    NEUMANN = "N"


@dataclass(frozen=True)
class BoundarySpec:
    left: BC | None = None
    right: BC | None = None
    periodic: bool = False

    def __post_init__(self):
        if self.periodic and (self.left is not None or self.right is not None):
            raise ValueError("periodic boundary excludes left/right tags")
        if not self.periodic and (self.left is None or self.right is None):
            raise ValueError("interval boundary needs both end conditions")
        if not self.periodic:
            object.__setattr__(self, "left", BC(self.left))
            object.__setattr__(self, "right", BC(self.right))

    @classmethod
    def parse(cls, tag: str) -> "BoundarySpec":
        """``"DN"`` style tags, or ``"P"`` for periodic."""
        tag = tag.upper()
        if tag in ("P", "PERIODIC"):
            return cls(periodic=True)
        if len(tag) != 2:
            raise ValueError(f"bad boundary tag {tag!r}")
        return cls(BC(tag[0]), BC(tag[1]))

    @property
    def tag(self) -> str:
        return "P" if self.periodic else self.left.value + self.right.value


PERIODIC = BoundarySpec(periodic=True)


@dataclass(frozen=True)
class DegreeBoundaryMap:
    condition: tuple[str, str]
    function_bc: BoundarySpec
    oneform_bc: BoundarySpec


def _end(cond: str, degree: int) -> BC:
    if cond not in ("abs", "rel"):
        raise ValueError(f"boundary condition must be 'abs' or 'rel', got {cond!r}")
    neumann = (cond == "abs") == (degree == 0)
    return BC.NEUMANN if neumann else BC.DIRICHLET


def degree_boundary_map(left: str, right: str) -> DegreeBoundaryMap:
    """abs gives Neumann on functions and Dirichlet on one-forms; rel the reverse."""
    return DegreeBoundaryMap(
        (left, right),
        BoundarySpec(_end(left, 0), _end(right, 0)),
        BoundarySpec(_end(left, 1), _end(right, 1)),
    )


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[a, b]`` with ``n`` cells (``n`` nodes when periodic)."""

    a: float
    b: float
    n: int
    periodic: bool = False

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        m = self.n if self.periodic else self.n + 1
        return self.a + self.h * np.arange(m)


@dataclass(frozen=True)
class DiscreteOperator:
    """Symmetric (tridiagonal or periodic) matrix together with its grid.

    ``nodes`` are the unknowns kept after Dirichlet elimination and ``weights``
    the trapezoid quadrature weights relative to ``h`` (``1/2`` at Neumann
    ends), so nodal values are ``vec / sqrt(weights)``.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    h: float
    bc: BoundarySpec
    nodes: np.ndarray
    weights: np.ndarray
    corner: float = 0.0
    potential_id: str = ""

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def periodic(self) -> bool:
        return self.bc.periodic

    def dense(self) -> np.ndarray:
        a = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        if self.periodic:
            a[0, -1] += self.corner
            a[-1, 0] += self.corner
        return a

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        if self.periodic:
            out[0] += self.corner * v[-1]
            out[-1] += self.corner * v[0]
        return out

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros_like(self.diag)
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        if self.periodic:
            r[0] += abs(self.corner)
            r[-1] += abs(self.corner)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    def to_nodal(self, vec: np.ndarray) -> np.ndarray:
        """Convert eigenvector coordinates to nodal function values."""
        return vec / np.sqrt(self.weights)[:, None] if vec.ndim == 2 else vec / np.sqrt(self.weights)


def assemble_interval(grid: Grid, V, bc: BoundarySpec, potential_id: str = "") -> DiscreteOperator:
    """Central differences on ``grid`` with potential samples ``V`` at all ``n+1`` nodes."""
    if grid.periodic or bc.periodic:
        raise ValueError("use assemble_circle for periodic problems")
    if grid.n < 8:
        raise ValueError("need at least 8 cells")
    V = np.asarray(V, dtype=float)
    if V.shape != (grid.n + 1,):
        raise ValueError(f"potential has {V.shape[0] if V.ndim else 1} samples, grid has {grid.n + 1} nodes")
    h = grid.h
    ih2 = 1.0 / (h * h)
    diag = 2.0 * ih2 + V
    off = np.full(grid.n, -ih2)
    weights = np.ones(grid.n + 1)
    nodes = grid.nodes
    lo, hi = 0, grid.n + 1
    if bc.left is BC.NEUMANN:
        off[0] *= math.sqrt(2.0)
        weights[0] = 0.5
    else:
        lo = 1
    if bc.right is BC.NEUMANN:
        off[-1] *= math.sqrt(2.0)
        weights[-1] = 0.5
    else:
        hi = grid.n
    return DiscreteOperator(
        diag=diag[lo:hi].copy(),
        offdiag=off[lo : hi - 1].copy(),
        h=h,
        bc=bc,
        nodes=nodes[lo:hi].copy(),
        weights=weights[lo:hi].copy(),
        potential_id=potential_id,
    )


def assemble_circle(grid: Grid, V, potential_id: str = "") -> DiscreteOperator:
    """Periodic closure; ``V`` holds one sample per node (``n`` values)."""
    if grid.n < 8:
        raise ValueError("need at least 8 nodes")
    V = np.asarray(V, dtype=float)
    if V.shape != (grid.n,):
        raise ValueError(f"potential has {V.shape[0] if V.ndim else 1} samples, circle has {grid.n} nodes")
    ih2 = 1.0 / grid.h**2
    return DiscreteOperator(
        diag=2.0 * ih2 + V,
        offdiag=np.full(grid.n - 1, -ih2),
        h=grid.h,
        bc=PERIODIC,
        nodes=Grid(grid.a, grid.b, grid.n, True).nodes,
        weights=np.ones(grid.n),
        corner=-ih2,
        potential_id=potential_id,
    )


def _potentials(profile: DeformationProfile, grid: Grid, sampling: str):
    if sampling == "cell":
        return cell_average_potentials(profile, grid.a, grid.b, grid.n, periodic=grid.periodic)
    if sampling == "node":
        return witten_potentials(profile, Grid(grid.a, grid.b, grid.n, grid.periodic).nodes)
    raise ValueError(f"unknown sampling {sampling!r}")


def assemble_witten_pair(
    profile: DeformationProfile,
    grid: Grid,
    left_condition: str | None = None,
    right_condition: str | None = None,
    sampling: str = "cell",
    twist: float = 1.0,
) -> tuple[DiscreteOperator, DiscreteOperator]:
    """Function operator with ``V_-`` and one-form operator with ``V_+``.

    ``twist=-1`` builds the pair for ``d - df`` (swap of ``V_-`` and ``V_+``).
    For a periodic grid the conditions are ignored.
    """
    if not grid.periodic:
        lo, hi = profile.domain
        if grid.a < lo - 1e-12 or grid.b > hi + 1e-12:
            raise ValueError(f"grid [{grid.a}, {grid.b}] not inside profile domain [{lo}, {hi}]")
    pots = _potentials(profile, grid, sampling)
    vm, vp = (pots.v_minus, pots.v_plus) if twist > 0 else (pots.v_plus, pots.v_minus)
    tag = f"T={profile.T:g},{profile.kind.value},{sampling}"
    if grid.periodic:
        return (
            assemble_circle(grid, vm, "V-;" + tag),
            assemble_circle(grid, vp, "V+;" + tag),
        )
    bmap = degree_boundary_map(left_condition, right_condition)
    return (
        assemble_interval(grid, vm, bmap.function_bc, "V-;" + tag),
        assemble_interval(grid, vp, bmap.oneform_bc, "V+;" + tag),
    )
