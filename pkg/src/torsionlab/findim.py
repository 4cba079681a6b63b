"""Finite-dimensional metrized cochain complexes and their torsion.

A :class:`MetrizedComplex` carries differentials ``d_k : C^k -> C^{k+1}`` and
symmetric positive-definite Gram matrices ``G_k``. Torsion is computed from
the whitened differentials ``B_k = R_{k+1} d_k R_k^{-1}`` (``G = R^T R``):

    log tau = 1/2 sum_k (-1)^k k log det' Delta_k
            = sum_k (-1)^{k+1} sum log sigma(B_k)

where the second form uses only the nonzero singular values of each ``B_k``.
The module also builds the discrete Witten complex of a path or cycle, the
Mayer-Vietoris complex of a split circle and the comparison maps between a
glued circle and its two pieces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, eigh, solve_triangular, svd

from .deformation import DeformationProfile, ProfileKind, evaluate, make_profile

__all__ = [
    "MetrizedComplex",
    "DiscreteWittenComplex",
    "SmallSpectrumProjector",
    "cohomology",
    "torsion",
    "torsion_from_laplacians",
    "laplacians",
    "mv_complex",
    "mv_complex_bruteforce",
    "discrete_witten",
    "small_projector",
    "comparison_maps",
    "random_acyclic_complex",
    "random_short_exact_sequence",
]



@dataclass
class MetrizedComplex:
    dims: list[int]
    differentials: list[np.ndarray]
    grams: list[np.ndarray]

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        if len(self.grams) != len(self.dims) or len(self.differentials) != len(self.dims) - 1:
            raise ValueError("need one Gram per degree and one differential between consecutive degrees")
        for k, d in enumerate(self.differentials):
            d = np.asarray(d, dtype=float).reshape(self.dims[k + 1], self.dims[k])
            self.differentials[k] = d
        for k, g in enumerate(self.grams):
            self.grams[k] = np.asarray(g, dtype=float).reshape(self.dims[k], self.dims[k])

    def validate(self, tol: float = 1e-12) -> None:
        for k in range(len(self.differentials) - 1):
            dd = self.differentials[k + 1] @ self.differentials[k]
            scale = 1.0 + np.abs(self.differentials[k + 1]).max(initial=0) * np.abs(self.differentials[k]).max(initial=0)
            if dd.size and np.abs(dd).max() > tol * scale:
                raise ValueError(f"d_{k + 1} d_{k} != 0 (max {np.abs(dd).max():.3e})")
        for k, g in enumerate(self.grams):
            if g.size:
                if not np.allclose(g, g.T, atol=1e-12 * max(1.0, np.abs(g).max())):
                    raise ValueError(f"Gram matrix in degree {k} is not symmetric")
                try:
                    cholesky(g)
                except np.linalg.LinAlgError as exc:
                    raise ValueError(f"Gram matrix in degree {k} is not positive definite") from exc

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** k * d for k, d in enumerate(self.dims))

    def chol(self, k: int) -> np.ndarray:
        """Upper Cholesky factor ``R`` with ``G_k = R^T R``."""
        if self.dims[k] == 0:
            return np.zeros((0, 0))
        return cholesky(self.grams[k], lower=False)

    def whitened(self, k: int) -> np.ndarray:
        """``R_{k+1} d_k R_k^{-1}``: the differential in orthonormal bases."""
        d = self.differentials[k]
        if d.size == 0:
            return d.copy()
        r0, r1 = self.chol(k), self.chol(k + 1)
        # d R0^{-1} = (R0^{-T} d^T)^T
        x = solve_triangular(r0, d.T, trans="T", lower=False).T
        return r1 @ x

    def adjoint(self, k: int) -> np.ndarray:
        """Gram adjoint ``d_k^* = G_k^{-1} d_k^T G_{k+1}``."""
        d = self.differentials[k]
        if d.size == 0:
            return d.T.copy()
        return np.linalg.solve(self.grams[k], d.T @ self.grams[k + 1])

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": self.dims,
                "differentials": [d.tolist() for d in self.differentials],
                "grams": [g.tolist() for g in self.grams],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MetrizedComplex":
        data = json.loads(text)
        return cls(
            data["dims"],
            [np.array(d, dtype=float) for d in data["differentials"]],
            [np.array(g, dtype=float) for g in data["grams"]],
        )


def _singular_values(cx: MetrizedComplex) -> list[np.ndarray]:
    out = []
    for k in range(len(cx.differentials)):
        b = cx.whitened(k)
        out.append(svd(b, compute_uv=False) if b.size else np.empty(0))
    return out


def torsion(cx: MetrizedComplex, rtol: float = 1e-10) -> float:
    """``log tau`` from the singular values of the whitened differentials.

    Singular values below ``rtol`` times the largest one in the whole complex
    count as zero, so a numerically vanishing map contributes nothing.
    """
    svs = _singular_values(cx)
    scale = max((s.max() for s in svs if s.size), default=0.0)
    total = 0.0
    for k, s in enumerate(svs):
        s = s[s > rtol * scale]
        total += (-1) ** (k + 1) * float(np.log(s).sum())
    return total


def laplacians(cx: MetrizedComplex) -> list[np.ndarray]:
    """Whitened Hodge Laplacians ``B_{k-1} B_{k-1}^T + B_k^T B_k`` (symmetric)."""
    out = []
    bs = [cx.whitened(k) for k in range(len(cx.differentials))]
    for k, n in enumerate(cx.dims):
        lap = np.zeros((n, n))
        if k > 0:
            lap += bs[k - 1] @ bs[k - 1].T
        if k < len(bs):
            lap += bs[k].T @ bs[k]
        out.append(lap)
    return out


def torsion_from_laplacians(cx: MetrizedComplex, rtol: float = 1e-10) -> float:
    """``1/2 sum (-1)^k k log det' Delta_k`` by symmetric eigensolves."""
    total = 0.0
    for k, lap in enumerate(laplacians(cx)):
        if lap.size == 0 or k == 0:
            continue
        w = np.linalg.eigvalsh(lap)
        top = max(w.max(initial=0.0), 1e-300)
        w = w[w > rtol * top]
        total += 0.5 * (-1) ** k * k * float(np.log(w).sum())
    return total


def cohomology(cx: MetrizedComplex, rtol: float = 1e-9):
    """Per-degree Betti numbers and Gram-orthonormal harmonic bases.

    Harmonic cochains are the kernel of the whitened Laplacian mapped back by
    ``R^{-1}``; columns ``h`` of the returned bases satisfy ``h^T G h = I``.
    """
    cx.validate()
    dims, bases = [], []
    for k, lap in enumerate(laplacians(cx)):
        n = cx.dims[k]
        if n == 0:
            dims.append(0)
            bases.append(np.zeros((0, 0)))
            continue
        w, v = np.linalg.eigh(lap)
        scale = max(np.abs(w).max(), 1.0)
        ker = v[:, w < rtol * scale]
        r = cx.chol(k)
        h = solve_triangular(r, ker, lower=False)
        dims.append(ker.shape[1])
        bases.append(h)
    return dims, bases


# ---------------------------------------------------------------------------
# Mayer-Vietoris complex of a split circle


def mv_complex(L: float, L1: float, L2: float | None = None, rank: int = 1) -> MetrizedComplex:
    """Six-term sequence ``H_rel(M2) -> H(M) -> H_abs(M1) -> ...`` of a flat circle.

    ``M1`` (absolute conditions) has length ``L1`` and ``M2`` (relative) length
    ``L2 = L - L1``. Degree 0 is ``H^0_rel(M2) = 0``. In harmonic orthonormal
    bases the restriction ``H^0(M) -> H^0(M1)`` is ``sqrt(L1/L)``, the
    connecting map vanishes and the extension ``H^1_rel(M2) -> H^1(M)`` is
    ``sqrt(L2/L)``. ``rank`` copies the sequence for a trivial bundle.
    """
    L2 = L - L1 if L2 is None else L2
    if min(L1, L2) <= 0 or abs(L1 + L2 - L) > 1e-12 * L:
        raise ValueError("arcs must be positive and add up to the circle length")
    r = int(rank)
    eye = np.eye(r)
    dims = [0, r, r, r, r, 0]
    ds = [
        np.zeros((r, 0)),
        math.sqrt(L1 / L) * eye,
        np.zeros((r, r)),
        math.sqrt(L2 / L) * eye,
        np.zeros((0, r)),
    ]
    grams = [np.eye(d) for d in dims]
    return MetrizedComplex(dims, ds, grams)


def _path_complex(n_vertices: int, h: float, weights_v: np.ndarray, drop_ends: bool):
    """Plain d on a path, optionally with both end vertices removed (rel)."""
    nv = n_vertices
    d = np.zeros((nv - 1, nv))
    idx = np.arange(nv - 1)
    d[idx, idx] = -1.0 / h
    d[idx, idx + 1] = 1.0 / h
    gv = np.diag(h * weights_v)
    if drop_ends:
        d = d[:, 1:-1]
        gv = gv[1:-1, 1:-1]
    ge = np.eye(nv - 1) * h
    return MetrizedComplex([d.shape[1], nv - 1], [d], [gv, ge])


def _cycle_complex(n: int, h: float):
    d = np.zeros((n, n))
    idx = np.arange(n)
    d[idx, idx] = -1.0 / h
    d[idx, (idx + 1) % n] = 1.0 / h
    return MetrizedComplex([n, n], [d], [h * np.eye(n), h * np.eye(n)])


def _harmonic_project(basis: np.ndarray, gram: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Coefficients of ``x`` in a Gram-orthonormal harmonic basis."""
    if basis.size == 0:
        return np.zeros(0)
    return basis.T @ gram @ x


def mv_complex_bruteforce(L: float, L1: float, n: int = 64, rank: int = 1) -> MetrizedComplex:
    """The same sequence assembled from discrete cochains on an ``n``-cycle.

    ``M2`` is the arc ``[0, L2]`` (vertices ``0..i2``) with relative
    conditions, ``M1`` the arc ``[L2, L]`` with absolute conditions and
    trapezoid end weights. Each map is realized on harmonic representatives:
    extension by zero, restriction, and the connecting zig-zag
    (extend, apply ``d``, restrict to ``M2``), followed by harmonic
    projection; matrix entries are Gram inner products.
    """
    L2 = L - L1
    h = L / n
    i2 = L2 / h
    if abs(i2 - round(i2)) > 1e-9 or not (1 < round(i2) < n - 1):
        raise ValueError("cut points must fall on grid vertices")
    i2 = int(round(i2))
    M = _cycle_complex(n, h)
    n1 = n - i2 + 1  # vertices i2..n (n == 0)
    w1 = np.ones(n1)
    w1[0] = w1[-1] = 0.5
    M1 = _path_complex(n1, h, w1, drop_ends=False)
    M2 = _path_complex(i2 + 1, h, np.ones(i2 + 1), drop_ends=True)
    _, hM = cohomology(M)
    _, h1 = cohomology(M1)
    _, h2 = cohomology(M2)

    v1 = (i2 + np.arange(n1)) % n  # cycle vertex of each M1 vertex
    e1 = i2 + np.arange(n1 - 1)  # cycle edge (j, j+1) of each M1 edge
    v2 = np.arange(1, i2)  # interior vertices of M2
    e2 = np.arange(i2)

    def extend(vals, verts, size):
        out = np.zeros(size)
        out[verts] = vals
        return out

    def matrix(src_basis, tgt_basis, tgt_gram, fn):
        m = np.zeros((tgt_basis.shape[1], src_basis.shape[1]))
        for j in range(src_basis.shape[1]):
            m[:, j] = _harmonic_project(tgt_basis, tgt_gram, fn(src_basis[:, j]))
        return m

    # e_k: H_rel(M2) -> H(M)
    e0 = matrix(h2[0], hM[0], M.grams[0], lambda x: extend(x, v2, n))
    e1m = matrix(h2[1], hM[1], M.grams[1], lambda x: extend(x, e2, n))
    # r_k: H(M) -> H_abs(M1)
    r0 = matrix(hM[0], h1[0], M1.grams[0], lambda x: x[v1])
    r1 = matrix(hM[1], h1[1], M1.grams[1], lambda x: x[e1])

    # connecting map H^0_abs(M1) -> H^1_rel(M2)
    def zigzag(x):
        full = extend(x, v1, n)
        return (M.differentials[0] @ full)[e2]

    c0 = matrix(h1[0], h2[1], M2.grams[1], zigzag)

    blocks = [e0, r0, c0, e1m, r1]
    dims = [h2[0].shape[1], hM[0].shape[1], h1[0].shape[1], h2[1].shape[1], hM[1].shape[1], h1[1].shape[1]]
    eye = np.eye(rank)
    ds = [np.kron(eye, b) for b in blocks]
    dims = [rank * d for d in dims]
    return MetrizedComplex(dims, ds, [np.eye(d) for d in dims])


# ---------------------------------------------------------------------------
# discrete Witten complex


@dataclass
class DiscreteWittenComplex(MetrizedComplex):
    geometry: str = "cycle"
    conditions: tuple = ("abs", "abs")
    vertices: np.ndarray = field(default_factory=lambda: np.empty(0))
    edges: np.ndarray = field(default_factory=lambda: np.empty(0))
    f_vertices: np.ndarray = field(default_factory=lambda: np.empty(0))
    f_edges: np.ndarray = field(default_factory=lambda: np.empty(0))
    vertex_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    edge_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    twisted: bool = True
    offset: float = 0.0
    overflow: bool = False
    kept_vertices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def supertrace(self, t: float) -> float:
        """``Tr exp(-t Delta_0) - Tr exp(-t Delta_1)``."""
        out = 0.0
        for k, lap in enumerate(laplacians(self)):
            if lap.size:
                out += (-1) ** k * float(np.exp(-t * np.linalg.eigvalsh(lap)).sum())
        return out

    def spectra(self) -> list[np.ndarray]:
        return [np.linalg.eigvalsh(lap) if lap.size else np.empty(0) for lap in laplacians(self)]


def _profile_values(profile: DeformationProfile | None, s: np.ndarray) -> np.ndarray:
    if profile is None:
        return np.zeros_like(s)
    f, _, _ = evaluate(profile, s)
    return np.asarray(f, dtype=float)


def discrete_witten(
    geometry: str,
    profile: DeformationProfile | None,
    n: int,
    interval: tuple[float, float] | None = None,
    conditions: tuple[str, str] = ("abs", "abs"),
    twisted: bool = True,
    twist: float = 1.0,
) -> DiscreteWittenComplex:
    """Vertex/edge complex with ``d_T`` twisted by the profile.

    ``geometry`` is ``"cycle"`` (``n`` vertices and edges on the profile's
    period, or on ``interval``) or ``"path"`` (``n`` vertices, ``n - 1``
    edges). Twisted form: ``(d_T u)_e = (e^{f_{j+1} - fbar} u_{j+1} -
    e^{f_j - fbar} u_j) / h`` with ``fbar`` the edge-midpoint value and
    Grams ``h`` times trapezoid weights. Weighted form: plain ``d`` with Grams
    scaled by ``e^{-2f}``, offset by the minimum of ``f`` to stay finite.
    ``rel`` removes the end vertex; ``abs`` keeps it with weight 1/2.
    """
    if n < 8:
        raise ValueError("need at least 8 vertices")
    if geometry == "cycle":
        if interval is None:
            interval = profile.domain if profile is not None else (0.0, 8.0)
        a, b = interval
        h = (b - a) / n
        verts = a + h * np.arange(n)
        edges = verts + 0.5 * h
        nv, ne = n, n
        heads = (np.arange(n) + 1) % n
        wv = np.ones(n)
    elif geometry == "path":
        if interval is None:
            interval = profile.domain if profile is not None else (0.0, 1.0)
        a, b = interval
        h = (b - a) / (n - 1)
        verts = a + h * np.arange(n)
        edges = verts[:-1] + 0.5 * h
        nv, ne = n, n - 1
        heads = np.arange(1, n)
        wv = np.ones(n)
        wv[0] = wv[-1] = 0.5
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    fv = twist * _profile_values(profile, verts)
    fe = twist * _profile_values(profile, edges)
    tails = np.arange(ne)
    d = np.zeros((ne, nv))
    overflow = False
    offset = 0.0
    if twisted:
        d[tails, heads] += np.exp(fv[heads] - fe) / h
        d[tails, tails] -= np.exp(fv[tails] - fe) / h
        gv = np.diag(h * wv)
        ge = h * np.eye(ne)
    else:
        d[tails, heads] += 1.0 / h
        d[tails, tails] -= 1.0 / h
        offset = float(min(fv.min(), fe.min()))
        span = 2.0 * (max(fv.max(), fe.max()) - offset)
        overflow = span > 700.0
        gv = np.diag(h * wv * np.exp(-2.0 * (fv - offset)))
        ge = np.diag(h * np.exp(-2.0 * (fe - offset)))
    keep = np.arange(nv)
    if geometry == "path":
        drop = []
        if conditions[0] == "rel":
            drop.append(0)
        if conditions[1] == "rel":
            drop.append(nv - 1)
        for c in conditions:
            if c not in ("abs", "rel"):
                raise ValueError(f"bad condition {c!r}")
        keep = np.setdiff1d(keep, drop)
        d = d[:, keep]
        gv = gv[np.ix_(keep, keep)]
    return DiscreteWittenComplex(
        [len(keep), ne],
        [d],
        [gv, ge],
        geometry=geometry,
        conditions=tuple(conditions) if geometry == "path" else (),
        vertices=verts,
        edges=edges,
        f_vertices=fv,
        f_edges=fe,
        vertex_weights=wv,
        edge_weights=np.ones(ne),
        twisted=twisted,
        offset=offset,
        overflow=overflow,
        kept_vertices=keep,
    )


# ---------------------------------------------------------------------------
# small-eigenvalue projectors and comparison maps


@dataclass
class SmallSpectrumProjector:
    threshold: float
    basis: np.ndarray
    eigenvalues: np.ndarray
    degree: int

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def apply(self, gram: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ gram @ x)


def small_projector(cx: MetrizedComplex, delta: float, degree: int, rel_gap: float = 1e-6) -> SmallSpectrumProjector:
    """Gram-orthonormal eigenvectors of ``Delta_degree`` with eigenvalue ``<= delta``."""
    lap = laplacians(cx)[degree]
    w, v = eigh(lap)
    near = np.abs(w - delta) <= rel_gap * max(abs(delta), 1e-300)
    if np.any(near):
        raise ValueError(f"threshold {delta!r} falls inside the spectrum")
    sel = w <= delta
    basis = solve_triangular(cx.chol(degree), v[:, sel], lower=False)
    return SmallSpectrumProjector(float(delta), basis, w[sel], degree)


def _restrict_cochains(glued: DiscreteWittenComplex, piece: DiscreteWittenComplex, degree: int, period: float):
    """Indices of the glued cochains matching each cochain of ``piece``."""
    src = piece.vertices[piece.kept_vertices] if degree == 0 else piece.edges
    tgt = glued.vertices if degree == 0 else glued.edges
    a = glued.vertices[0]
    h = (glued.vertices[1] - glued.vertices[0])
    pos = np.mod(src - a, period) / h
    if degree == 1:
        pos = pos - 0.5
    idx = np.rint(pos).astype(int) % len(tgt)
    if np.abs(pos - np.rint(pos)).max() > 1e-6:
        raise ValueError("piece grid does not match the glued grid")
    return idx


@dataclass
class ComparisonResult:
    T: float
    e_maps: list
    r_maps: list
    e_defect: float
    r_defect: float
    composite: float
    quasimode_defect: float
    delta: float
    ranks: dict


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def comparison_maps(T: float, n: int = 2000, delta: float | None = None) -> ComparisonResult:
    """Glued circle ``S^1(8)`` with ``p_T`` against its pieces.

    ``Mbar2 = [0, 4]`` carries relative and ``Mbar1 = [4, 8]`` absolute
    conditions. ``e~ = P^delta E`` on the harmonic cochains of ``Mbar2`` and
    ``r~`` is restriction to ``Mbar1`` followed by harmonic projection.
    Defects are ``max | |e~ u| / |u| - 1 |`` over unit harmonic ``u``
    (likewise for ``r~`` on the glued small space). The quasi-mode defect
    measures ``|P^delta Q_T u - E u|^2`` for the unit harmonic one-form ``u`` on
    the undeformed piece ``[1, 3]``, with ``Q_T`` continuing ``u`` into the two
    tubes by ``eta * exp(p_T - T/2)``.
    """
    if n % 8:
        raise ValueError("n must be a multiple of 8 so the cuts fall on vertices")
    prof = make_profile(T, ProfileKind.CIRCLE_PERIODIC)
    period = 8.0
    glued = discrete_witten("cycle", prof, n, interval=(-2.0, 6.0))
    m = n // 2 + 1
    rel = discrete_witten("path", prof, m, interval=(0.0, 4.0), conditions=("rel", "rel"))
    # the abs piece [4, 8] is [4, 6] U [-2, 0] on the profile's period
    absp = discrete_witten("path", prof, m, interval=(4.0, 8.0), conditions=("abs", "abs"))
    if delta is None:
        # below the first nonzero eigenvalue of the glued operator for T >= 4
        delta = 0.5
    _, h_rel = cohomology(rel)
    _, h_abs = cohomology(absp)
    proj = [small_projector(glued, delta, k) for k in (0, 1)]
    e_maps, r_maps = [], []
    e_def = r_def = comp = 0.0
    for k in (0, 1):
        G = glued.grams[k]
        idx_rel = _restrict_cochains(glued, rel, k, period)
        idx_abs = _restrict_cochains(glued, absp, k, period)
        # e~: extension by zero then projection
        em = np.zeros((proj[k].rank, h_rel[k].shape[1]))
        for j in range(h_rel[k].shape[1]):
            x = np.zeros(G.shape[0])
            x[idx_rel] = h_rel[k][:, j]
            px = proj[k].basis.T @ G @ x
            em[:, j] = px
            e_def = max(e_def, abs(np.linalg.norm(px) - 1.0))
        # r~: restriction of small eigenvectors, harmonic projection on Mbar1
        rm = np.zeros((h_abs[k].shape[1], proj[k].rank))
        for j in range(proj[k].rank):
            y = proj[k].basis[:, j][idx_abs]
            c = h_abs[k].T @ absp.grams[k] @ y
            rm[:, j] = c
        if rm.size:
            s = svd(rm, compute_uv=False)
            r_def = max(r_def, float(np.abs(s - 1.0).max()))
        if em.size and rm.size:
            comp = max(comp, float(np.abs(rm @ em).max()))
        e_maps.append(em)
        r_maps.append(rm)

    # quasi-mode defect in degree one
    G1 = glued.grams[1]
    s = glued.edges
    pe = glued.f_edges
    plate = (s >= 1.0) & (s <= 3.0)
    u = np.where(plate, 1.0, 0.0)
    u /= math.sqrt(u @ G1 @ u)
    left = (s > 0.0) & (s < 1.0)
    right = (s > 3.0) & (s < 4.0)
    q = u.copy()
    amp = u[plate][0]
    q[left] = amp * _smoothstep(4.0 * s[left] - 1.0) * np.exp(pe[left] - T / 2.0)
    q[right] = amp * _smoothstep(4.0 * (4.0 - s[right]) - 1.0) * np.exp(pe[right] - T / 2.0)
    pq = proj[1].apply(G1, q)
    diff = pq - u
    quasi = float(diff @ G1 @ diff)
    return ComparisonResult(
        T=T,
        e_maps=e_maps,
        r_maps=r_maps,
        e_defect=e_def,
        r_defect=r_def,
        composite=comp,
        quasimode_defect=quasi,
        delta=delta,
        ranks={"small": [p.rank for p in proj], "rel": [b.shape[1] for b in h_rel], "abs": [b.shape[1] for b in h_abs]},
    )


# ---------------------------------------------------------------------------
# random complexes for multiplicativity tests


def random_acyclic_complex(rng: np.random.Generator, pieces: list[int], gram: bool = True) -> MetrizedComplex:
    """Sum of elementary complexes ``R -id-> R`` under random basis changes.

    ``pieces[k]`` elementary blocks sit between degrees ``k`` and ``k+1``.
    """
    top = len(pieces) + 1
    dims = [(pieces[k - 1] if k > 0 else 0) + (pieces[k] if k < len(pieces) else 0) for k in range(top)]
    basis = [rng.standard_normal((n, n)) + 3.0 * np.eye(n) for n in dims]
    ds = []
    for k in range(top - 1):
        e = np.zeros((dims[k + 1], dims[k]))
        lo = pieces[k - 1] if k > 0 else 0
        for j in range(pieces[k]):
            e[j, lo + j] = 1.0
        ds.append(basis[k + 1] @ e @ np.linalg.inv(basis[k]))
    grams = []
    for n in dims:
        if gram:
            a = rng.standard_normal((n, n))
            grams.append(a @ a.T + n * np.eye(n))
        else:
            grams.append(np.eye(n))
    return MetrizedComplex(dims, ds, grams)


def random_short_exact_sequence(rng: np.random.Generator, pieces_sub: list[int], pieces_quot: list[int]):
    """``0 -> C' -> C -> C'' -> 0`` with ``C = C' + C''`` as vector spaces.

    ``d = [[d', X], [0, d'']]`` with ``X_k = d'_k Y_k - Y_{k+1} d''_k`` for random
    ``Y``; ``C`` gets a random Gram matrix, ``C'`` the induced metric and
    ``C''`` the quotient metric (Schur complement). Returns ``(C, C', C'')``.
    """
    sub = random_acyclic_complex(rng, pieces_sub, gram=False)
    quo = random_acyclic_complex(rng, pieces_quot, gram=False)
    top = len(sub.dims)
    ys = [rng.standard_normal((sub.dims[k], quo.dims[k])) for k in range(top)]
    ds = []
    for k in range(top - 1):
        x = sub.differentials[k] @ ys[k] - ys[k + 1] @ quo.differentials[k]
        ds.append(np.block([[sub.differentials[k], x], [np.zeros((quo.dims[k + 1], sub.dims[k])), quo.differentials[k]]]))
    dims = [a + b for a, b in zip(sub.dims, quo.dims)]
    grams, g_sub, g_quo = [], [], []
    for k, n in enumerate(dims):
        a = rng.standard_normal((n, n))
        g = a @ a.T + n * np.eye(n)
        p = sub.dims[k]
        g11, g12, g22 = g[:p, :p], g[:p, p:], g[p:, p:]
        grams.append(g)
        g_sub.append(g11)
        g_quo.append(g22 - g12.T @ np.linalg.solve(g11, g12) if p else g22)
    total = MetrizedComplex(dims, ds, grams)
    return (
        total,
        MetrizedComplex(sub.dims, list(sub.differentials), g_sub),
        MetrizedComplex(quo.dims, list(quo.differentials), g_quo),
    )
