import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torsionlab.acceptance import flat_oracle, hurwitz_logdet
from torsionlab.deformation import make_profile
from torsionlab.operator1d import BoundarySpec, Grid, assemble_circle, assemble_interval, assemble_witten_pair
from torsionlab.spectral import (
    ZeroModeError,
    eigenpairs,
    eigenvalues,
    eigenvalues_below,
    eigenvector,
    flat_logdet,
    gelfand_yaglom_logdet,
    ratio_series_logdet,
    regularized_logdet,
    richardson,
)


def _mp_logdet(L, shift, scale=math.pi, mult=1):
    # zeta(s) = c^{-2s} zeta_H(2s, shift), differentiated with mpmath
    c = mpmath.mpf(scale) / L
    z0 = mpmath.zeta(0, shift)
    z1 = mpmath.zeta(0, shift, derivative=1)
    return float(-mult * (-2 * mpmath.log(c) * z0 + 2 * z1))


@pytest.mark.parametrize("L", [0.5, 2.0, 8.0])
@pytest.mark.parametrize("shift", [0.5, 1.0])
def test_hurwitz_closed_form_against_mpmath(L, shift):
    assert hurwitz_logdet(L, shift) == pytest.approx(_mp_logdet(L, shift), abs=1e-12)


@pytest.mark.parametrize("tag", ["DD", "DN", "ND", "NN", "P"])
@pytest.mark.parametrize("L", [1.0, 3.0])
def test_gelfand_yaglom_flat_determinants(tag, L):
    bc = BoundarySpec.parse(tag)
    fn = regularized_logdet if tag in ("NN", "P") else gelfand_yaglom_logdet
    val = fn(None, 0.0, L, bc).value
    assert val == pytest.approx(flat_oracle(L, tag), abs=1e-8)
    assert val == pytest.approx(flat_logdet(L, tag).value, abs=1e-8)


def test_zero_mode_detected():
    with pytest.raises(ZeroModeError):
        gelfand_yaglom_logdet(None, 0.0, 1.0, BoundarySpec.parse("NN"))


@pytest.mark.parametrize("m,L", [(0.7, 2.0), (2.0, 1.5)])
def test_massive_neumann_determinant(m, L):
    V = lambda s: m * m  # noqa: E731
    val = gelfand_yaglom_logdet(V, 0.0, L, BoundarySpec.parse("NN")).value
    assert val == pytest.approx(math.log(2 * m * math.sinh(m * L)), abs=1e-9)


@pytest.mark.parametrize("a,L", [(0.8, 2.0), (1.5, 4.0)])
def test_robin_ends_with_kernel(a, L):
    # -u'' + a^2 u with u' = -a u at both ends: spectrum {0} and a^2 + (pi j / L)^2,
    # so det' equals the Dirichlet determinant of -d^2 + a^2
    V = lambda s: a * a  # noqa: E731
    val = regularized_logdet(V, 0.0, L, BoundarySpec.parse("NN"), slopes=(-a, -a)).value
    assert val == pytest.approx(math.log(2 * math.sinh(a * L) / a), abs=1e-8)


# ---------------------------------------------------------------------------
# eigenvalue kernels


def _random_tridiag(rng, n):
    d = rng.uniform(1.0, 5.0, n)
    e = rng.uniform(-1.0, 1.0, n - 1)
    return d, e


@settings(max_examples=25, deadline=None)
@given(n=st.integers(3, 40), x=st.floats(-2.0, 8.0), seed=st.integers(0, 2**16))
def test_sturm_count_matches_dense(n, x, seed):
    from torsionlab import _backend

    rng = np.random.default_rng(seed)
    d, e = _random_tridiag(rng, n)
    c = rng.uniform(-1.0, 1.0)
    a = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    ev = np.linalg.eigvalsh(a)
    if np.min(np.abs(ev - x)) > 1e-9:
        assert _backend.kernels.sturm_count(d, e, x) == int(np.sum(ev < x))
    a[0, -1] += c
    a[-1, 0] += c
    ev = np.linalg.eigvalsh(a)
    if n >= 3 and np.min(np.abs(ev - x)) > 1e-9:
        assert _backend.kernels.sturm_count_periodic(d, e, c, x) == int(np.sum(ev < x))


def test_backends_agree(backend, rng):
    from torsionlab import _kernels_py

    n = 300
    d, e = _random_tridiag(rng, n)
    idx = np.arange(10, dtype=np.int64)
    lo, hi = float(d.min() - 2), float(d.max() + 2)
    ref = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))[:10]
    got = backend.bisect_tridiag(d, e, idx, lo, hi, 1e-13, 1e-13)
    np.testing.assert_allclose(got, ref, atol=1e-11)
    got_p = backend.bisect_periodic(d, e, 0.3, idx, lo, hi, 1e-13, 1e-13)
    ref_p = _kernels_py.bisect_periodic(d, e, 0.3, idx, lo, hi, 1e-13, 1e-13)
    np.testing.assert_allclose(got_p, ref_p, atol=1e-11)


@pytest.mark.parametrize("periodic", [False, True])
@pytest.mark.parametrize("method", ["bisect", "lapack"])
def test_eigenvalues_methods_match_dense(periodic, method, rng):
    n = 120
    grid = Grid(0.0, 2.0, n, periodic)
    V = rng.uniform(0.0, 3.0, n if periodic else n + 1)
    op = assemble_circle(grid, V) if periodic else assemble_interval(grid, V, BoundarySpec.parse("DN"))
    ref = np.linalg.eigvalsh(op.dense())[:12]
    got = eigenvalues(op, 12, method=method).eigenvalues
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-9)


def test_periodic_count_below_matches_dense():
    prof = make_profile(3.0, "circle_periodic")
    fn, _ = assemble_witten_pair(prof, Grid(-2.0, 6.0, 400, True))
    ref = np.linalg.eigvalsh(fn.dense())
    got = eigenvalues_below(fn, 50.0)
    assert got.size == int(np.sum(ref < 50.0))
    np.testing.assert_allclose(got, ref[: got.size], atol=1e-9)


def test_kernel_split_on_flat_circle():
    op = assemble_circle(Grid(0.0, 2 * math.pi, 256, True), np.zeros(256))
    res = eigenvalues(op, 5)
    assert res.kernel_dim == 1
    np.testing.assert_allclose(res.nonzero[:2], [1.0, 1.0], rtol=1e-3)


def test_eigenvectors_are_weighted_orthonormal():
    op = assemble_interval(Grid(0.0, 1.0, 200), np.zeros(201), BoundarySpec.parse("NN"))
    res = eigenpairs(op, k=4)
    u = res.eigenvectors
    gram = op.h * (u.T * op.weights) @ u
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)
    v = eigenvector(op, res.eigenvalues[2])
    assert abs(op.h * np.sum(op.weights * v * u[:, 2])) == pytest.approx(1.0, abs=1e-8)


# ---------------------------------------------------------------------------
# extrapolation and ratio series


def test_richardson_removes_quadratic_error():
    h = np.array([0.1, 0.05, 0.025])
    vals = 3.0 + 2.0 * h**2 + 5.0 * h**4
    res = richardson(vals)
    assert res.value == pytest.approx(3.0, abs=1e-5)
    assert res.monotone
    assert res.error == pytest.approx(abs(res.value - (4 * vals[1] - vals[0]) / 3), rel=1e-12)


def test_richardson_flags_oscillation():
    assert not richardson([1.0, 1.1, 1.05]).monotone


def test_ratio_series_recovers_shifted_determinant():
    # DD spectrum of -d^2 + m^2 against -d^2 on [0, 1]
    m = 0.5
    k = np.arange(1, 200001, dtype=float)
    ref = (math.pi * k) ** 2
    res = ratio_series_logdet(ref + m * m, ref, math.log(2.0))
    assert res.value == pytest.approx(math.log(2 * math.sinh(m) / m), abs=1e-5)


def test_pure_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = "from torsionlab import _backend; print(_backend.BACKEND)"
    env = dict(os.environ, TORSIONLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
