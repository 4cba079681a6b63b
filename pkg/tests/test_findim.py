import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torsionlab import findim
from torsionlab.acceptance import gram_orthogonal_change
from torsionlab.deformation import make_profile
from torsionlab.findim import (
    MetrizedComplex,
    cohomology,
    comparison_maps,
    discrete_witten,
    mv_complex,
    mv_complex_bruteforce,
    random_acyclic_complex,
    random_short_exact_sequence,
    small_projector,
    torsion,
    torsion_from_laplacians,
)


def elementary(a: float, gram=(1.0, 1.0)) -> MetrizedComplex:
    return MetrizedComplex([1, 1], [np.array([[a]])], [np.array([[gram[0]]]), np.array([[gram[1]]])])


def test_elementary_complex():
    assert torsion(elementary(2.0)) == pytest.approx(-math.log(2.0))
    # rescaling the target metric by c scales |d| by sqrt(c)
    assert torsion(elementary(2.0, (1.0, 9.0))) == pytest.approx(-math.log(6.0))


def test_validate_rejects_non_complex():
    cx = MetrizedComplex([1, 1, 1], [np.ones((1, 1)), np.ones((1, 1))], [np.eye(1)] * 3)
    with pytest.raises(ValueError):
        cx.validate()
    with pytest.raises(ValueError):
        MetrizedComplex([1, 1], [], [np.eye(1), np.eye(1)])


def test_json_round_trip(rng):
    cx = random_acyclic_complex(rng, [2, 1])
    again = MetrizedComplex.from_json(cx.to_json())
    assert again.dims == cx.dims
    for a, b in zip(again.differentials, cx.differentials):
        np.testing.assert_array_equal(a, b)
    assert torsion(again) == torsion(cx)


@settings(max_examples=30, deadline=None)
@given(pieces=st.lists(st.integers(0, 3), min_size=1, max_size=3), seed=st.integers(0, 2**16))
def test_singular_values_and_laplacians_agree(pieces, seed):
    rng = np.random.default_rng(seed)
    cx = random_acyclic_complex(rng, pieces)
    assert torsion(cx) == pytest.approx(torsion_from_laplacians(cx), abs=1e-8)
    assert cx.euler_characteristic == 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_torsion_invariant_under_isometric_basis_change(seed):
    rng = np.random.default_rng(seed)
    cx = random_acyclic_complex(rng, [2, 2])
    moved = gram_orthogonal_change(cx, rng)
    assert torsion(moved) == pytest.approx(torsion(cx), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_multiplicative_on_short_exact_sequences(seed):
    rng = np.random.default_rng(seed)
    tot, sub, quo = random_short_exact_sequence(rng, [1, 2], [2, 0])
    tot.validate()
    assert torsion(tot) == pytest.approx(torsion(sub) + torsion(quo), abs=1e-9)


def test_cohomology_of_cycle_and_path():
    cyc = discrete_witten("cycle", None, 16, interval=(0.0, 4.0))
    dims, bases = cohomology(cyc)
    assert dims == [1, 1]
    h0 = bases[0][:, 0]
    assert h0 @ cyc.grams[0] @ h0 == pytest.approx(1.0)
    path = discrete_witten("path", None, 16, interval=(0.0, 4.0), conditions=("abs", "abs"))
    assert cohomology(path)[0] == [1, 0]
    rel = discrete_witten("path", None, 16, interval=(0.0, 4.0), conditions=("rel", "rel"))
    assert cohomology(rel)[0] == [0, 1]


@pytest.mark.parametrize("n", [16, 64])
def test_discrete_cycle_torsion_matrix_tree(n):
    # the n-cycle graph Laplacian has det' = n * (number of spanning trees) = n^2;
    # with spacing h the edge Laplacian is that matrix over h^2
    L = 8.0
    h = L / n
    cyc = discrete_witten("cycle", None, n, interval=(0.0, L))
    assert torsion(cyc) == pytest.approx(-math.log(n) + (n - 1) * math.log(h), abs=1e-9)


@pytest.mark.parametrize("T", [0.0, 2.0])
def test_discrete_supertrace_at_large_time_is_euler_characteristic(T):
    cx = discrete_witten("path", make_profile(T), 40, conditions=("abs", "abs"))
    # Tr_s exp(-t Delta) -> chi for t beyond the inverse spectral gap
    assert sum((-1) ** k * np.exp(-1e4 * s).sum() for k, s in enumerate(cx.spectra())) == pytest.approx(1.0)
    t = 0.3
    direct = sum((-1) ** k * np.exp(-t * s).sum() for k, s in enumerate(cx.spectra()))
    assert cx.supertrace(t) == pytest.approx(direct, rel=1e-12)


def test_twisted_and_weighted_forms_share_spectra():
    prof = make_profile(2.0, "circle_periodic")
    a = discrete_witten("cycle", prof, 64, twisted=True)
    b = discrete_witten("cycle", prof, 64, twisted=False)
    for sa, sb in zip(a.spectra(), b.spectra()):
        np.testing.assert_allclose(np.sort(sa), np.sort(sb), rtol=1e-8, atol=1e-10)


def test_mv_complex_closed_form():
    cx = mv_complex(8.0, 3.0, 5.0)
    cx.validate()
    assert torsion(cx) == pytest.approx(-3 * math.log(2.0) + 0.5 * math.log(15.0), abs=1e-12)
    with pytest.raises(ValueError):
        mv_complex(8.0, 3.0, 4.0)


@pytest.mark.parametrize("L1", [4.0, 3.0])
def test_mv_bruteforce_matches_closed_form(L1):
    assert torsion(mv_complex_bruteforce(8.0, L1, n=64)) == pytest.approx(torsion(mv_complex(8.0, L1)), abs=1e-9)


def test_small_projector_rejects_threshold_on_eigenvalue():
    cx = elementary(1.0)
    with pytest.raises(ValueError):
        small_projector(cx, 1.0, 0)
    proj = small_projector(cx, 0.5, 0)
    assert proj.rank == 0


def test_comparison_maps_small_defects():
    res = comparison_maps(4.0, n=800)
    assert res.ranks
    assert res.e_defect < 1e-1
    assert res.composite < 1e-8
