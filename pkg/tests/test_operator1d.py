import math

import numpy as np
import pytest

from torsionlab.deformation import make_profile
from torsionlab.operator1d import (
    BC,
    PERIODIC,
    BoundarySpec,
    Grid,
    assemble_circle,
    assemble_interval,
    assemble_witten_pair,
    degree_boundary_map,
)


def test_boundary_tags():
    assert BoundarySpec.parse("dn").tag == "DN"
    assert BoundarySpec.parse("P") == PERIODIC
    with pytest.raises(ValueError):
        BoundarySpec.parse("DNX")
    with pytest.raises(ValueError):
        BoundarySpec(BC.DIRICHLET, None)


@pytest.mark.parametrize(
    "left,right,fn,form",
    [("abs", "abs", "NN", "DD"), ("rel", "rel", "DD", "NN"), ("rel", "abs", "DN", "ND")],
)
def test_degree_boundary_map(left, right, fn, form):
    m = degree_boundary_map(left, right)
    assert m.function_bc.tag == fn
    assert m.oneform_bc.tag == form


def test_bad_condition_name():
    with pytest.raises(ValueError):
        degree_boundary_map("abs", "free")


@pytest.mark.parametrize("tag", ["DD", "NN", "DN", "ND"])
def test_flat_interval_eigenvalues_second_order(tag):
    L = 2.0
    exact = {
        "DD": (math.pi / L) ** 2,
        "NN": (math.pi / L) ** 2,
        "DN": (math.pi / (2 * L)) ** 2,
        "ND": (math.pi / (2 * L)) ** 2,
    }[tag]
    errs = []
    for n in (50, 100):
        op = assemble_interval(Grid(0.0, L, n), np.zeros(n + 1), BoundarySpec.parse(tag))
        ev = np.linalg.eigvalsh(op.dense())
        lam = ev[ev > 1e-8][0]
        errs.append(abs(lam - exact))
    assert errs[1] < 0.3 * errs[0]


def test_dirichlet_elimination_and_weights():
    op = assemble_interval(Grid(0.0, 1.0, 10), np.zeros(11), BoundarySpec.parse("DN"))
    assert op.n == 10
    assert op.weights[-1] == 0.5 and op.weights[0] == 1.0
    # symmetric matrix
    a = op.dense()
    np.testing.assert_allclose(a, a.T)


def test_matvec_matches_dense(rng):
    op = assemble_circle(Grid(0.0, 1.0, 16, True), rng.normal(size=16))
    v = rng.normal(size=16)
    np.testing.assert_allclose(op.matvec(v), op.dense() @ v, atol=1e-10)
    lo, hi = op.gershgorin()
    ev = np.linalg.eigvalsh(op.dense())
    assert lo <= ev[0] and ev[-1] <= hi


def test_shape_errors():
    with pytest.raises(ValueError):
        assemble_interval(Grid(0.0, 1.0, 10), np.zeros(10), BoundarySpec.parse("DD"))
    with pytest.raises(ValueError):
        assemble_interval(Grid(0.0, 1.0, 4), np.zeros(5), BoundarySpec.parse("DD"))
    with pytest.raises(ValueError):
        assemble_interval(Grid(0.0, 1.0, 10, True), np.zeros(10), PERIODIC)


def test_witten_pair_kernel_on_circle():
    prof = make_profile(2.0, "circle_periodic")
    fn, form = assemble_witten_pair(prof, Grid(-2.0, 6.0, 800, True))
    for op in (fn, form):
        assert np.linalg.eigvalsh(op.dense())[0] == pytest.approx(0.0, abs=1e-3)


def test_witten_pair_rejects_grid_outside_domain():
    prof = make_profile(1.0)
    with pytest.raises(ValueError):
        assemble_witten_pair(prof, Grid(-3.0, 2.0, 100), "abs", "abs")
