import math

import numpy as np
import pytest

from torsionlab import experiments
from torsionlab.experiments import (
    ExperimentReport,
    Row,
    YModel,
    interval_torsion,
    run_gluing,
    run_product,
    run_supertrace,
    split_spectrum,
)


def test_row_residual_and_report_verdicts():
    row = Row("x", {"T": 1}, measured=1.25, target=1.0)
    assert row.residual == pytest.approx(0.25)
    assert row.to_dict()["residual"] == pytest.approx(0.25)
    rep = ExperimentReport("demo", [row], {"a": True, "b": False})
    assert not rep.passed
    row.passed = False
    assert rep.failing_rows() == [row]
    assert rep.to_dict()["scenario"] == "demo"


def test_split_spectrum_interleaves_neumann_and_dirichlet():
    lam = split_spectrum(5)
    q = (math.pi / 2) ** 2
    np.testing.assert_allclose(lam, [0.0, q, q, 4 * q, 4 * q])


def test_pmap_preserves_order():
    assert experiments._pmap(lambda x: x * x, range(6), threads=3) == [0, 1, 4, 9, 16, 25]


def test_gluing_scenario_passes():
    rep = run_gluing()
    assert rep.passed, rep.failing_rows()
    assert {r.check for r in rep.rows} == {"gluing", "mv_bruteforce_vs_closed_form"}


def test_flat_interval_torsion():
    for i in (1, 2):
        val, _ = interval_torsion(0.0, i)
        assert val == pytest.approx(-1.5 * math.log(2.0), abs=1e-8)


def test_supertrace_scenario_small():
    rep = run_supertrace(T_list=(0, 4), t_list=(0.5, 2.0), n=400, n_discrete=64)
    assert rep.passed, rep.failing_rows()


def test_ymodel_validates_euler_characteristic():
    with pytest.raises(ValueError):
        YModel([np.zeros(2)], 1)
    y = YModel.circle(k_max=20)
    assert y.kernel_dims == [1, 1]
    st, stn = y.traces(0.5)
    assert st == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("y", [YModel.points(2), YModel.circle(k_max=50), YModel.points(1, rank=3)])
def test_product_scenario(y):
    rep = run_product(y, T=4.0, t_list=(0.2, 1.0), n=800)
    assert rep.passed, rep.failing_rows()
    if y.euler_characteristic == 0:
        assert rep.notes
