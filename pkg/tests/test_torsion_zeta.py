import math

import numpy as np
import pytest
from scipy.integrate import quad

from torsionlab.deformation import make_profile
from torsionlab.operator1d import BoundarySpec, Grid, assemble_circle, assemble_interval
from torsionlab.torsion_zeta import (
    analytic_torsion_1d,
    coupled_strength,
    flat_spectrum,
    harmonic_torsion_oracle,
    heat_supertrace_N,
    heat_trace,
    heat_trace_flat,
    kernel_diagonal,
    split_model_trace,
    zeta_large_prime0,
    zeta_small_prime0,
)

LOG2 = math.log(2.0)


def test_supertrace_on_explicit_spectra():
    spectra = [np.array([0.0, 1.0]), np.array([0.0, 2.0, 3.0])]
    val = heat_supertrace_N(spectra, 1.0)
    assert val == pytest.approx(-(math.exp(-2) + math.exp(-3)), rel=1e-14)
    arr = heat_supertrace_N(spectra, [0.5, 1.0])
    assert arr.shape == (2,)
    with pytest.raises(ValueError):
        heat_supertrace_N(spectra, 0.0)


@pytest.mark.parametrize("lam", [0.3, 1.0, 7.5])
def test_large_time_part_is_exponential_integral(lam):
    ref, _ = quad(lambda t: math.exp(-t * lam) / t, 1.0, np.inf)
    assert zeta_large_prime0([[0.0], [lam]]) == pytest.approx(-ref, rel=1e-10)


def test_large_time_part_rejects_tiny_gap():
    with pytest.raises(ValueError):
        zeta_large_prime0([[], [1e-9, 1.0]])


@pytest.mark.parametrize("L", [1.0, 2.0 * math.pi, 8.0])
def test_two_path_identity_flat_circle(L):
    # split at t = 1: E_1 tail plus the finite part of the small-time integral
    spec = flat_spectrum(L, "P", 4e6)
    spectra = [spec, spec]
    asym = {-0.5: -L / math.sqrt(4 * math.pi), 0.0: 1.0}
    total = zeta_large_prime0(spectra) + zeta_small_prime0(spectra, asym)
    assert total == pytest.approx(2.0 * math.log(L), abs=1e-6)


def test_flat_spectrum_counts():
    lam = flat_spectrum(math.pi, "DD", 100.0)
    np.testing.assert_allclose(lam, np.arange(1, 11) ** 2)
    assert flat_spectrum(math.pi, "NN", 100.0)[0] == 0.0
    per = flat_spectrum(2 * math.pi, "P", 4.5)
    np.testing.assert_allclose(per, [0, 1, 1, 4, 4])


def test_flat_torsions():
    assert analytic_torsion_1d("circle", length=8.0).log_torsion == pytest.approx(-3 * LOG2, abs=1e-12)
    tv = analytic_torsion_1d("interval", interval=(-2, 2), conditions=("abs", "abs"))
    assert tv.log_torsion == pytest.approx(-1.5 * LOG2, abs=1e-12)
    for gy, exact in zip(tv.details["gelfand_yaglom"], tv.per_degree_logdets):
        assert gy == pytest.approx(exact, abs=1e-8)
    with pytest.raises(ValueError):
        analytic_torsion_1d("sphere", length=1.0)


@pytest.mark.parametrize("T", [1.0, 3.0])
@pytest.mark.parametrize("cond", ["abs", "rel"])
def test_deformed_interval_matches_harmonic_oracle(T, cond):
    prof = make_profile(T, "interval_even")
    tv = analytic_torsion_1d("interval", profile=prof, conditions=(cond, cond))
    assert tv.log_torsion == pytest.approx(harmonic_torsion_oracle(prof, cond), abs=1e-7)


def test_deformed_circle_matches_harmonic_oracle():
    prof = make_profile(2.0, "circle_periodic")
    tv = analytic_torsion_1d("circle", profile=prof)
    assert tv.log_torsion == pytest.approx(harmonic_torsion_oracle(prof), abs=1e-7)


def test_opposite_twist_on_even_profile():
    prof = make_profile(2.0, "interval_even")
    a = analytic_torsion_1d("interval", profile=prof, conditions=("abs", "abs"), twist=-1.0)
    assert a.log_torsion == pytest.approx(harmonic_torsion_oracle(prof, "abs", twist=-1.0), abs=1e-7)


def test_heat_trace_matches_flat_circle():
    n = 2000
    op = assemble_circle(Grid(0.0, 2 * math.pi, n, True), np.zeros(n))
    for t in (0.5, 2.0):
        assert heat_trace(op, t) == pytest.approx(float(heat_trace_flat(2 * math.pi, "P", t)[0]), rel=1e-5)


def test_kernel_diagonal_interior_is_free_heat_kernel():
    n = 2000
    op = assemble_interval(Grid(0.0, 1.0, n), np.zeros(n + 1), BoundarySpec.parse("DD"))
    t = 1e-3
    _, vals, bound = kernel_diagonal(op, t, positions=[0.5])
    assert vals[0] == pytest.approx(1.0 / math.sqrt(4 * math.pi * t), rel=1e-3)
    assert bound <= 1e-8


def test_coupled_strength():
    assert coupled_strength(1.0, 0.5) == (128.0, False)
    assert coupled_strength(10.0, 0.01, cap=1e6) == (1e6, True)
    with pytest.raises(ValueError):
        coupled_strength(1.0, 1.5)


def test_split_model_trace():
    t = 0.7
    direct = sum(math.exp(-t * (math.pi * k) ** 2) for k in range(1, 50))
    direct += 1 + sum(math.exp(-t * (math.pi * k) ** 2) for k in range(1, 50))
    assert float(split_model_trace(t)[0]) == pytest.approx(direct, rel=1e-12)
