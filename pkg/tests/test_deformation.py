import math

import numpy as np
import pytest

from torsionlab.deformation import (
    ProfileKind,
    alpha_integral,
    cell_average_potentials,
    evaluate,
    make_profile,
    rho,
    witten_potentials,
)


@pytest.mark.parametrize("kind", list(ProfileKind))
def test_profile_is_c2_across_breakpoints(kind):
    prof = make_profile(3.0, kind, cutoff_width=0.1)
    # the collar ramp is steep (third derivative ~ T/w), so probe at a fraction of w
    eps = 1e-8 * prof.width
    for b in prof.breakpoints():
        lo, hi = prof.domain
        if not (lo + 1e-6 < b < hi - 1e-6):
            continue
        left = np.array(evaluate(prof, b - eps))
        right = np.array(evaluate(prof, b + eps))
        # f, f', f'' all continuous; scale tolerance with T^2
        np.testing.assert_allclose(left, right, atol=1e-4 * (1 + prof.T))


def test_derivatives_match_finite_differences():
    prof = make_profile(2.0, "interval_odd", cutoff_width=0.1)
    s = np.linspace(-1.9, 1.9, 37) + 0.0123
    h = 1e-5
    f, f1, f2 = evaluate(prof, s)
    fp, f1p, _ = evaluate(prof, s + h)
    fm, f1m, _ = evaluate(prof, s - h)
    np.testing.assert_allclose((fp - fm) / (2 * h), f1, atol=1e-6)
    np.testing.assert_allclose((f1p - f1m) / (2 * h), f2, atol=1e-4)


def test_odd_profile_symmetry_and_plateaus():
    prof = make_profile(5.0, "interval_odd")
    s = np.linspace(0.0, 2.0, 101)
    f, f1, _ = evaluate(prof, s)
    g, g1, _ = evaluate(prof, -s)
    np.testing.assert_allclose(g, -f, atol=1e-12)
    np.testing.assert_allclose(g1, f1, atol=1e-12)
    # flat beyond the collar
    _, slope, _ = evaluate(prof, np.linspace(1.01, 2.0, 20))
    assert np.max(np.abs(slope)) < 1e-12


def test_width_rule():
    assert make_profile(0.5, cutoff_width=0.1).width == pytest.approx(0.1)
    assert make_profile(3.0, cutoff_width=0.1).width == pytest.approx(math.exp(-9.0))
    deep = make_profile(40.0)
    assert deep.width == deep.cutoff_width_min


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_profile(-1.0)
    with pytest.raises(ValueError):
        make_profile(1.0, cutoff_width=0.3)


def test_rho_is_smooth_switch():
    x = np.array([0.0, 0.5, 0.75, 1.0])
    r = rho(x)
    np.testing.assert_allclose(r, [0.0, 0.0, 1.0, 1.0])


def test_dict_round_trip():
    prof = make_profile(4.0, "circle_periodic", cutoff_width=0.05)
    again = type(prof).from_dict(prof.to_dict())
    assert again == prof
    assert again.period == 8.0


def test_cell_averages_integrate_exactly():
    prof = make_profile(4.0, "interval_odd")
    n = 64  # the collar is far narrower than h
    cell = cell_average_potentials(prof, -2.0, 2.0, n)
    h = 4.0 / n
    widths = np.full(n + 1, h)
    widths[[0, -1]] = 0.5 * h
    fine = np.linspace(-2.0, 2.0, 400001)
    _, f1, _ = evaluate(prof, fine)
    sq = np.trapezoid(f1**2, fine)
    _, fa, _ = evaluate(prof, -2.0)
    _, fb, _ = evaluate(prof, 2.0)
    assert np.dot(widths, cell.v_plus) == pytest.approx(sq + fb - fa, rel=1e-7)
    assert np.dot(widths, cell.v_minus) == pytest.approx(sq - fb + fa, rel=1e-7)


def test_node_potentials_formula():
    prof = make_profile(2.0, "interval_odd", cutoff_width=0.1)
    s = np.linspace(-1.5, 1.5, 11)
    pots = witten_potentials(prof, s)
    _, f1, f2 = evaluate(prof, s)
    np.testing.assert_allclose(pots.v_plus - pots.v_minus, 2 * f2)
    np.testing.assert_allclose(pots.v_plus + pots.v_minus, 2 * f1**2)


def test_alpha_integral_flat_and_symmetric():
    flat = make_profile(0.0, "interval_odd")
    assert alpha_integral(flat) == pytest.approx(4.0, rel=1e-12)
    prof = make_profile(3.0, "interval_odd")
    # odd profile: e^{2f} and e^{-2f} integrate to the same value
    assert alpha_integral(prof, 1.0) == pytest.approx(alpha_integral(prof, -1.0), rel=1e-10)
