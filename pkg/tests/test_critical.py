import math

import numpy as np
import pytest

from underbarrier import critical as crit
from underbarrier.errors import NoConvergence, NoRealRoot, WindowViolation
from underbarrier.hj_solver import SaddleMap
from underbarrier.potential import BarrierParams


def test_extrema_satisfy_fixed_point(p_wide):
    v_a, x_a, v_b, x_b = crit.find_extrema(p_wide)
    assert v_a < v_b
    for v in (v_a, v_b):
        assert abs(crit.fixed_point_residual(v, p_wide)) < 1e-12
    # extrema of the real curve: d sigma / dx = 0 there
    m = SaddleMap(p_wide)
    assert abs(m.r(v_b)) < 1e-10
    assert m("F", v_b).real == pytest.approx(x_b, rel=1e-12)


def test_homogeneous_extrema():
    p = BarrierParams(B=30.0, gamma=0.2, alpha0=0.0, a=1.0)
    v_a, x_a, v_b, x_b = crit.find_extrema(p)
    assert v_a is None and x_a is None
    assert v_b == pytest.approx(2 * math.sqrt(0.2), rel=1e-12)
    assert x_b == 1.0


def test_folds_ordered_and_stationary(p_wide):
    c1, c2 = crit.find_folds(p_wide)
    m = SaddleMap(p_wide)
    assert c1.x.real > c2.x.real
    assert c1.v.real < c2.v.real
    for f in (c1, c2):
        assert abs(m("F_v", f.v)) < 1e-12


def test_narrow_profile_folds_are_complex_pair(p_narrow):
    c1, c2 = crit.find_folds(p_narrow)
    assert c1.v == pytest.approx(c2.v.conjugate(), abs=1e-10)
    assert abs(c1.x.imag) > 1e-4


def test_homogeneous_has_no_fold_pair():
    p = BarrierParams(B=30.0, gamma=0.2, alpha0=0.0, a=1.0)
    with pytest.raises(NoRealRoot):
        crit.find_folds(p)
    with pytest.raises(NoConvergence):
        crit.find_critical_width(p)


def test_critical_point_is_degenerate(p_near):
    a0, x0, v0 = crit.find_critical_width(p_near)
    m = SaddleMap(p_near.replace(a=a0))
    assert abs(m("F_v", v0)) < 1e-10
    assert abs(m("F_vv", v0)) < 1e-10
    assert m("F", v0).real == pytest.approx(x0, abs=1e-12)


def test_window_enforced(p_wide):
    with pytest.raises(WindowViolation):
        crit.unfold_cubic(p_wide.replace(a=3.0))


def test_cubic_model_matches_map(p_near):
    ex = crit.unfold_cubic(p_near)
    # the residual of the cubic model is quartic in (v - v0) and quadratic in (a - a0)
    for dv in (0.02, 0.04):
        res = abs(crit.singular_expansion_residual(p_near, ex.v0 + dv, ex))
        assert res < 5 * dv**4 + 5 * (p_near.a - ex.a0) ** 2


def test_folds_separate_like_delta(p_near):
    ex = crit.unfold_cubic(p_near)
    p = p_near.replace(a=ex.a0 + 0.01)
    c1, c2 = crit.find_folds(p)
    half = 0.5 * abs(c2.v - c1.v)
    assert half == pytest.approx(ex.delta(p.a), rel=0.05)


def test_fold_piercing_height_matches_Delta(p_near):
    ex = crit.unfold_cubic(p_near)
    p = p_near.replace(a=ex.a0 - 0.01)
    ys = sorted(y for _, y, _ in crit.fold_piercings(p))
    assert ys[0] == pytest.approx(-ys[1], rel=1e-8)
    assert ys[1] == pytest.approx(ex.Delta(p.a), rel=0.05)


def test_singularity_listing_keys(p_near):
    sp = crit.singularity_positions(p_near)
    assert set(sp) == {"regime", "Delta", "literal", "unfolding", "tracked"}
    assert len(sp["tracked"]) == 2


def test_action_expansion_linear_term_is_exit_momentum(p_near):
    A, B, quartic = crit.action_expansion_coeffs(p_near)
    ex = crit.unfold_cubic(p_near)
    m = SaddleMap(p_near.replace(a=ex.a0))
    assert A == pytest.approx(-m.r(ex.v0).real, rel=1e-12)
    h = 1e-6
    fd = -(m.r(ex.v0 + h) - m.r(ex.v0 - h)).real / (2 * h)
    assert B == pytest.approx(fd, rel=1e-6)
    assert quartic == pytest.approx(0.75 * ex.c_cubic * B, rel=1e-14)


def test_quartic_stokes_lines():
    s = crit.stokes_lines_quartic(1.0, 0.1, 1.0)
    assert len(s.lines) == 8
    assert s.max_violation(lambda v: crit.quartic_action(v - 1.0 - 0.1j, 0.1)) < 1e-10
    s0 = crit.stokes_lines_quartic(1.0, 0.0, 1.0)
    assert len(s0.lines) == 8


def test_stokes_2d_needs_narrow_profile(p_near):
    with pytest.raises(WindowViolation):
        crit.trace_stokes_lines_2d(p_near)
    ex = crit.unfold_cubic(p_near)
    s = crit.trace_stokes_lines_2d(p_near.replace(a=ex.a0 - 0.05))
    assert crit.stokes_violation(s) < 1e-10


def test_caustic_family_conserves_energy(p_near):
    ex = crit.unfold_cubic(p_near)
    tau = np.linspace(0.0, 1.0, 7)
    for b in (-0.1, 0.0, 0.2):
        e = crit.caustic_energy(b, ex.x0, p_near.gamma, ex.tan_theta, tau)
        np.testing.assert_allclose(e, p_near.gamma - 1.0, atol=1e-12)


def test_caustic_tangency_slope(p_near):
    fam = crit.caustic_trajectories(p_near, [0.0, 0.1])
    T = crit.unfold_cubic(p_near).tan_theta
    for c in fam:
        slope = np.gradient(c.x, c.eta)[len(c.eta) // 2]
        assert slope == pytest.approx(T, rel=1e-3)
