import math

import numpy as np
import pytest

from underbarrier import trajectory as tr
from underbarrier.errors import NoRoot
from underbarrier.potential import BarrierParams


def test_trajectory_shape_and_energy(p_wide):
    t = tr.integrate_trajectory(p_wide)
    np.testing.assert_allclose(t.x_of_tau, t.x_b - t.tau_grid**2, atol=1e-12)
    assert abs(t.eta_of_tau[-1] - t.v_b) < 1e-8
    assert np.max(np.abs(t.energy_residual(p_wide.gamma))) < 1e-10


def test_A0_closed_form(p_wide):
    assert tr.action_A0(p_wide) == pytest.approx(tr.A0_closed(p_wide), rel=1e-10)


def test_wkb_limit():
    p = BarrierParams(B=30.0, gamma=0.2, alpha0=0.0, a=1.0)
    r = tr.penetration(p)
    assert r.A0 == pytest.approx(4 * p.B / 3 * (1 - 3 * p.gamma), rel=1e-12)
    assert r.A1 == pytest.approx(4 * p.B * p.gamma, rel=1e-12)
    assert r.w_log == pytest.approx(-4 * p.B / 3, rel=1e-12)


def test_inhomogeneity_helps(p_wide):
    r = tr.penetration(p_wide)
    assert r.w_log > r.wkb_log


def test_two_routes_agree(p_wide):
    assert tr.two_route(p_wide)["rel_diff"] < 1e-8


def test_threshold_is_root(p_wide):
    th = tr.find_threshold(p_wide)
    assert abs(tr.exponent_over_B(p_wide.replace(a=th.a_R))) < 1e-10
    assert th.a_R > th.a0
    assert th.slope > 0


def test_no_threshold_without_profile():
    with pytest.raises(NoRoot):
        tr.find_threshold(BarrierParams(B=30.0, gamma=0.2, alpha0=0.0, a=1.0))


def test_A1_substitution_consistent():
    # the log substitution used for wide spans agrees with plain quadrature
    from scipy import integrate

    p = BarrierParams.from_alpha0_sq(30.0, 0.2, 0.03, 2.0)
    v_b = 5.5  # upper limit with 2 v^2 / a^2 beyond the substitution switch
    plain = integrate.quad(lambda e: math.sqrt(p.gamma + p.alpha0_sq * math.exp(2 * e * e / p.a**2)), 0, v_b,
                           epsrel=1e-13, limit=400)[0]
    assert tr.action_A1(p, v_b) == pytest.approx(2 * p.B * plain, rel=1e-9)
