import math
import warnings

import numpy as np
import pytest

from underbarrier import impurity as imp
from underbarrier.errors import DomainError, RegimeViolation, TruncationWarning
from underbarrier.potential import ImpurityParams

K = math.sqrt(0.5)


@pytest.fixture(scope="module")
def ip():
    return ImpurityParams(u=1e-9, l=0.8, a_imp=0.3, k=K)


@pytest.mark.parametrize("x,y", [(0.2, 0.5), (0.5, -0.4), (0.85, 1.3), (0.95, -2.0)])
def test_transport_equation(ip, x, y):
    assert imp.transport_residual(x, y, ip) < 1e-6


@pytest.mark.parametrize("y", [-0.5, 0.2, 1.0])
def test_no_flux_through_wire(ip, y):
    assert imp.boundary_slope(y, ip) < 1e-6


def test_closed_boundary_matches_quadrature(ip):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        quad = imp.sigma1_parts(0.5, 0.3, ip, boundary="quad").boundary
    closed = imp.sigma1_parts(0.5, 0.3, ip).boundary
    assert abs(quad - closed) <= 1e-5 * abs(closed)


def test_quadrature_tail_reported(ip):
    parts = imp.sigma1_parts(0.5, 0.3, ip, boundary="quad")
    assert 0 < parts.tail_bound <= 1.001 * imp.TAIL
    assert imp.sigma1_parts(0.5, 0.3, ip).tail_bound == 0


def test_linear_in_depth(ip):
    other = ImpurityParams(u=2 * ip.u, l=ip.l, a_imp=ip.a_imp, k=ip.k)
    assert imp.sigma1(1.5, 0.7, other) == pytest.approx(2 * imp.sigma1(1.5, 0.7, ip), rel=1e-12)
    assert imp.sigma1(1.5, 0.7, ImpurityParams(u=0.0, l=0.8, a_imp=0.3, k=K)) == 0


def test_unperturbed_action():
    # outside the barrier the homogeneous action is outgoing along y = 2k sqrt(x-1)
    s = imp.sigma0(1.5, 2 * K * math.sqrt(0.5), K)
    assert s.imag == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_constant_along_the_trajectory(ip):
    vals = [imp.sigma1_scaled(x, 2 * K * math.sqrt(x - 1), ip) for x in (1.2, 1.6, 2.0)]
    assert max(abs(v - vals[0]) for v in vals) < 1e-8 * abs(vals[0])


def test_modulation_zeros(ip):
    d = imp.cosine_zeros(ip)
    np.testing.assert_allclose(np.cos(4 * ip.k * d / ip.a_imp**2), 0.0, atol=1e-12)


def test_regime_checks():
    with pytest.raises(RegimeViolation, match="window"):
        imp.check_regime(ImpurityParams(u=1e-9, l=1.2, a_imp=0.3, k=K), 1e8)
    with pytest.raises(RegimeViolation, match="perturbative"):
        imp.check_regime(ImpurityParams(u=1e-3, l=0.8, a_imp=0.3, k=K), 1e8)
    with pytest.raises(RegimeViolation, match="semiclassical"):
        imp.check_regime(ImpurityParams(u=1e-9, l=0.8, a_imp=0.3, k=K), 30.0)


def test_profile_needs_exit(ip):
    with pytest.raises(DomainError):
        imp.psi_profile_outside(0.9, 0.0, ip, 1e8)


def test_report(ip):
    rep = imp.enhancement_report(ip, 1e8)
    assert rep["window_ok"] and rep["perturbative_ok"] and rep["semiclassical_ok"]
    assert rep["u_eff"] == pytest.approx(ip.u * math.exp(ip.enhancement_exponent))
    zero_k = imp.enhancement_report(ImpurityParams(u=1e-9, l=0.8, a_imp=0.3, k=0.0), 1e8)
    assert zero_k["wkb_only"] and not zero_k["window_ok"]


def test_pair_and_single_coefficients_limit():
    # both forms scale like a^2
    a = ImpurityParams(u=1e-9, l=0.8, a_imp=0.1, k=K)
    b = ImpurityParams(u=1e-9, l=0.8, a_imp=0.2, k=K)
    assert imp.enhancement_coefficient(b) / imp.enhancement_coefficient(a) == pytest.approx(4.0)
    assert imp.enhancement_coefficient_pair(b) / imp.enhancement_coefficient_pair(a) == pytest.approx(4.0)
