"""Tunneling through a barrier with a weak localized impurity.

sigma = sigma0 + sigma1 with sigma0 the homogeneous-wire action and sigma1
the first-order correction, linear in the impurity depth u.  Quantities that
grow like exp(E), E = (4k^2 - l^2)/a^2, are computed in the scaled form
sigma1 exp(-E) / u to keep them finite.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, OutOfRange, QuadratureFailure, RegimeViolation, TruncationWarning
from .potential import EXPONENT_CAP, ImpurityParams

#: Relative size of the neglected Gaussian tail in the semi-infinite integral.
TAIL = 1e-16

#: "Much smaller than" is read as "below this fraction".
MUCH_LESS = 0.1


def sqrt_outgoing(x: float) -> complex:
    """sqrt(1 - x) continued to x > 1 as -i sqrt(x - 1) (outgoing wave beyond the exit)."""
    return complex(math.sqrt(1.0 - x)) if x <= 1.0 else -1j * math.sqrt(x - 1.0)


def sigma0(x: float, y: float, k: float) -> complex:
    """k y + i int_0^x sqrt(1 - x1) dx1 on the outgoing branch."""
    if k * k >= 1.0:
        raise DomainError(f"k^2 = {k * k:g} must be below 1")
    s = sqrt_outgoing(x)
    return k * y + 1j * (2.0 / 3.0) * (1.0 - (1.0 - x) * s)


def _u_scaled(x1: complex, z: complex, p: ImpurityParams, shift: float, mirror: bool) -> complex:
    """u(x1, z) exp(-shift) / u for the Gaussian pair (the depth sign included)."""
    a2 = p.a_imp**2
    e1 = -((x1 - p.l) ** 2 + z * z) / a2 - shift
    val = -cmath.exp(e1) if e1.real > -745 else 0j
    if mirror:
        e2 = -((x1 + p.l) ** 2 + z * z) / a2 - shift
        if e2.real > -745:
            val -= cmath.exp(e2)
    if e1.real > EXPONENT_CAP:
        raise OutOfRange(f"impurity exponent {e1.real:.4g} beyond the cap", cap=EXPONENT_CAP)
    return val


def _cquad(f, lo, hi, points=None):
    pts = [t for t in (points or []) if lo < t < hi]
    with warnings.catch_warnings():
        # the achieved error is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            f, lo, hi, complex_func=True, epsabs=0.0, epsrel=1e-12, limit=500, points=pts or None
        )
    err = abs(err)
    if not math.isfinite(err) or err > 1e-8 * abs(val) + 1e-300:
        raise QuadratureFailure(f"impurity quadrature error {err:.3g} for value {abs(val):.3g}", error=err)
    return val


@dataclass
class Sigma1Parts:
    boundary: complex
    interior: complex
    tail_bound: float
    shift: float

    @property
    def total(self) -> complex:
        return self.boundary + self.interior


def _exp_erfc(log_pref: float, z: complex, gauge: bool) -> complex:
    """exp(log_pref) erfc(z) through the Faddeeva function, without overflow.

    With ``gauge`` the z-independent constant 2 exp(log_pref) is subtracted,
    which is the accurate representation for Re z < 0.
    """
    if z.real >= 0:
        val = cmath.exp(log_pref - z * z) * complex(special.wofz(1j * z))
        return val - 2.0 * math.exp(log_pref) if gauge else val
    rest = -cmath.exp(log_pref - z * z) * complex(special.wofz(-1j * z))
    return rest if gauge else 2.0 * math.exp(log_pref) + rest


def boundary_term_closed(
    x: float, y: float, p: ImpurityParams, shift: float = 0.0, mirror: bool = True, gauge: bool = False
) -> complex:
    """Closed form of the semi-infinite y1 integral (complementary error function).

    ``gauge=True`` removes a constant that does not depend on (x, y); the
    transport equation only sees derivatives, and the constant otherwise
    swamps the variable part in double precision.
    """
    c = y - 2j * p.k * sqrt_outgoing(x) + 2j * p.k
    n = 2.0 if mirror else 1.0
    pref = -n * p.a_imp * math.sqrt(math.pi) / (4.0 * p.k)
    return pref * _exp_erfc(-p.l**2 / p.a_imp**2 - shift, c / p.a_imp, gauge)


def sigma1_parts(
    x: float,
    y: float,
    p: ImpurityParams,
    *,
    shift: float | None = None,
    mirror: bool = True,
    boundary: str = "erfc",
    gauge: bool = False,
) -> Sigma1Parts:
    """The two integrals of the first-order correction, divided by u exp(shift).

    ``shift`` defaults to the enhancement exponent E.  With ``mirror=False``
    only the Gaussian centred at x = +l is kept.  The semi-infinite integral
    is a complex Gaussian; ``boundary="erfc"`` evaluates it in closed form,
    ``boundary="quad"`` by truncated quadrature along the real y1 axis, which
    loses relative accuracy where the integrand oscillates strongly.
    """
    if p.k == 0:
        raise DomainError("sigma1 requires a nonzero tangent wave vector k")
    E = p.enhancement_exponent if shift is None else shift
    k, a = p.k, p.a_imp
    s_x = sqrt_outgoing(x)
    Y = y - 2j * k * s_x
    c = Y + 2j * k

    # semi-infinite part, truncated where the Gaussian falls below TAIL of its peak
    start = max(0.0, -c.real)
    y_trunc = start + a * math.sqrt(math.log(1.0 / TAIL))
    tail = math.exp(-((y_trunc - start) ** 2) / a**2)
    if boundary == "quad":
        b_val = _cquad(lambda y1: _u_scaled(0.0, y1 + c, p, E, mirror) / (2.0 * k), 0.0, y_trunc, points=[start])
        if tail > TAIL * 1.0001:
            warnings.warn(TruncationWarning(f"tail bound {tail:.3g}", tail), stacklevel=2)
    else:
        b_val = boundary_term_closed(x, y, p, shift=E, mirror=mirror, gauge=gauge)
        tail = 0.0

    # interior part; s = sqrt(1 - x1) below the exit point, q = sqrt(x1 - 1) above it
    peaks_s = [math.sqrt(1.0 - p.l)] if p.l < 1 else []
    peaks_q = [math.sqrt(p.l - 1.0)] if p.l > 1 else []
    s_lo = s_x.real if x <= 1.0 else 0.0
    inner = _cquad(lambda s: 1j * _u_scaled(1.0 - s * s, Y + 2j * k * s, p, E, mirror), s_lo, 1.0, points=peaks_s)
    if x > 1.0:
        inner += _cquad(lambda q: -_u_scaled(1.0 + q * q, Y + 2.0 * k * q, p, E, mirror), 0.0, math.sqrt(x - 1.0),
                        points=peaks_q)
    return Sigma1Parts(boundary=b_val, interior=inner, tail_bound=tail, shift=E)


def sigma1_scaled(x: float, y: float, p: ImpurityParams, mirror: bool = True) -> complex:
    """sigma1 exp(-E) / u."""
    return sigma1_parts(x, y, p, mirror=mirror).total


def sigma1(x: float, y: float, p: ImpurityParams, mirror: bool = True) -> complex:
    """First-order action correction; warns outside the perturbative regime."""
    if p.u == 0:
        return 0j
    if not p.perturbative():
        warnings.warn(f"u exp(E) = {p.u * math.exp(min(p.enhancement_exponent, EXPONENT_CAP)):.3g} is not small",
                      stacklevel=2)
    E = p.enhancement_exponent
    if E + math.log(p.u) > EXPONENT_CAP:
        raise OutOfRange(f"sigma1 ~ exp({E:.4g}) overflows", cap=EXPONENT_CAP)
    return p.u * math.exp(E) * sigma1_scaled(x, y, p, mirror)


def _h_default(p: ImpurityParams) -> float:
    # the correction oscillates transversally with wavenumber ~ 4k/a^2
    return 0.005 * p.a_imp**2


def transport_residual(x: float, y: float, p: ImpurityParams, h: float | None = None) -> float:
    """Relative residual of 2i sqrt(1-x) d sigma1/dx + 2k d sigma1/dy + u(x, y) = 0.

    Sixth-order central differences on the scaled correction, with the
    additive constant of the boundary term removed.
    """
    h = h or _h_default(p)
    # one representation across the whole stencil
    gauge = y < 0
    f = lambda xx, yy: sigma1_parts(xx, yy, p, gauge=gauge).total
    w = (1.0 / 60, -3.0 / 20, 3.0 / 4)
    hx = min(h, 0.02 * (1.0 - x)) if x < 1.0 else h
    dx = sum(c * (f(x + j * hx, y) - f(x - j * hx, y)) for c, j in zip(w, (3, 2, 1))) / hx
    dy = sum(c * (f(x, y + j * h) - f(x, y - j * h)) for c, j in zip(w, (3, 2, 1))) / h
    t1 = 2j * sqrt_outgoing(x) * dx
    t2 = 2.0 * p.k * dy
    t3 = _u_scaled(x, y, p, p.enhancement_exponent, True)
    scale = abs(t1) + abs(t2) + abs(t3)
    if scale == 0.0:
        return 0.0
    return abs(t1 + t2 + t3) / scale


def boundary_slope(y: float, p: ImpurityParams, h: float | None = None) -> float:
    """|d sigma1/dx| at x = 0 relative to |d sigma1/dy|, by one-sided differences."""
    h = h or _h_default(p)
    f = lambda xx, yy: sigma1_parts(xx, yy, p, gauge=y < 0).total
    dx = (-25 * f(0, y) + 48 * f(h, y) - 36 * f(2 * h, y) + 16 * f(3 * h, y) - 3 * f(4 * h, y)) / (12 * h)
    dy = (f(0, y - 2 * h) - 8 * f(0, y - h) + 8 * f(0, y + h) - f(0, y + 2 * h)) / (12 * h)
    return abs(dx) / abs(dy) if dy != 0 else abs(dx)


# --------------------------------------------------------------------------
# outside the barrier


def enhancement_coefficient(p: ImpurityParams) -> float:
    """a^2 l / (8 k^2 (2k^2 - l)): on-trajectory B^-1 u^-1 exp(-E) log-enhancement, single-centre form."""
    k2 = p.k**2
    return p.a_imp**2 * p.l / (8.0 * k2 * (2.0 * k2 - p.l))


def enhancement_coefficient_pair(p: ImpurityParams) -> float:
    """Small-a limit of the same quantity for the symmetric Gaussian pair."""
    k2 = p.k**2
    return p.a_imp**2 * p.l**2 / (4.0 * k2 * (4.0 * k2 * k2 - p.l**2))


def check_regime(p: ImpurityParams, B: float, threshold: float = MUCH_LESS):
    """Raise RegimeViolation naming the first failed applicability condition."""
    if not 2.0 * p.k**2 > p.l:
        raise RegimeViolation(f"window l < 2k^2 violated: margin {2 * p.k**2 - p.l:.4g}", margin=2 * p.k**2 - p.l)
    if not 2.0 * p.k**2 < 2.0:
        raise RegimeViolation("window 2k^2 < 2 violated", margin=2.0 - 2.0 * p.k**2)
    if not p.perturbative(threshold):
        raise RegimeViolation("perturbative condition u exp(E) << 1 violated", margin=None)
    if not p.semiclassical(B, threshold):
        raise RegimeViolation("semiclassical condition exp(E) << B violated", margin=None)


@dataclass
class OutsideProfile:
    x: float
    y: float
    log_psi_quad: float
    log_psi_closed: float
    enhancement_quad: float
    enhancement_closed: float
    prefactor_log: float


def log_psi_closed(x: float, y: float, p: ImpurityParams, B: float) -> float:
    """Exponent of the asymptotic |psi| near the trajectory, without the (x-1)^(-1/4) prefactor."""
    d = y - 2.0 * p.k * math.sqrt(x - 1.0)
    a2 = p.a_imp**2
    amp = B * p.u * enhancement_coefficient(p) * math.exp(p.enhancement_exponent)
    return -2.0 * B / 3.0 + amp * math.exp(-d * d / a2) * math.cos(4.0 * p.k * d / a2)


def psi_profile_outside(x: float, y: float, p: ImpurityParams, B: float, check: bool = True) -> OutsideProfile:
    """log|psi| beyond the exit point from quadrature and from the asymptotic formula."""
    if x <= 1.0:
        raise DomainError(f"profile outside the barrier needs x > 1, got {x}")
    if check:
        check_regime(p, B)
    E = p.enhancement_exponent
    s1 = sigma1_scaled(x, y, p)
    enh_quad = -B * p.u * math.exp(E) * s1.imag
    closed = log_psi_closed(x, y, p, B)
    return OutsideProfile(
        x=x,
        y=y,
        log_psi_quad=-B * sigma0(x, y, p.k).imag + enh_quad,
        log_psi_closed=closed,
        enhancement_quad=enh_quad,
        enhancement_closed=closed + 2.0 * B / 3.0,
        prefactor_log=-0.25 * math.log(x - 1.0),
    )


def cosine_zeros(p: ImpurityParams, n_max: int = 3) -> np.ndarray:
    """Transverse offsets y - 2k sqrt(x-1) where the modulation changes sign."""
    n = np.arange(-n_max - 1, n_max + 1)
    return math.pi * p.a_imp**2 * (2 * n + 1) / (8.0 * p.k)


def enhancement_report(p: ImpurityParams, B: float, threshold: float = MUCH_LESS) -> dict:
    E = p.enhancement_exponent
    rep = {
        "u": p.u,
        "k": p.k,
        "l": p.l,
        "a": p.a_imp,
        "B": B,
        "enhancement_exponent": E,
        "u_eff_over_u": math.exp(E) if E < EXPONENT_CAP else math.inf,
        "window_margin_low": 2.0 * p.k**2 - p.l,
        "window_margin_high": 2.0 - 2.0 * p.k**2,
        "window_ok": p.in_window,
        "perturbative_log_margin": math.log(threshold) - (math.log(p.u) + E) if p.u > 0 else math.inf,
        "semiclassical_log_margin": math.log(threshold * B) - E,
        "impurity_position": "before exit point" if p.l < 1.0 else "after exit point",
        "notes": [
            "real eigenvalue shift omitted (does not change |psi|)",
            "imaginary energy correction omitted",
            "prefactor (x-1)^(-1/4) carried symbolically",
        ],
    }
    rep["u_eff"] = p.u * rep["u_eff_over_u"]
    rep["perturbative_ok"] = rep["perturbative_log_margin"] > 0
    rep["semiclassical_ok"] = rep["semiclassical_log_margin"] > 0
    rep["wkb_only"] = p.k == 0
    if p.k == 0:
        rep["notes"].append("no tangent momentum: no enhancement channel, homogeneous WKB only")
    return rep
