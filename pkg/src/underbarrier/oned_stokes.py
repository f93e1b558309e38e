"""One-dimensional oracles for the semiclassical machinery.

Overbarrier reflection from V / cosh^2(x/a), solved numerically and compared
with the Stokes-jump estimate |R| = exp[-pi k a (1 - sqrt(V/E))]; the Stokes
lines of the WKB phase around the complex turning point; and the zero-field
limit of the wire, where the boundary wave obeys a 1D Schroedinger equation
with the attractive potential -u0 beta^2(y).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, SolverFailure
from .potential import PhysicalParams
from .stokes import StokesLineSet, trace_level_curve, unit

#: Potential tail, relative to its peak, neglected at the ends of the domain.
TAIL = 1e-12
#: Integration steps per shortest local wavelength.
STEPS_PER_WAVELENGTH = 40
FLUX_TOL = 1e-8
REFINE_TOL = 1e-6

# ka and E/V above which the semiclassical reflection estimate is trusted
KA_MIN = 10.0
EV_MIN = 1.2


def _units(units: PhysicalParams | None) -> tuple[float, float]:
    return (1.0, 1.0) if units is None else (units.m, units.hbar)


@dataclass
class ScatteringSolution:
    """Plane-wave amplitudes of a solution with a pure transmitted wave on the right."""

    R_mag: float
    T_mag: float
    flux_residual: float
    k_left: float
    k_right: float
    dense: Callable = field(repr=False, default=None)


def _scatter(q2: Callable[[float], float], k: float, L: float, max_step: float) -> ScatteringSolution:
    """Integrate psi'' = -q2(x) psi from +L to -L starting from exp(ikx).

    The incoming and reflected amplitudes are projected out from the values at
    two points a quarter wavelength apart.
    """

    def rhs(x, s):
        return [s[1], -q2(x) * s[0]]

    s0 = [cmath.exp(1j * k * L), 1j * k * cmath.exp(1j * k * L)]
    sol = integrate.solve_ivp(rhs, (L, -L), s0, method="DOP853", rtol=1e-12, atol=1e-14,
                              max_step=max_step, dense_output=True)
    if not sol.success:
        raise SolverFailure(f"1D scattering integration failed: {sol.message}")
    x1 = -L
    x2 = -L + 0.5 * math.pi / k
    m = np.array([[cmath.exp(1j * k * x1), cmath.exp(-1j * k * x1)],
                  [cmath.exp(1j * k * x2), cmath.exp(-1j * k * x2)]])
    A, Bm = np.linalg.solve(m, np.array([sol.sol(x1)[0], sol.sol(x2)[0]]))
    R = abs(Bm / A)
    T = 1.0 / abs(A)
    return ScatteringSolution(R_mag=R, T_mag=T, flux_residual=abs(R * R + T * T - 1.0), k_left=k, k_right=k,
                              dense=sol.sol)


# --------------------------------------------------------------------------
# cosh^-2 barrier


@dataclass
class Reflection1DResult:
    R_exact_mag: float
    R_wkb_mag: float
    ka: float
    regime_ok: bool
    flux_residual: float
    refinement_change: float

    @property
    def exponent_error(self) -> float:
        """|log R_exact - log R_wkb| / |log R_wkb|."""
        lw = math.log(self.R_wkb_mag)
        return abs(math.log(self.R_exact_mag) - lw) / abs(lw)


def reflection_wkb(E: float, V: float, a: float, units: PhysicalParams | None = None) -> float:
    m, hbar = _units(units)
    k = math.sqrt(2.0 * m * E) / hbar
    return math.exp(-math.pi * a * k * (1.0 - math.sqrt(V / E)))


def reflect_cosh_barrier(
    E: float, V: float, a: float, units: PhysicalParams | None = None, *, refine: bool = True
) -> Reflection1DResult:
    """Reflection amplitude from V / cosh^2(x/a) at energy E > V, by direct integration.

    ``units`` supplies m and hbar (both 1 by default).
    """
    if not (V > 0 and E > V):
        raise DomainError(f"overbarrier reflection needs E > V > 0, got E={E:g}, V={V:g}")
    m, hbar = _units(units)
    c = 2.0 * m / hbar**2
    k = math.sqrt(c * E)
    L = max(a * math.acosh(TAIL**-0.5), 2.0 * math.pi / k)

    def q2(x):
        return c * (E - V / math.cosh(x / a) ** 2)

    step = 2.0 * math.pi / k / STEPS_PER_WAVELENGTH
    sol = _scatter(q2, k, L, step)
    change = abs(_scatter(q2, k, L, 0.5 * step).R_mag - sol.R_mag) if refine else 0.0
    if sol.flux_residual > FLUX_TOL:
        raise SolverFailure(f"flux not conserved: residual {sol.flux_residual:.3g}", residual=sol.flux_residual)
    if change > REFINE_TOL:
        raise SolverFailure(f"|R| changes by {change:.3g} under step halving", change=change)
    return Reflection1DResult(
        R_exact_mag=sol.R_mag,
        R_wkb_mag=reflection_wkb(E, V, a, units),
        ka=k * a,
        regime_ok=k * a >= KA_MIN and E / V >= EV_MIN,
        flux_residual=sol.flux_residual,
        refinement_change=change,
    )


# --------------------------------------------------------------------------
# Stokes lines of the WKB phase


class _ContinuedPhase:
    """phi(z) - phi(x_c) for phi' = i k sqrt(1 - (V/E) sech^2(z/a)), continued along a path.

    The square root is followed by continuity from a reference point that the
    tracer moves along the curve, so no branch cut is ever crossed.
    """

    N_GL = 20

    def __init__(self, k: float, a: float, ratio: float, x_c: complex, direction: complex, eps: float):
        self.k, self.a, self.ratio, self.x_c = k, a, ratio, x_c
        self.nodes, self.weights = np.polynomial.legendre.leggauss(self.N_GL)
        # local behaviour q(z) ~ D (z - x_c) near the turning point
        D = 2.0 * ratio * cmath.tanh(x_c / a) / (a * cmath.cosh(x_c / a) ** 2)
        z0 = x_c + eps * direction
        dz = z0 - x_c
        guide = cmath.sqrt(D) * cmath.sqrt(dz)
        # z = x_c + tau^2 dz removes the square-root endpoint singularity
        tau = 0.5 * (self.nodes + 1.0)
        vals = []
        for t in tau:
            s = cmath.sqrt(self._q(x_c + t * t * dz))
            if abs(s - guide * t) > abs(s + guide * t):
                s = -s
            vals.append(s * 2.0 * t)
        h0 = 1j * k * dz * 0.5 * np.dot(self.weights, vals)
        s0 = cmath.sqrt(self._q(z0))
        if abs(s0 - guide) > abs(s0 + guide):
            s0 = -s0
        self.anchor = (z0, complex(h0), s0)

    def _q(self, z: complex) -> complex:
        return 1.0 - self.ratio / cmath.cosh(z / self.a) ** 2

    def _walk(self, z: complex) -> tuple[complex, complex]:
        z0, h0, s_prev = self.anchor
        acc = 0j
        for t, w in zip(self.nodes, self.weights):
            s = cmath.sqrt(self._q(z0 + 0.5 * (t + 1.0) * (z - z0)))
            if abs(s - s_prev) > abs(s + s_prev):
                s = -s
            acc += w * s
            s_prev = s
        s_end = cmath.sqrt(self._q(z))
        if abs(s_end - s_prev) > abs(s_end + s_prev):
            s_end = -s_end
        return h0 + 1j * self.k * 0.5 * (z - z0) * acc, s_end

    def h(self, z: complex) -> complex:
        return self._walk(z)[0]

    def dh(self, z: complex) -> complex:
        return 1j * self.k * self._walk(z)[1]

    def accept(self, z: complex):
        h, s = self._walk(z)
        self.anchor = (z, h, s)


def turning_point(E: float, V: float, a: float) -> complex:
    """The turning point x_c = i a arctan sqrt(E/V - 1) nearest the real axis."""
    if not (V > 0 and E > V):
        raise DomainError(f"Stokes lines are drawn for E > V > 0, got E={E:g}, V={V:g}")
    return 1j * a * math.atan(math.sqrt(E / V - 1.0))


def stokes_lines_1d(
    E: float,
    V: float,
    a: float,
    units: PhysicalParams | None = None,
    *,
    extent: float | None = None,
    step: float | None = None,
) -> StokesLineSet:
    """The three lines Im[phi(x) - phi(x_c)] = 0 leaving the turning point.

    Each line starts on the local 3/2-power ray and is continued with the full
    WKB phase until it is ``extent`` away from x_c (1.5 |x_c| by default, so
    the vertical line crosses the real axis but stops short of the conjugate
    turning point).
    """
    m, hbar = _units(units)
    k = math.sqrt(2.0 * m * E) / hbar
    x_c = turning_point(E, V, a)
    extent = extent or 1.5 * abs(x_c)
    step = step or 0.01 * a
    eps = 0.01 * step
    angles = [-math.pi / 2.0, math.pi / 6.0, 5.0 * math.pi / 6.0]
    lines = []
    violation = 0.0
    for ang in angles:
        ph = _ContinuedPhase(k, a, V / E, x_c, unit(ang), eps)
        z0 = ph.anchor[0]
        pts = trace_level_curve(
            ph.h, ph.dh, z0, unit(ang), step=step, tol=1e-13,
            stop=lambda z: abs(z - x_c) > extent, on_accept=ph.accept,
        )
        line = np.concatenate([[x_c], pts])
        lines.append(line)
        # the phase is path dependent, so the check walks the line again
        chk = _ContinuedPhase(k, a, V / E, x_c, unit(ang), eps)
        for z in pts[1:]:
            chk.accept(z)
            hz = chk.anchor[1]
            violation = max(violation, abs(hz.imag) / max(1.0, abs(hz.real)))
    phase_c = -k * integrate.quad(lambda t: math.sqrt(max(0.0, 1.0 - (V / E) / math.cos(t / a) ** 2)), 0.0,
                                  abs(x_c), epsabs=0.0, epsrel=1e-13)[0]
    crossing = [bool(np.any(ln.imag < 0)) for ln in lines]
    return StokesLineSet(
        origin=x_c,
        lines=lines,
        meta={
            "turning_point": x_c,
            "ray_angles": angles,
            "crosses_real_axis": crossing,
            "max_violation": violation,
            "phase_at_turning_point": phase_c,
            "reflection_from_phase": math.exp(2.0 * phase_c),
        },
    )


# --------------------------------------------------------------------------
# zero-field wire


@dataclass
class WireZeroFieldResult:
    widths: np.ndarray
    R_mag: np.ndarray
    k: float
    exponent_fit: float | None
    fit_intercept: float | None
    fit_residual: float | None
    flux_residual: float


def _wire_q2(y: float, beta0: float, width: float, E: float, u0: float, c: float) -> float:
    return c * (E + u0 + u0 * beta0**2 * math.exp(-2.0 * y * y / width**2))


def _wire_solution(beta0: float, width: float, E: float, u0: float, units: PhysicalParams | None):
    m, hbar = _units(units)
    c = 2.0 * m / hbar**2
    k = math.sqrt(c * (E + u0))
    well = u0 * beta0**2
    L = max(width * math.sqrt(0.5 * math.log(max(well / (TAIL * (E + u0)), math.e))), 2.0 * math.pi / k)
    kmax = math.sqrt(c * (E + u0 + well))
    step = 2.0 * math.pi / kmax / STEPS_PER_WAVELENGTH
    sol = _scatter(lambda y: _wire_q2(y, beta0, width, E, u0, c), k, L, step)
    return sol, k, L, c


def wire_overbarrier_reflection(
    beta0: float,
    widths,
    E: float,
    u0: float,
    units: PhysicalParams | None = None,
) -> WireZeroFieldResult:
    """|R| for the boundary wave scattered by -u0 beta^2(y), beta = beta0 exp(-y^2/width^2).

    With several widths, log|R| = -c k a + const is fitted by least squares;
    ``fit_residual`` is the relative residual norm ||log R - fit|| / ||log R||.
    """
    if E <= -u0:
        raise DomainError(f"no propagating wave along the wire for E = {E:g} <= -u0")
    widths = np.atleast_1d(np.asarray(widths, dtype=float))
    m, hbar = _units(units)
    k = math.sqrt(2.0 * m * (E + u0)) / hbar
    if beta0 == 0:
        return WireZeroFieldResult(widths, np.zeros_like(widths), k, None, None, None, 0.0)
    R, flux = [], 0.0
    for w in widths:
        sol, _, _, _ = _wire_solution(beta0, float(w), E, u0, units)
        R.append(sol.R_mag)
        flux = max(flux, sol.flux_residual)
    R = np.array(R)
    if flux > FLUX_TOL:
        raise SolverFailure(f"flux not conserved: residual {flux:.3g}", residual=flux)
    c_fit = intercept = resid = None
    if len(widths) >= 2:
        logR = np.log(R)
        slope, intercept = np.polyfit(widths, logR, 1)
        c_fit = -slope / k
        resid = float(np.linalg.norm(logR - (slope * widths + intercept)) / np.linalg.norm(logR))
    return WireZeroFieldResult(widths, R, k, c_fit, intercept, resid, flux)


def boundary_wave_check(beta0: float, width: float, E: float, u0: float, units: PhysicalParams | None = None,
                        n: int = 201) -> float:
    """Largest relative gap between the numerical phase derivative and the WKB wavenumber.

    The WKB wavenumber is sqrt(2 m u0)/hbar sqrt(1 + E/u0 + beta^2(y)).
    Sampled over |y| <= 2 width.
    """
    m, hbar = _units(units)
    sol, _, _, c = _wire_solution(beta0, width, E, u0, units)
    worst = 0.0
    for y in np.linspace(-2.0 * width, 2.0 * width, n):
        psi, dpsi = sol.dense(y)
        k_num = (dpsi / psi).imag
        k_wkb = math.sqrt(2.0 * m * u0) / hbar * math.sqrt(1.0 + E / u0 + beta0**2 * math.exp(-2.0 * y * y / width**2))
        worst = max(worst, abs(k_num - k_wkb) / k_wkb)
    return worst
