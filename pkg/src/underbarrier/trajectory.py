"""Penetration exponent from the imaginary-time classical trajectory.

The trajectory leaves the exit point (x_b, 0) with zero x-velocity and
reaches the wire x = 0 at eta = v_b.  The penetration parameter is
w ~ exp(-A0 - A1) with A0 the Lagrangian integral along the path and A1 the
boundary integral along the wire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .critical import find_critical_width, find_extrema
from .errors import IntegratorTolerance, NoRealRoot, NoRoot, QuadratureFailure
from .hj_solver import SaddleMap, TraceConfig, action, seed_at_origin, trace_curve
from .potential import BarrierParams

RTOL = 1e-12


@dataclass
class ImaginaryTimeTrajectory:
    tau_grid: np.ndarray
    x_of_tau: np.ndarray
    eta_of_tau: np.ndarray
    xdot: np.ndarray
    etadot: np.ndarray
    tau0: float
    x_b: float
    v_b: float
    dense: object = None

    def energy_residual(self, gamma: float) -> np.ndarray:
        """Deviation of the conserved energy from gamma - 1 along the grid."""
        e = -0.25 * self.xdot**2 + 0.25 * self.etadot**2 - self.x_of_tau
        return e - (gamma - 1.0)


@dataclass
class PenetrationResult:
    A0: float
    A1: float
    w_log: float
    wkb_log: float
    x_b: float
    v_b: float
    B: float
    note: str = ""

    @property
    def A0_over_B(self) -> float:
        return self.A0 / self.B

    @property
    def A1_over_B(self) -> float:
        return self.A1 / self.B


def _rhs(_t, s):
    # (x, eta, x', eta');  x'' = -2, eta'' = 0
    return [s[2], s[3], -2.0, 0.0]


def integrate_trajectory(p: BarrierParams, n: int = 201, check: float = 1e-10) -> ImaginaryTimeTrajectory:
    """Integrate the equations of motion from the exit point to the wire."""
    _, _, v_b, x_b = find_extrema(p)
    tau0 = math.sqrt(x_b)
    s0 = [x_b, 0.0, 0.0, 2.0 * math.sqrt(x_b - 1.0 + p.gamma)]
    tau = np.linspace(0.0, tau0, n)
    sol = integrate.solve_ivp(_rhs, (0.0, tau0), s0, method="DOP853", t_eval=tau, rtol=RTOL, atol=1e-14,
                              dense_output=True)
    if not sol.success:
        raise IntegratorTolerance(f"trajectory integration failed: {sol.message}")
    x, eta, xd, ed = sol.y
    dev = float(np.max(np.abs(x - (x_b - tau**2))))
    if dev > check:
        raise IntegratorTolerance(f"trajectory deviates from x_b - tau^2 by {dev:.3g}", deviation=dev)
    return ImaginaryTimeTrajectory(
        tau_grid=tau, x_of_tau=x, eta_of_tau=eta, xdot=xd, etadot=ed,
        tau0=tau0, x_b=x_b, v_b=v_b, dense=sol.sol,
    )


def A0_closed(p: BarrierParams, v_b: float | None = None) -> float:
    if v_b is None:
        v_b = find_extrema(p)[2]
    q = p.profile.alpha_sq_imag(v_b).real
    return 4.0 * p.B / 3.0 * math.sqrt(1.0 + q) * (1.0 - 3.0 * p.gamma - 2.0 * q)


def action_A0(p: BarrierParams, traj: ImaginaryTimeTrajectory | None = None) -> float:
    """2B times the time integral of the Lagrangian along the trajectory."""
    traj = traj or integrate_trajectory(p)

    def lag(t):
        x, _, xd, ed = traj.dense(t)
        return 0.25 * xd**2 - 0.25 * ed**2 - x + 1.0 - p.gamma

    val, err = integrate.quad(lag, 0.0, traj.tau0, epsabs=1e-15, epsrel=1e-13, limit=200)
    if err > 1e-10 * max(1.0, abs(val)):
        raise QuadratureFailure(f"Lagrangian quadrature error {err:.3g}", error=err)
    return 2.0 * p.B * val


def _a1_integrand(eta, p):
    return math.sqrt(p.gamma + p.profile.alpha_sq_imag(eta).real)


def action_A1(p: BarrierParams, v_b: float | None = None) -> float:
    """2B times the integral of sqrt(gamma + alpha^2(i eta)) from 0 to v_b."""
    if v_b is None:
        v_b = find_extrema(p)[2]
    a = p.a
    span = 2.0 * v_b**2 / a**2
    if span < math.log(1e6) or p.alpha0 == 0:
        val, err = integrate.quad(_a1_integrand, 0.0, v_b, args=(p,), epsabs=0.0, epsrel=1e-13, limit=200)
    else:
        # eta = a sqrt(log t) beyond eta = a: the integrand becomes slowly varying in t
        v1, e1 = integrate.quad(_a1_integrand, 0.0, a, args=(p,), epsabs=0.0, epsrel=1e-13, limit=200)

        def g(t):
            lt = math.log(t)
            return math.sqrt(p.gamma + p.alpha0_sq * t * t) * a / (2.0 * t * math.sqrt(lt))

        v2, e2 = integrate.quad(g, math.e, math.exp(v_b**2 / a**2), epsabs=0.0, epsrel=1e-13, limit=400)
        val, err = v1 + v2, e1 + e2
    if err > 1e-10 * abs(val):
        raise QuadratureFailure(f"boundary quadrature error {err:.3g}", error=err)
    return 2.0 * p.B * val


def penetration(p: BarrierParams) -> PenetrationResult:
    traj = integrate_trajectory(p)
    A0 = action_A0(p, traj)
    A1 = action_A1(p, traj.v_b)
    w_log = -(A0 + A1)
    wkb = -4.0 * p.B / 3.0
    note = ""
    if w_log < wkb - 1e-9 * abs(wkb):
        note = "w below the homogeneous-wire value"
    if A0 < 0:
        note = (note + "; " if note else "") + "A0 negative"
    return PenetrationResult(A0=A0, A1=A1, w_log=w_log, wkb_log=wkb, x_b=traj.x_b, v_b=traj.v_b, B=p.B, note=note)


def exponent_over_B(p: BarrierParams) -> float:
    """(A0 + A1) / B from the closed form of A0 and the boundary quadrature."""
    _, _, v_b, _ = find_extrema(p)
    return (A0_closed(p, v_b) + action_A1(p, v_b)) / p.B


@dataclass
class Threshold:
    a_R: float
    slope: float
    x_b: float
    a0: float


def find_threshold(p_without_a: BarrierParams, n_scan: int = 64, h: float = 1e-5) -> Threshold:
    """Width a_R where A0 + A1 vanishes, and slope s in w ~ exp[-s B (a_R - a)]."""
    base = p_without_a
    if base.alpha0 == 0:
        raise NoRoot("homogeneous wire: A0 + A1 = 4B/3 never vanishes", bracket=None)
    a0, _, _ = find_critical_width(base)
    grid = np.linspace(a0, 4.0 * a0, n_scan)
    vals = []
    for a in grid:
        try:
            vals.append(exponent_over_B(base.replace(a=float(a))))
        except NoRealRoot:
            vals.append(np.nan)
    vals = np.array(vals)
    idx = [i for i in range(n_scan - 1) if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0]
    if not idx:
        raise NoRoot(f"A0 + A1 keeps its sign for a in [{a0:.4g}, {4 * a0:.4g}]", bracket=(a0, 4 * a0))
    i = idx[0]
    f = lambda a: exponent_over_B(base.replace(a=a))
    a_R = optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-14)
    slope = -(f(a_R + h) - f(a_R - h)) / (2.0 * h)
    x_b = find_extrema(base.replace(a=a_R))[3]
    return Threshold(a_R=a_R, slope=slope, x_b=x_b, a0=a0)


# --------------------------------------------------------------------------
# cross-check through the direct solution


def hj_exponent(p: BarrierParams, cfg: TraceConfig | None = None) -> tuple[float, float, float]:
    """2B Im[sigma(x_b, 0) - sigma(0, 0)] from the saddle-point solution.

    Point b is located independently of the fixed-point equation, as the zero
    of d sigma/dx on the traced real-v curve.  Returns (exponent, v_b, x_b).
    """
    m = SaddleMap(p)
    cfg = cfg or TraceConfig(extensions=False)
    x_hi = 1.0 + p.profile.alpha_sq_imag(0.0).real
    # the real curve is traced until r changes sign; its lower fold can dip below x = 0
    hi = 4.0 * x_hi + 4.0
    segs = trace_curve(0.0, (-hi, hi), p, seed_at_origin(0.0, p), cfg, m)
    cand = []
    for seg in segs:
        r = np.array([m.r(q.v, 0.0, q.sheet).real for q in seg])
        for i in np.nonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)[0]:
            cand.append((seg[i].v.real, seg[i + 1].v.real))
    if not cand:
        raise NoRoot("d sigma/dx does not vanish on the traced real curve")
    lo, hi = max(cand)
    v_b = optimize.brentq(lambda v: m.r(v).real, min(lo, hi), max(lo, hi), xtol=1e-15, rtol=1e-15)
    x_b = m("F", v_b).real
    s = action(x_b, 0.0, p, v_b, saddle_map=m).sigma
    return 2.0 * p.B * s.imag, v_b, x_b


def two_route(p: BarrierParams) -> dict:
    res = penetration(p)
    hj, v_b, x_b = hj_exponent(p)
    total = res.A0 + res.A1
    return {
        "A0_plus_A1": total,
        "hj_exponent": hj,
        "rel_diff": abs(total - hj) / abs(total),
        "v_b_traj": res.v_b,
        "v_b_hj": v_b,
        "x_b": x_b,
    }
