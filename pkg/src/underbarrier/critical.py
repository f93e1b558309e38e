"""Critical structure of the saddle map: extrema, folds, the cusp and its unfolding.

All derivatives of x = F(v, y; a) are exact (symbolic), see :class:`SaddleMap`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import FoldsMerged, NoConvergence, NoRealRoot, WindowViolation
from .hj_solver import PRINCIPAL, SaddleMap
from .potential import EXPONENT_CAP, BarrierParams
from .stokes import StokesLineSet, trace_level_curve, unit

#: Default half-width of the near-critical window, relative to a0.
WINDOW = 0.1

#: Folds closer than this in v are reported as merged.
MERGE_TOL = 1e-4


@dataclass(frozen=True)
class FoldPoint:
    """Zero of dx/dv at fixed y; ``x`` is complex off the real folds."""

    v: complex
    x: complex
    y: complex = 0.0


@dataclass(frozen=True)
class SingularExpansion:
    """Coefficients of x - x0 + c_lin_y i y = c_cubic (v-v0)^3 - c_lin_av (a-a0)(v-v0)."""

    a0: float
    x0: float
    v0: float
    c_lin_y: float
    c_cubic: float
    c_lin_av: float
    c_shift_a: float
    delta_coeff: float
    D_coeff: float

    @property
    def tan_theta(self) -> float:
        return self.c_lin_y

    @property
    def theta_deg(self) -> float:
        return math.degrees(math.atan(self.c_lin_y))

    def delta(self, a: float) -> float:
        """|delta| = delta_coeff sqrt|a - a0|."""
        return self.delta_coeff * math.sqrt(abs(a - self.a0))

    def Delta(self, a: float) -> float:
        """Delta = D_coeff |a0 - a|^{3/2}; defined for a < a0, reported as |Delta| above."""
        return self.D_coeff * abs(self.a0 - a) ** 1.5


@dataclass
class CriticalSet:
    v_a: float | None
    x_a: float | None
    v_b: float
    x_b: float
    v_c1: complex | None
    v_c2: complex | None
    x_c1: complex | None
    x_c2: complex | None
    a0: float
    x0: float
    v0: float
    Delta: float
    tan_theta: float
    delta_regime: str
    meta: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# extrema a and b


def _v_max(p: BarrierParams) -> float:
    if p.alpha0 == 0:
        return 8.0
    # beyond alpha^2(iv) ~ 1e4 the map is featureless
    big = math.log(max(1e4 / p.alpha0_sq, 1.0)) / 2.0
    return min(p.a * math.sqrt(big + 1.0), p.a * math.sqrt(EXPONENT_CAP / 2.0) * 0.9)


def fixed_point_residual(v: float, p: BarrierParams) -> float:
    q = p.profile.alpha_sq_imag(v).real
    return v - 2.0 * math.sqrt(1.0 + q) * math.sqrt(p.gamma + q)


def find_extrema(p: BarrierParams, n_scan: int = 4000):
    """Real roots of v = 2 sqrt(1+alpha^2(iv)) sqrt(gamma+alpha^2(iv)).

    Returns ``(v_a, x_a, v_b, x_b)``; the smaller root a is None when only
    one root exists (homogeneous wire).
    """
    vmax = _v_max(p)
    grid = np.linspace(1e-9, vmax, n_scan)
    vals = np.array([fixed_point_residual(v, p) for v in grid])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(optimize.brentq(fixed_point_residual, grid[i], grid[i + 1], args=(p,), xtol=1e-15, rtol=1e-15))
    if not roots:
        raise NoRealRoot(f"no real fixed point for v in [0, {vmax:.4g}]", bracket=(0.0, vmax))
    v_b = roots[-1]
    x_b = 1.0 + p.profile.alpha_sq_imag(v_b).real
    if len(roots) == 1:
        return None, None, v_b, x_b
    v_a = roots[0]
    return v_a, 1.0 + p.profile.alpha_sq_imag(v_a).real, v_b, x_b


# --------------------------------------------------------------------------
# folds


def _real_scan(m: SaddleMap, name: str, p: BarrierParams, n: int = 3000):
    grid = np.linspace(1e-6, _v_max(p), n)
    vals = np.array([m(name, v).real for v in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return grid, vals, idx


def _newton_fv(m: SaddleMap, v: complex, y: complex, tol=1e-14, max_iter=60) -> complex:
    for _ in range(max_iter):
        step = m("F_v", v, y) / m("F_vv", v, y)
        v -= step
        if abs(step) < tol * max(1.0, abs(v)):
            return v
    raise NoConvergence(f"fold Newton failed near v={v}", last=v, residual=abs(m("F_v", v, y)))


def _inflections(m: SaddleMap, p: BarrierParams) -> list[float]:
    grid, vals, idx = _real_scan(m, "F_vv", p)
    out = []
    for i in idx:
        out.append(optimize.brentq(lambda v: m("F_vv", v).real, grid[i], grid[i + 1], xtol=1e-15))
    return out


def find_folds(p: BarrierParams, y: float = 0.0) -> tuple[FoldPoint, FoldPoint]:
    """The fold pair (c1, c2); x_c1 > x_c2 for real folds at y = 0.

    Below the critical width the folds leave the real v axis and come back
    as a complex-conjugate pair (complex x), located by Newton from the local
    quadratic of dx/dv around the inflection point.
    """
    m = SaddleMap(p)
    if p.alpha0 == 0:
        raise NoRealRoot("homogeneous wire: dx/dv has a single zero (point b), no fold pair")
    infl = _inflections(m, p)
    if not infl:
        raise NoRealRoot("dx/dv has no inflection on the real axis; no fold pair")
    # the fold pair lives around the inflection with the smallest dx/dv
    vi = min(infl, key=lambda v: m("F_v", v).real)
    fv = m("F_v", vi).real
    c3 = m("F_vvv", vi).real
    sep = 2.0 * math.sqrt(2.0 * abs(fv) / abs(c3))
    if sep < MERGE_TOL:
        raise FoldsMerged(f"fold pair separation {sep:.3g} below {MERGE_TOL:g}", separation=sep, v=vi)
    half = 0.5 * sep
    if fv < 0:
        guesses = [vi - half, vi + half]
    else:
        guesses = [vi + 1j * half, vi - 1j * half]
    folds = []
    for g in guesses:
        if y == 0 and fv < 0:
            lo, hi = (g - half, vi) if g < vi else (vi, g + half)
            while m("F_v", lo).real * m("F_v", hi).real > 0:
                lo, hi = (lo - half, hi) if g < vi else (lo, hi + half)
            v = optimize.brentq(lambda t: m("F_v", t).real, lo, hi, xtol=1e-15)
            v = _newton_fv(m, complex(v), 0.0)
        else:
            v = _newton_fv(m, complex(g), y)
        folds.append(FoldPoint(v=v, x=m("F", v, y), y=y))
    if y == 0 and fv < 0 and folds[0].x.real < folds[1].x.real:
        folds.reverse()
    return folds[0], folds[1]


# --------------------------------------------------------------------------
# critical width


def _min_fv(m: SaddleMap, p: BarrierParams) -> tuple[float, float]:
    grid, vals, _ = _real_scan(m, "F_v", p, n=800)
    i = int(np.argmin(vals))
    return float(vals[i]), float(grid[i])


def find_critical_width(p_without_a: BarrierParams, a_scan=(0.2, 20.0), n_scan: int = 60):
    """Width a0 at which the fold pair coalesces: dx/dv = d2x/dv2 = 0 at y = 0.

    Returns ``(a0, x0, v0)``.
    """
    base = p_without_a
    if base.alpha0 == 0:
        raise NoConvergence("homogeneous wire: no fold structure, critical width diverges", last=None)
    # scan downward so that the cusp bounding the wide-profile regime is found first
    grid = np.geomspace(a_scan[1], a_scan[0], n_scan)
    prev = None
    bracket = None
    for a in grid:
        m = SaddleMap(base.replace(a=float(a)))
        val, vmin = _min_fv(m, m.p)
        if prev is not None and (prev[1] < 0) != (val < 0):
            bracket = (prev, (a, val, vmin))
            break
        prev = (a, val, vmin)
    if bracket is None:
        raise NoConvergence(
            f"dx/dv keeps its sign for a in [{a_scan[0]}, {a_scan[1]}]; no critical width",
            last=prev,
        )
    (a2, _, v2), (a1, _, v1) = bracket

    def min_fv(a):
        m = SaddleMap(base.replace(a=a))
        res = optimize.minimize_scalar(
            lambda v: m("F_v", v).real, bounds=(0.5 * v1, 1.5 * v2 + 1.0), method="bounded",
            options={"xatol": 1e-10},
        )
        return res.fun

    a_g = optimize.brentq(min_fv, a1, a2, xtol=1e-6)
    m = SaddleMap(base.replace(a=a_g))
    v_g = optimize.minimize_scalar(
        lambda v: m("F_v", v).real, bounds=(0.5 * v1, 1.5 * v2 + 1.0), method="bounded", options={"xatol": 1e-10}
    ).x
    # joint Newton on (F_v, F_vv) in (v, a)
    v, a = float(v_g), float(a_g)
    for _ in range(MAX_ITER_CRIT):
        m = SaddleMap(base.replace(a=a))
        g = np.array([m("F_v", v).real, m("F_vv", v).real])
        J = np.array([[m("F_vv", v).real, m("F_va", v).real], [m("F_vvv", v).real, m("F_vva", v).real]])
        d = np.linalg.solve(J, -g)
        v, a = v + d[0], a + d[1]
        if np.max(np.abs(d)) < 1e-14:
            break
    else:
        raise NoConvergence("critical-width Newton failed", last=(v, a), residual=float(np.max(np.abs(g))))
    m = SaddleMap(base.replace(a=a))
    return a, m("F", v).real, v


MAX_ITER_CRIT = 50


# --------------------------------------------------------------------------
# unfolding near the cusp


def _check_window(p: BarrierParams, a0: float, window: float):
    if abs(p.a - a0) > window * a0:
        raise WindowViolation(
            f"|a - a0| = {abs(p.a - a0):.4g} exceeds the near-critical window {window * a0:.4g}",
            a=p.a,
            a0=a0,
        )


def unfold_cubic(p: BarrierParams, window: float = WINDOW) -> SingularExpansion:
    """Exact coefficients of the cubic unfolding at the cusp."""
    a0, x0, v0 = find_critical_width(p)
    _check_window(p, a0, window)
    return _unfolding_at(p, a0, x0, v0)


def _unfolding_at(p: BarrierParams, a0: float, x0: float, v0: float) -> SingularExpansion:
    m = SaddleMap(p.replace(a=a0))
    C = m("F_vvv", v0).real / 6.0
    L = -m("F_va", v0).real
    cy = -m("F_y", v0).imag
    Fa = m("F_a", v0).real
    return SingularExpansion(
        a0=a0,
        x0=x0,
        v0=v0,
        c_lin_y=cy,
        c_cubic=C,
        c_lin_av=L,
        c_shift_a=Fa,
        delta_coeff=math.sqrt(L / (3.0 * C)),
        D_coeff=(2.0 / 3.0) * L**1.5 / (math.sqrt(3.0 * C) * cy),
    )


def action_expansion_coeffs(p: BarrierParams, window: float = WINDOW):
    """(A, B, quartic) of d(i sigma)/dx = A + B (v - v0 - delta) near the cusp.

    A = -r(v0) and B = d(-r)/dv at the critical point; integrating against
    dx/dv = 3 C [(v-v0-delta)^2 + 2 delta (v-v0-delta)] gives the quartic
    coefficient 3 C B / 4.
    """
    ex = unfold_cubic(p, window)
    m = SaddleMap(p.replace(a=ex.a0))
    v0 = ex.v0
    S1, f = m.roots(v0)
    q = m.q(v0)
    dq = 4.0 * v0 / ex.a0**2 * q
    dS1 = dq / (2.0 * S1)
    df = dq / (2.0 * f)
    r = S1 - v0 / (2.0 * f)
    dr = dS1 - 1.0 / (2.0 * f) + v0 * df / (2.0 * f**2)
    A = -r.real
    B = -dr.real
    return A, B, 3.0 * ex.c_cubic * B / 4.0


def singular_expansion_residual(p: BarrierParams, v: complex, ex: SingularExpansion) -> complex:
    """x(v) - cubic model at y = 0, for checking the unfolding."""
    m = SaddleMap(p)
    z = v - ex.v0
    model = ex.x0 + ex.c_shift_a * (p.a - ex.a0) + ex.c_cubic * z**3 - ex.c_lin_av * (p.a - ex.a0) * z
    return m("F", v) - model


# --------------------------------------------------------------------------
# singularity positions


def fold_piercings(p: BarrierParams):
    """Points (x, y) with real x and real y where the fold pair crosses the physical plane.

    For a > a0 these are the two real folds at y = 0.  For a < a0 they are
    found by solving dx/dv = 0 together with Im x = 0 for (v, y).
    """
    ex = unfold_cubic(p, window=np.inf)
    if p.a > ex.a0:
        c1, c2 = find_folds(p, 0.0)
        return [(c1.x.real, 0.0, c1.v), (c2.x.real, 0.0, c2.v)]
    m = SaddleMap(p)
    d = ex.delta_coeff * math.sqrt(ex.a0 - p.a)
    Dl = ex.Delta(p.a)
    out = []
    for s in (+1, -1):
        z = np.array([ex.v0, s * d, s * Dl])

        def eqs(z):
            v = complex(z[0], z[1])
            g = m("F_v", v, z[2])
            return [g.real, g.imag, m("F", v, z[2]).imag]

        sol = optimize.fsolve(eqs, z, xtol=1e-14, full_output=True)
        zz = sol[0]
        if sol[2] != 1 and np.max(np.abs(eqs(zz))) > 1e-10:
            raise NoConvergence("fold piercing not found", last=zz, residual=float(np.max(np.abs(eqs(zz)))))
        v = complex(zz[0], zz[1])
        out.append((m("F", v, zz[2]).real, float(zz[2]), v))
    return out


def singularity_positions(p: BarrierParams) -> dict:
    """Literal listing, unfolding prediction and fold-tracked positions of the singular points."""
    ex = unfold_cubic(p, window=np.inf)
    Dl = ex.Delta(p.a)
    shift = ex.c_shift_a * (p.a - ex.a0)
    if p.a > ex.a0:
        literal = [(ex.x0 + ex.c_lin_y * Dl, 0.0), (ex.x0 - ex.c_lin_y * Dl, 0.0)]
        predicted = [(ex.x0 + shift + ex.c_lin_y * Dl, 0.0), (ex.x0 + shift - ex.c_lin_y * Dl, 0.0)]
    else:
        literal = [(ex.x0, ex.c_lin_y * Dl), (ex.x0, -ex.c_lin_y * Dl)]
        predicted = [(ex.x0 + shift, Dl), (ex.x0 + shift, -Dl)]
    tracked = [(x, y) for x, y, _ in fold_piercings(p)]
    return {
        "regime": "a>a0" if p.a > ex.a0 else "a<a0",
        "Delta": Dl,
        "literal": literal,
        "unfolding": predicted,
        "tracked": tracked,
    }


# --------------------------------------------------------------------------
# aggregate


def critical_set(p: BarrierParams) -> CriticalSet:
    v_a, x_a, v_b, x_b = find_extrema(p)
    ex = _unfolding_at(p, *find_critical_width(p))
    try:
        c1, c2 = find_folds(p, 0.0)
        folds = (c1.v, c2.v, c1.x, c2.x)
    except (FoldsMerged, NoRealRoot):
        folds = (None, None, None, None)
    return CriticalSet(
        v_a=v_a,
        x_a=x_a,
        v_b=v_b,
        x_b=x_b,
        v_c1=folds[0],
        v_c2=folds[1],
        x_c1=folds[2],
        x_c2=folds[3],
        a0=ex.a0,
        x0=ex.x0,
        v0=ex.v0,
        Delta=ex.Delta(p.a),
        tan_theta=ex.tan_theta,
        delta_regime="a<a0" if p.a < ex.a0 else "a>a0 (|Delta| reported)",
    )


# --------------------------------------------------------------------------
# Stokes lines of the local quartic action


def quartic_action(z: complex, d: float) -> complex:
    """z^4 + (8i/3) d z^3 with z = v - v0 - i d."""
    return z**4 + (8j / 3.0) * d * z**3


def _quartic_deriv(z: complex, d: float) -> complex:
    return 4.0 * z**3 + 8j * d * z**2


def stokes_lines_quartic(v0: float, d: float, extent: float, step: float | None = None) -> StokesLineSet:
    """Im[z^4 + (8i/3) d z^3] = 0 in the v plane, z = v - v0 - i d.

    Six lines leave the branching point z = 0; the saddle at z = -2 i d
    contributes two horizontal lines (its vertical pair lies on the
    imaginary axis, already covered).  For d = 0 eight rays leave z = 0.
    """
    d = abs(d)
    origin = v0 + 1j * d
    h = lambda z: quartic_action(z, d)
    dh = lambda z: _quartic_deriv(z, d)
    step = step or extent / 400.0
    far = lambda z: abs(z) > extent
    lines = []
    if d == 0:
        starts = [(0.0, unit(k * math.pi / 4)) for k in range(8)]
    else:
        starts = [(0.0, unit(-math.pi / 6 + k * math.pi / 3)) for k in range(6)]
    saddle = -2j * d
    for z0, t in starts:
        eps = min(step, extent * 1e-3)
        first = eps * t
        pts = trace_level_curve(h, dh, first, t, step=step, stop=far)
        lines.append(np.concatenate([[z0], pts]))
    if d > 0:
        for t in (1.0 + 0j, -1.0 + 0j):
            eps = min(step, extent * 1e-3)
            pts = trace_level_curve(h, dh, saddle + eps * t, t, step=step, stop=far)
            lines.append(np.concatenate([[saddle], pts]))
    return StokesLineSet(
        origin=origin,
        lines=[origin + ln for ln in lines],
        meta={"d": d, "v0": v0, "saddle": v0 + 1j * d + saddle, "extent": extent},
    )


def trace_stokes_lines_2d(p: BarrierParams, extent: float | None = None) -> StokesLineSet:
    """Stokes lines of the singular part of sigma(x, 0) in the complex v plane (a < a0)."""
    ex = unfold_cubic(p, window=np.inf)
    if p.a >= ex.a0:
        raise WindowViolation(f"Stokes-line picture requires a < a0 = {ex.a0:.6g}", a=p.a, a0=ex.a0)
    _check_window(p, ex.a0, WINDOW)
    d = ex.delta(p.a)
    s = stokes_lines_quartic(ex.v0, d, extent or 8.0 * d)
    s.meta.update({"a0": ex.a0, "delta_coeff": ex.delta_coeff})
    return s


def stokes_violation(s: StokesLineSet) -> float:
    d, v0 = s.meta["d"], s.meta["v0"]
    return s.max_violation(lambda v: quartic_action(v - v0 - 1j * d, d))


# --------------------------------------------------------------------------
# caustics


@dataclass
class CausticTrajectory:
    b: float
    eta: np.ndarray
    x: np.ndarray
    eta_t: float
    x_t: float


def caustic_x(eta, b: float, x0: float, gamma: float, T: float):
    """Trajectory family reflected from the caustic x - x0 = eta tan(theta)."""
    K = x0 - 1.0 + gamma + b * T
    peak = (x0 + (1.0 - gamma) * T**2 + b * T) / (1.0 + T**2)
    return peak - (1.0 + T**2) * (np.asarray(eta) - b) ** 2 / (4.0 * K)


def caustic_tangency(b: float, x0: float, gamma: float, T: float) -> tuple[float, float]:
    """Point where dx/deta = tan(theta) on the trajectory with parameter b."""
    K = x0 - 1.0 + gamma + b * T
    eta_t = b - 2.0 * T * K / (1.0 + T**2)
    return eta_t, float(caustic_x(eta_t, b, x0, gamma, T))


def caustic_energy(b: float, x0: float, gamma: float, T: float, tau) -> np.ndarray:
    """Energy of the family member b in imaginary time, eta = c tau + b."""
    peak = (x0 + (1.0 - gamma) * T**2 + b * T) / (1.0 + T**2)
    c = 2.0 * math.sqrt(peak - 1.0 + gamma)
    tau = np.asarray(tau, dtype=float)
    x = caustic_x(c * tau + b, b, x0, gamma, T)
    xdot = -2.0 * tau
    return -0.25 * xdot**2 + 0.25 * c**2 - x


def caustic_trajectories(p: BarrierParams, b_values, half_span: float = 0.5, n: int = 101):
    """Trajectory family x(eta, b) with the tangency point of each member."""
    ex = unfold_cubic(p, window=np.inf)
    T = ex.tan_theta
    out = []
    for b in b_values:
        eta_t, x_t = caustic_tangency(b, ex.x0, p.gamma, T)
        eta = np.linspace(eta_t - half_span, eta_t + half_span, n)
        out.append(CausticTrajectory(b=float(b), eta=eta, x=caustic_x(eta, b, ex.x0, p.gamma, T), eta_t=eta_t, x_t=x_t))
    return out
