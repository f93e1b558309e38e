"""Saddle equation, complex action and branch continuation.

The general integral of the Hamilton-Jacobi equation is parametrised by the
saddle coordinate ``v(x, y)``, the root of

    x = w S1 / f - w^2 / (4 f^2),   w = v + i y,
    S1 = sqrt(1 + alpha^2(i v)),    f = sqrt(gamma + alpha^2(i v)).

The square root ``r = sqrt(alpha^2(iv) + 1 - x)`` that enters the action is
fixed by the saddle equation itself, ``r = S1 - w / (2 f)``.  The remaining
freedom is the sheet of ``S1`` and ``f``; it is carried as a pair of signs
``(s1, sf)`` multiplying the principal roots and followed by continuity.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy import integrate

from .errors import NearFold, NoConvergence, OutOfRange, QuadratureFailure, StepCollapse
from .potential import EXPONENT_CAP, BarrierParams, GaussianProfile

TOL_ROOT = 1e-12
MAX_NEWTON = 50
FOLD_THRESHOLD = 1e-6

Sheet = tuple[int, int]
PRINCIPAL: Sheet = (1, 1)


# --------------------------------------------------------------------------
# symbolic saddle map

_DERIVS = {
    "F": (),
    "F_v": ("v",),
    "F_vv": ("v", "v"),
    "F_vvv": ("v", "v", "v"),
    "F_y": ("y",),
    "F_vy": ("v", "y"),
    "F_a": ("a",),
    "F_va": ("v", "a"),
    "F_vva": ("v", "v", "a"),
    "F_vvvv": ("v", "v", "v", "v"),
}


@functools.lru_cache(maxsize=None)
def _saddle_functions(profile_cls=GaussianProfile):
    v, y, a, amp_sq, g, s1, sf = sp.symbols("v y a amp_sq gamma s1 sf")
    q = profile_cls.symbolic_alpha_sq_imag(v, a, amp_sq)
    S1 = s1 * sp.sqrt(1 + q)
    f = sf * sp.sqrt(g + q)
    w = v + sp.I * y
    F = w * S1 / f - w**2 / (4 * (g + q))
    syms = {"v": v, "y": y, "a": a}
    out = {}
    for name, wrt in _DERIVS.items():
        expr = F
        for s in wrt:
            expr = sp.diff(expr, syms[s])
        out[name] = sp.lambdify((v, y, a, amp_sq, g, s1, sf), expr, modules="cmath", cse=True)
    return out


def _check_exponent(v: complex, a: float):
    e = (2.0 * v * v / a**2).real
    if e > EXPONENT_CAP:
        raise OutOfRange(
            f"profile exponent {e:.4g} at v={v:.6g} exceeds the cap {EXPONENT_CAP:g}",
            cap=EXPONENT_CAP,
            v=v,
        )


def _follow(principal: complex, ref: complex | None) -> int:
    """Sign that makes ``sign * principal`` closest to ``ref``."""
    if ref is None:
        return 1
    return 1 if abs(principal - ref) <= abs(principal + ref) else -1


class SaddleMap:
    """Evaluates the saddle map x = F(v, y) and its derivatives for fixed parameters."""

    def __init__(self, p: BarrierParams):
        self.p = p
        self._fn = _saddle_functions(type(p.profile))

    def __call__(self, name: str, v: complex, y: complex = 0.0, sheet: Sheet = PRINCIPAL, a=None) -> complex:
        a = self.p.a if a is None else a
        v = complex(v)
        _check_exponent(v, a)
        return complex(self._fn[name](v, complex(y), a, self.p.alpha0_sq, self.p.gamma, sheet[0], sheet[1]))

    def q(self, v: complex) -> complex:
        return self.p.profile.alpha_sq_imag(complex(v))

    def roots(self, v: complex, sheet: Sheet = PRINCIPAL) -> tuple[complex, complex]:
        """Signed roots (S1, f) at ``v``."""
        q = self.q(v)
        return sheet[0] * cmath.sqrt(1.0 + q), sheet[1] * cmath.sqrt(self.p.gamma + q)

    def follow_sheet(self, v: complex, ref_roots: tuple[complex, complex] | None) -> Sheet:
        """Sheet at ``v`` continuous with the reference roots."""
        if ref_roots is None:
            return PRINCIPAL
        q = self.q(v)
        return (
            _follow(cmath.sqrt(1.0 + q), ref_roots[0]),
            _follow(cmath.sqrt(self.p.gamma + q), ref_roots[1]),
        )

    def r(self, v: complex, y: complex = 0.0, sheet: Sheet = PRINCIPAL) -> complex:
        """Signed sqrt(alpha^2(iv) + 1 - x) selected by the saddle equation."""
        S1, f = self.roots(v, sheet)
        return S1 - (complex(v) + 1j * complex(y)) / (2.0 * f)


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class SaddlePoint:
    x: float
    y: complex
    v: complex
    sheet: Sheet = PRINCIPAL
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class ComplexAction:
    sigma: complex
    dsigma_dx: complex
    dsigma_dy: complex
    v: complex
    sheet: Sheet = PRINCIPAL

    def hj_residual(self, x: float, gamma: float) -> float:
        return abs(self.dsigma_dx**2 + self.dsigma_dy**2 - x - (gamma - 1.0))


@dataclass
class BranchCurve:
    """Samples of one branch at fixed ``y``, ordered by increasing ``x``."""

    y: float
    label: str
    x: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    log_psi_mag: np.ndarray
    sheets: list = field(default_factory=list)
    kind: str = "main"

    def __len__(self):
        return len(self.x)

    @property
    def samples(self):
        return list(zip(self.x, self.v, self.sigma, self.log_psi_mag))


# --------------------------------------------------------------------------
# saddle root


def _nearby_fold(m: SaddleMap, x: float, y: complex, v_guess: complex, sheet: Sheet):
    """Stationary point of F close to ``v_guess``, or None."""
    v = complex(v_guess)
    for _ in range(MAX_NEWTON):
        try:
            d2 = m("F_vv", v, y, sheet)
            if d2 == 0:
                return None
            step = m("F_v", v, y, sheet) / d2
        except (OutOfRange, ZeroDivisionError):
            return None
        v -= step
        if abs(step) < 1e-13 * max(1.0, abs(v)):
            break
    else:
        return None
    if abs(v - v_guess) > 0.5:
        return None
    return v


def solve_saddle(
    x: float,
    y: complex,
    p: BarrierParams,
    v_guess: complex,
    sheet: Sheet = PRINCIPAL,
    *,
    tol: float = TOL_ROOT,
    max_iter: int = MAX_NEWTON,
    fold_threshold: float = FOLD_THRESHOLD,
    saddle_map: SaddleMap | None = None,
) -> SaddlePoint:
    """Complex Newton root of the saddle equation nearest ``v_guess``.

    Raises NearFold when the root sits on a fold (|dx/dv| below the
    threshold) or when the iteration fails next to a fold whose value of x
    has been passed, i.e. the real root ceased to exist.
    """
    m = saddle_map or SaddleMap(p)
    v = complex(v_guess)
    res = math.inf
    for it in range(1, max_iter + 1):
        try:
            Fx = m("F", v, y, sheet) - x
            Fv = m("F_v", v, y, sheet)
        except OutOfRange:
            break
        res = abs(Fx)
        if res < tol:
            if abs(Fv) < fold_threshold:
                raise NearFold(f"root at v={v:.8g} lies on a fold (|dx/dv|={abs(Fv):.2e})", v=v, x=x)
            return SaddlePoint(x=x, y=y, v=v, sheet=sheet, residual=res, iterations=it)
        if Fv == 0:
            break
        step = Fx / Fv
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        v -= step
    vf = _nearby_fold(m, x, y, v_guess, sheet)
    if vf is not None:
        xf = m("F", vf, y, sheet)
        raise NearFold(
            f"no root near v={complex(v_guess):.6g}: fold at v={vf:.8g}, x={xf:.8g}",
            v_fold=vf,
            x_fold=xf,
        )
    raise NoConvergence(f"saddle Newton failed at x={x}, y={y}", last=v, residual=res)


def seed_at_origin(y: complex, p: BarrierParams) -> SaddlePoint:
    """The x=0 seed, iv = y."""
    return SaddlePoint(x=0.0, y=y, v=-1j * complex(y))


# --------------------------------------------------------------------------
# action


def _t3_segment(p: BarrierParams, z0: complex, z1: complex, sf_ref: complex | None):
    """-int y1 d/dy1 sqrt(gamma + alpha^2(y1)) dy1 along the segment z0 -> z1."""
    prof = p.profile
    dz = z1 - z0
    state = {"ref": sf_ref}

    def integrand(s):
        y1 = z0 + s * dz
        root = cmath.sqrt(p.gamma + prof.alpha_sq(y1))
        if state["ref"] is not None:
            root *= _follow(root, state["ref"])
        return -y1 * prof.dalpha_sq(y1) / (2.0 * root) * dz

    val, err = integrate.quad(integrand, 0.0, 1.0, complex_func=True, epsabs=1e-15, epsrel=1e-13, limit=200)
    err = abs(err)
    if not (math.isfinite(err) and err < 1e-9 * max(1.0, abs(val))):
        raise QuadratureFailure(f"y1-quadrature error estimate {err:.3g}", error=err)
    return val


def _t3(p: BarrierParams, v: complex, sheet: Sheet, detour: complex | None = None) -> complex:
    end = 1j * complex(v)
    # the root on the path is anchored to the sheet at its start
    start_root = sheet[1] * math.sqrt(p.gamma + p.alpha0_sq)
    if detour is None:
        return _t3_segment(p, 0.0, end, start_root)
    return _t3_segment(p, 0.0, detour, start_root) + _t3_segment(p, detour, end, None)


def action(
    x: float,
    y: complex,
    p: BarrierParams,
    v: complex,
    sheet: Sheet = PRINCIPAL,
    *,
    check_path: bool = False,
    saddle_map: SaddleMap | None = None,
) -> ComplexAction:
    """Complex action sigma(x, y) with gradient, normalised to sigma(0, 0) = 0."""
    m = saddle_map or SaddleMap(p)
    v = complex(v)
    S1, f = m.roots(v, sheet)
    r = S1 - (v + 1j * complex(y)) / (2.0 * f)
    t_x = 1j * (2.0 / 3.0) * (S1**3 - r**3)
    t3 = _t3(p, v, sheet)
    if check_path and v != 0:
        end = 1j * v
        bend = 0.5 * end + 0.25 * abs(end) * (1j * end / abs(end))
        alt = _t3(p, v, sheet, detour=bend)
        if abs(alt - t3) > 1e-8 * max(1.0, abs(t3)):
            raise QuadratureFailure(
                f"y1-integral depends on the path: {t3} vs {alt}", straight=t3, detour=alt
            )
    sigma = t_x + complex(y) * f + t3
    return ComplexAction(sigma=sigma, dsigma_dx=1j * r, dsigma_dy=f, v=v, sheet=sheet)


def log_psi_at(x: float, y: complex, p: BarrierParams, v: complex, sheet: Sheet = PRINCIPAL) -> float:
    """-B Im sigma at a single saddle point."""
    return -p.B * action(x, y, p, v, sheet).sigma.imag


# --------------------------------------------------------------------------
# continuation


@dataclass(frozen=True)
class TraceConfig:
    h0: float = 0.02
    h_min: float = 1e-10
    h_max: float = 0.05
    max_steps: int = 20000
    extensions: bool = True
    extension_length: float = 0.3
    tol: float = TOL_ROOT
    v_max: float = 12.0
    # step <= fold_guard * |F_v / F_vv| (distance to the nearest fold), but not below fold_floor
    fold_guard: float = 0.25
    fold_floor: float = 1e-3


@dataclass
class _Point:
    x: float
    v: complex
    sheet: Sheet
    fold: bool = False


def _jac(m: SaddleMap, v: complex, y: float, sheet: Sheet) -> np.ndarray:
    Fv = m("F_v", v, y, sheet)
    return np.array([[-1.0, Fv.real, -Fv.imag], [0.0, Fv.imag, Fv.real]])


def _tangent(J: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    t = np.cross(J[0], J[1])
    n = np.linalg.norm(t)
    if n == 0.0:
        # exactly on a branch point: keep going straight
        return prev.copy()
    t /= n
    if prev is not None and float(t @ prev) < 0.0:
        t = -t
    return t


def _correct(m, y, z_pred, t, sheet, tol):
    z = z_pred.copy()
    for it in range(12):
        v = complex(z[1], z[2])
        G = m("F", v, y, sheet) - z[0]
        res = np.array([G.real, G.imag, float(t @ (z - z_pred))])
        if abs(G) < tol and it > 0:
            return z, it
        J = np.vstack([_jac(m, v, y, sheet), t])
        try:
            dz = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            return None, it
        z = z + dz
        if not np.all(np.isfinite(z)):
            return None, it
    v = complex(z[1], z[2])
    if abs(m("F", v, y, sheet) - z[0]) < tol:
        return z, 12
    return None, 12


def _locate_fold(m: SaddleMap, y: float, a: _Point, b: _Point) -> _Point:
    """Fold between two samples, polished by Newton on dx/dv = 0."""
    v = 0.5 * (a.v + b.v)
    sheet = a.sheet
    for _ in range(MAX_NEWTON):
        step = m("F_v", v, y, sheet) / m("F_vv", v, y, sheet)
        v -= step
        if abs(step) < 1e-14 * max(1.0, abs(v)):
            break
    x = m("F", v, y, sheet)
    return _Point(x=x.real, v=v, sheet=sheet, fold=True)


def _march(m, y, start: _Point, direction: np.ndarray, x_range, cfg: TraceConfig, limit=None):
    """Arclength continuation from ``start`` in ``direction``; returns accepted points."""
    lo, hi = x_range
    pts = [start]
    z = np.array([start.x, start.v.real, start.v.imag])
    t = direction / np.linalg.norm(direction)
    h = cfg.h0
    sheet = start.sheet
    for _ in range(cfg.max_steps):
        v_cur = complex(z[1], z[2])
        t_new = _tangent(_jac(m, v_cur, y, sheet), t)
        fvv = abs(m("F_vv", v_cur, y, sheet))
        if fvv > 0:
            h = min(h, max(cfg.fold_floor, cfg.fold_guard * abs(m("F_v", v_cur, y, sheet)) / fvv))
        while True:
            z_pred = z + h * t_new
            try:
                z_c, nit = _correct(m, y, z_pred, t_new, sheet, cfg.tol)
            except OutOfRange:
                z_c, nit = None, 99
            ok = z_c is not None and np.linalg.norm(z_c - z) < 2.0 * h
            if ok:
                t_chk = _tangent(_jac(m, complex(z_c[1], z_c[2]), y, sheet), t_new)
                ok = float(t_chk @ t_new) > 0.95 or float(t_chk[1:] @ t_new[1:]) ** 2 > 0.9
            if ok:
                break
            h *= 0.5
            if h < cfg.h_min:
                raise StepCollapse(
                    f"continuation step fell below {cfg.h_min:g} at x={z[0]:.8g}, v={complex(z[1], z[2]):.8g}",
                    x=z[0],
                )
        v_new = complex(z_c[1], z_c[2])
        sheet = m.follow_sheet(v_new, m.roots(complex(z[1], z[2]), sheet))
        z, t = z_c, t_new
        pts.append(_Point(x=float(z[0]), v=v_new, sheet=sheet))
        if nit <= 3:
            h = min(cfg.h_max, 1.5 * h)
        if z[0] < lo or z[0] > hi:
            break
        if limit is not None and limit(pts[-1]):
            break
        if abs(v_new) > cfg.v_max:
            break
    else:
        raise StepCollapse(f"continuation exceeded {cfg.max_steps} steps", x=z[0])
    return pts


def _clip(pts: list[_Point], m: SaddleMap, y: float, x_range) -> list[_Point]:
    """Replace the last point by the exact boundary crossing if it overshot."""
    lo, hi = x_range
    if len(pts) < 2:
        return pts
    last = pts[-1]
    bound = hi if last.x > hi else lo if last.x < lo else None
    if bound is None:
        return pts
    prev = pts[-2]
    frac = (bound - prev.x) / (last.x - prev.x)
    guess = prev.v + frac * (last.v - prev.v)
    sp_ = solve_saddle(bound, y, m.p, guess, prev.sheet, saddle_map=m, fold_threshold=0.0)
    return pts[:-1] + [_Point(x=bound, v=sp_.v, sheet=prev.sheet)]


def _split_folds(m: SaddleMap, y: float, pts: list[_Point]) -> list[list[_Point]]:
    """Cut a traced curve where x turns back, inserting the fold points."""
    segs = [[pts[0]]]
    for q in pts[1:]:
        cur = segs[-1]
        if len(cur) >= 2 and (cur[-1].x - cur[-2].x) * (q.x - cur[-1].x) < 0:
            fold = _locate_fold(m, y, cur[-2], q)
            last = cur[-1]
            if abs(fold.v - cur[-2].v) < abs(last.v - cur[-2].v):
                cur[-1] = fold
                segs.append([fold, last])
            else:
                cur.append(fold)
                segs.append([fold])
        segs[-1].append(q)
    out = []
    for s in segs:
        kept = [s[0]]
        for q in s[1:]:
            if abs(q.v - kept[-1].v) > 1e-12:
                kept.append(q)
            elif q.fold:
                kept[-1] = q
        if len(kept) >= 2:
            out.append(kept)
    return out


def _to_curve(m: SaddleMap, y: float, label: str, pts: list[_Point], kind: str) -> BranchCurve:
    pts = sorted(pts, key=lambda q: q.x)
    p = m.p
    sig = np.array([action(q.x, y, p, q.v, q.sheet, saddle_map=m).sigma for q in pts])
    return BranchCurve(
        y=float(y),
        label=label,
        x=np.array([q.x for q in pts]),
        v=np.array([q.v for q in pts]),
        sigma=sig,
        log_psi_mag=-p.B * sig.imag,
        sheets=[q.sheet for q in pts],
        kind=kind,
    )


def trace_curve(y: float, x_range, p: BarrierParams, seed: SaddlePoint, cfg: TraceConfig = TraceConfig(),
                saddle_map: SaddleMap | None = None) -> list[list[_Point]]:
    """Both directions of the connected solution curve through ``seed``, split at folds."""
    m = saddle_map or SaddleMap(p)
    start = _Point(x=float(seed.x), v=complex(seed.v), sheet=seed.sheet)
    t0 = _tangent(_jac(m, start.v, y, start.sheet), None)
    fwd = _clip(_march(m, y, start, t0, x_range, cfg), m, y, x_range)
    bwd = _clip(_march(m, y, start, -t0, x_range, cfg), m, y, x_range)
    pts = bwd[::-1] + fwd[1:]
    return _split_folds(m, y, pts)


def _fold_extension(m: SaddleMap, y: float, fold: _Point, upward: bool, sign_im: int, x_range, cfg):
    """Complex continuation past a fold into the region where no real root exists."""
    d2 = m("F_vv", fold.v, y, fold.sheet)
    dx = 1e-4 * (1 if upward else -1)
    dv = cmath.sqrt(2.0 * dx / d2)
    dv = complex(dv.real, sign_im * abs(dv.imag)) if dv.imag != 0 else dv
    sp_ = solve_saddle(fold.x + dx, y, m.p, fold.v + dv, fold.sheet, saddle_map=m)
    start = _Point(x=sp_.x, v=sp_.v, sheet=fold.sheet)
    d = np.array([1.0 if upward else -1.0, 0.0, 0.0])
    stop = fold.x + cfg.extension_length if upward else fold.x - cfg.extension_length
    lim = (lambda q: q.x > stop) if upward else (lambda q: q.x < stop)
    rng = (max(x_range[0], min(stop, fold.x)), min(x_range[1], max(stop, fold.x)))
    pts = _march(m, y, start, d, (rng[0] - 1e-9, rng[1] + 1e-9), cfg, limit=lim)
    pts = _clip(pts, m, y, rng)
    return [fold] + pts


def _label_real_segments(segs):
    n = len(segs)
    if n == 1:
        return ["1-3"]
    if n == 2:
        return ["1", "2"]
    if n == 3:
        return ["1", "2", "3"]
    return [str(i + 1) for i in range(n)]


def trace_branch(
    y: float,
    x_range,
    p: BarrierParams,
    seed: SaddlePoint,
    cfg: TraceConfig = TraceConfig(),
    labels: list[str] | None = None,
) -> list[BranchCurve]:
    """Trace the curve through ``seed`` and return its fold-separated, labeled segments.

    At y = 0 on the real-v curve the segments are labeled by their position
    relative to the folds (1 below c1, 2 between, 3 above c2), a curve without
    folds is the hybrid 1-3.  Complex extensions past the folds are appended
    when ``cfg.extensions`` is set.
    """
    m = SaddleMap(p)
    segs = trace_curve(y, x_range, p, seed, cfg, m)
    segs.sort(key=lambda s: min(q.v.real for q in s))
    names = labels or _label_real_segments(segs)
    if len(names) < len(segs):
        names = list(names) + [names[-1]] * (len(segs) - len(names))
    out = [_to_curve(m, y, nm, s, "main") for nm, s in zip(names, segs)]
    if cfg.extensions and y == 0 and abs(complex(seed.v).imag) < 1e-12:
        folds = []
        for s in segs:
            for q in (s[0], s[-1]):
                if q.fold and all(abs(q.v - f.v) > 1e-9 for f in folds):
                    folds.append(q)
        for fold in folds:
            upward = m("F_vv", fold.v, y, fold.sheet).real < 0
            for sgn in (+1, -1):
                if upward:
                    lab = "1" if sgn > 0 else "2"
                else:
                    lab = "3" if sgn > 0 else "2"
                ext = _fold_extension(m, y, fold, upward, sgn, x_range, cfg)
                out.append(_to_curve(m, y, lab, ext, "extension"))
    return out


def log_psi(x: float, y: float, branch: BranchCurve) -> float:
    """-B Im sigma on ``branch`` at ``x``, linearly interpolated between samples."""
    if branch.y != y:
        raise OutOfRange(f"branch was traced at y={branch.y}, not y={y}")
    lo, hi = branch.x[0], branch.x[-1]
    if not (lo - 1e-12 <= x <= hi + 1e-12):
        raise OutOfRange(f"x={x} outside the branch range [{lo}, {hi}]", low=lo, high=hi)
    return float(np.interp(x, branch.x, branch.log_psi_mag))
