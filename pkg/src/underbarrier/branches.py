"""The full set of wave-function branches at a fixed y.

At y = 0 the real-v curve through the origin carries branches 1, 2, 3 above
the critical width (the hybrid 1-3 below it), and complex-v curves carry the
fold extensions or, below the critical width, the hybrids 3-1 and 2-2.  At
y != 0 every branch is complex; each is seeded by carrying one sample of
its y = 0 counterpart to the requested y at fixed x, in small Newton steps.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from .critical import _inflections, find_critical_width, find_extrema
from .errors import NearFold, NoConvergence, NoRealRoot
from .hj_solver import (
    BranchCurve,
    SaddleMap,
    SaddlePoint,
    TraceConfig,
    _to_curve,
    seed_at_origin,
    solve_saddle,
    trace_branch,
    trace_curve,
)
from .potential import BarrierParams


def _contains(seg, seed: SaddlePoint, tol: float = 1e-6) -> bool:
    """Whether the traced segment passes through the seed (x, v)."""
    xs = np.array([q.x for q in seg])
    vs = np.array([q.v for q in seg])
    for i in range(len(seg) - 1):
        x0, x1 = xs[i], xs[i + 1]
        if min(x0, x1) - tol <= seed.x <= max(x0, x1) + tol:
            f = 0.0 if x1 == x0 else (seed.x - x0) / (x1 - x0)
            v = vs[i] + f * (vs[i + 1] - vs[i])
            if abs(v - seed.v) < max(1e-3, 0.1 * abs(vs[i + 1] - vs[i])):
                return True
    return False


def _conjugate_pair_seeds(p: BarrierParams, m: SaddleMap) -> list[tuple[str, SaddlePoint]]:
    """Real-x points on the complex curves crossing the inflection line Re v = v_i."""
    infl = _inflections(m, p)
    if not infl:
        raise NoRealRoot("no inflection of x(v) on the real axis")
    vi = min(infl, key=lambda v: m("F_v", v).real)
    fv = m("F_v", vi).real
    f3 = m("F_vvv", vi).real
    t0 = math.sqrt(abs(6.0 * fv / f3))
    g = lambda t: m("F", complex(vi, t)).imag
    lo, hi = 0.5 * t0, 1.5 * t0
    while g(lo) * g(hi) > 0:
        lo, hi = 0.5 * lo, 1.5 * hi
        if hi > 10 * t0 + 10:
            raise NoConvergence("complex branch pair not bracketed", last=hi, residual=g(hi))
    t = optimize.brentq(g, lo, hi, xtol=1e-15)
    out = []
    for lab, sgn in (("3-1", 1), ("2-2", -1)):
        v = complex(vi, sgn * t)
        out.append((lab, SaddlePoint(x=m("F", v).real, y=0.0, v=v, sheet=(1, 1), residual=0.0, iterations=0)))
    return out


def _carry_to_y(p: BarrierParams, m: SaddleMap, x: float, v: complex, sheet, y: float, dy: float = 0.02):
    """Follow the root v(x, y') at fixed x from y' = 0 to y' = y."""
    n = max(4, int(math.ceil(abs(y) / dy)))
    for yk in np.linspace(0.0, y, n + 1)[1:]:
        v = solve_saddle(x, float(yk), p, v, sheet, saddle_map=m).v
    return SaddlePoint(x=x, y=y, v=v, sheet=sheet, residual=0.0, iterations=n)


def _finite_y_seeds(y, p, m, base: list[BranchCurve], rename: dict) -> list[tuple[str, SaddlePoint]]:
    """One seed per y = 0 branch, carried to ``y`` at fixed x from the small-x end."""
    seeds = []
    for c in base:
        if c.kind != "main" or len(c.x) < 3:
            continue
        i = max(1, len(c.x) // 4)
        try:
            sd = _carry_to_y(p, m, float(c.x[i]), complex(c.v[i]), c.sheets[i], y)
        except (NoConvergence, NearFold):
            continue
        seeds.append((rename.get(c.label, c.label), sd))
    return seeds


def trace_branches(
    y: float,
    x_range,
    p: BarrierParams,
    cfg: TraceConfig = TraceConfig(),
    a0: float | None = None,
) -> list[BranchCurve]:
    """All branches at fixed real ``y`` over ``x_range``, labeled.

    Above the critical width ``a0`` (found when not given) the labels are
    1, 2, 3; below it, 1-3, 3-1, 2-2 at y = 0 and 1-1, 2-2, 3-3 elsewhere.
    Fold extensions carry the label of the branch they continue.
    """
    m = SaddleMap(p)
    if p.alpha0 > 0 and a0 is None:
        a0 = find_critical_width(p)[0]
    above = p.alpha0 == 0 or p.a > a0
    lo, hi = x_range
    if y == 0:
        curves = trace_branch(0.0, x_range, p, seed_at_origin(0.0, p), cfg)
        if not above:
            for lab, sd in _conjugate_pair_seeds(p, m):
                if lo <= sd.x <= hi:
                    for seg in trace_curve(0.0, x_range, p, sd, cfg, m):
                        curves.append(_to_curve(m, 0.0, lab, seg, "main"))
        return curves
    found: list[list] = []  # [label, points, holds its own seed]
    base = trace_branches(0.0, x_range, p, TraceConfig(**{**cfg.__dict__, "extensions": False}), a0)
    rename = {} if above else {"1-3": "1-1", "3-1": "3-3", "2-2": "2-2"}
    for lab, sd in _finite_y_seeds(y, p, m, base, rename):
        if not (lo <= sd.x <= hi):
            continue
        hit = next((f for f in found if _contains(f[1], sd)), None)
        if hit is not None:
            # a branch already traced from another seed: the seed names it
            if not hit[2]:
                hit[0], hit[2] = lab, True
            continue
        for seg in trace_curve(y, x_range, p, sd, cfg, m):
            found.append([lab, seg, _contains(seg, sd)])
    return [_to_curve(m, y, lab, seg, "main") for lab, seg, _ in found]
