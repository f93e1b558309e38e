"""Evaluation of configured scenarios into tables.

Each kind maps one parameter set to a :class:`Table` (column names, rows
and scalar metadata).  Sweeps evaluate the same function on every grid
point; points are independent, so they may be farmed out to worker
processes without changing the output.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import critical as crit
from . import impurity as imp
from . import oned_stokes as od
from . import trajectory as tr
from .branches import trace_branches
from .config import Scenario
from .errors import DomainError, NoRealRoot
from .hj_solver import TOL_ROOT, TraceConfig
from .potential import BarrierParams, ImpurityParams, PhysicalParams


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunOptions:
    seed_tolerance: float = TOL_ROOT
    jobs: int = 1


def _barrier(pt: dict) -> BarrierParams:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return BarrierParams.from_alpha0_sq(pt["B"], pt["gamma"], pt["alpha0_sq"], pt["a"])


def _units(pt: dict) -> PhysicalParams | None:
    if pt.get("m", 1.0) == 1.0 and pt.get("hbar", 1.0) == 1.0:
        return None
    return PhysicalParams(u0=1.0, E_field=1.0, m=pt["m"], hbar=pt["hbar"])


def _cplx(z) -> list:
    if z is None:
        return [None, None]
    z = complex(z)
    return [z.real, z.imag]


# --------------------------------------------------------------------------
# kinds


def _branches(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    y = pt["y"]
    meta = {}
    if y == "delta":
        pierce = crit.fold_piercings(p)
        ys = [yy for _, yy, _ in pierce if yy > 0]
        if not ys:
            raise DomainError("y = delta requires a below the critical width (complex fold pair)")
        y = ys[0]
        meta["y_from"] = "fold piercing"
    cfg = TraceConfig(h_max=pt["h_max"], extensions=pt["extensions"], extension_length=pt["extension_length"],
                      tol=opts.seed_tolerance)
    a0 = crit.find_critical_width(p)[0] if p.alpha0 > 0 else None
    curves = trace_branches(y, (pt["x_min"], pt["x_max"]), p, cfg, a0)
    cols = ["branch_label", "y", "x", "re_v", "im_v", "re_sigma", "im_sigma", "log_psi_mag"]
    rows, segments = [], []
    for c in curves:
        segments.append([c.label, c.kind, len(rows), len(c)])
        for x, v, s, lp in zip(c.x, c.v, c.sigma, c.log_psi_mag):
            rows.append([c.label, y, x, v.real, v.imag, s.real, s.imag, lp])
    meta["y"] = y
    meta["a0"] = a0
    meta["regime"] = "homogeneous" if a0 is None else ("a>a0" if p.a > a0 else "a<a0")
    meta["labels"] = sorted({c.label for c in curves if c.kind == "main"})
    meta["segments"] = segments
    if a0 is not None and p.a > a0:
        folds = crit.find_folds(p, 0.0)
        meta["folds_y0"] = [[f.x.real, f.v.real] for f in folds]
    elif a0 is not None:
        meta["fold_piercings"] = [[x, yy] for x, yy, _ in crit.fold_piercings(p)]
    return Table(cols, rows, meta)


def _critical(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    cs = crit.critical_set(p)
    ex = crit._unfolding_at(p, cs.a0, cs.x0, cs.v0)
    A, Bc, quartic = crit.action_expansion_coeffs(p, window=np.inf)
    rows = [
        ["a0", cs.a0, 0.0],
        ["x0", cs.x0, 0.0],
        ["v0", cs.v0, 0.0],
        ["v_a", *_cplx(cs.v_a)],
        ["x_a", *_cplx(cs.x_a)],
        ["v_b", cs.v_b, 0.0],
        ["x_b", cs.x_b, 0.0],
        ["v_c1", *_cplx(cs.v_c1)],
        ["v_c2", *_cplx(cs.v_c2)],
        ["x_c1", *_cplx(cs.x_c1)],
        ["x_c2", *_cplx(cs.x_c2)],
        ["tan_theta", ex.tan_theta, 0.0],
        ["theta_deg", ex.theta_deg, 0.0],
        ["c_lin_y", ex.c_lin_y, 0.0],
        ["c_cubic", ex.c_cubic, 0.0],
        ["c_lin_av", ex.c_lin_av, 0.0],
        ["c_shift_a", ex.c_shift_a, 0.0],
        ["delta_coeff", ex.delta_coeff, 0.0],
        ["Delta_coeff", ex.D_coeff, 0.0],
        ["Delta", cs.Delta, 0.0],
        ["action_linear", A, 0.0],
        ["action_slope", Bc, 0.0],
        ["action_quartic", quartic, 0.0],
    ]
    meta = {"delta_regime": cs.delta_regime}
    if abs(p.a - cs.a0) <= crit.WINDOW * cs.a0:
        sp = crit.singularity_positions(p)
        meta.update({f"singularities.{k}": v for k, v in sp.items()})
    return Table(["quantity", "re", "im"], rows, meta)


_PEN_COLS = ["B", "gamma", "alpha0_sq", "a"]


def _penetration(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    r = tr.penetration(p)
    cols = _PEN_COLS + ["A0", "A1", "w_log", "wkb_log", "A0_over_B", "A1_over_B", "w_log_over_B", "x_b", "v_b", "note"]
    row = [pt[k] for k in _PEN_COLS] + [r.A0, r.A1, r.w_log, r.wkb_log, r.A0_over_B, r.A1_over_B,
                                        r.w_log / r.B, r.x_b, r.v_b, r.note]
    return Table(cols, [row])


def _crosscheck(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    r = tr.two_route(p)
    cols = _PEN_COLS + ["A0_plus_A1", "two_B_delta_im_sigma", "rel_diff", "x_b", "v_b_traj", "v_b_hj"]
    row = [pt[k] for k in _PEN_COLS] + [r["A0_plus_A1"], r["hj_exponent"], r["rel_diff"], r["x_b"],
                                        r["v_b_traj"], r["v_b_hj"]]
    return Table(cols, [row])


def _threshold_point(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    try:
        v_b = crit.find_extrema(p)[2]
        A0, A1 = tr.A0_closed(p, v_b), tr.action_A1(p, v_b)
        vals = [A0 / p.B, A1 / p.B, (A0 + A1) / p.B]
    except NoRealRoot:
        vals = [math.nan] * 3
    return Table(["a", "A0_over_B", "A1_over_B", "exponent_over_B"], [[pt["a"], *vals]])


def _impurity(pt: dict, opts: RunOptions) -> Table:
    ip = ImpurityParams(u=pt["u"], l=pt["l"], a_imp=pt["a_imp"], k=math.sqrt(pt["k2"]))
    B = pt["B"]
    if pt["check_regime"]:
        imp.check_regime(ip, B)
    coef, coef_pair = imp.enhancement_coefficient(ip), imp.enhancement_coefficient_pair(ip)
    cols = ["x", "y", "re_sigma1_scaled", "im_sigma1_scaled", "ratio_single", "ratio_pair",
            "log_psi_quad", "log_psi_closed"]
    rows = []
    for x in np.linspace(pt["x_start"], pt["x_stop"], pt["x_count"]):
        y = 2.0 * ip.k * math.sqrt(x - 1.0)
        s = imp.sigma1_scaled(x, y, ip)
        prof = imp.psi_profile_outside(x, y, ip, B, check=False)
        rows.append([x, y, s.real, s.imag, -s.imag / coef, -s.imag / coef_pair, prof.log_psi_quad,
                     prof.log_psi_closed])
    rep = imp.enhancement_report(ip, B)
    meta = {f"report.{k}": v for k, v in rep.items()}
    meta["enhancement_coefficient"] = coef
    meta["enhancement_coefficient_pair"] = coef_pair
    return Table(cols, rows, meta)


def _stokes1d(pt: dict, opts: RunOptions) -> Table:
    u = _units(pt)
    E, V, a = pt["E"], pt["V"], pt["a"]
    s = od.stokes_lines_1d(E, V, a, u, extent=pt["extent"], step=pt["step"])
    rows = [[i, z.real, z.imag] for i, ln in enumerate(s.lines) for z in ln]
    r = od.reflect_cosh_barrier(E, V, a, u)
    meta = {
        "turning_point": _cplx(s.meta["turning_point"]),
        "ray_angles": s.meta["ray_angles"],
        "crosses_real_axis": s.meta["crosses_real_axis"],
        "max_violation": s.meta["max_violation"],
        "phase_at_turning_point": s.meta["phase_at_turning_point"],
        "reflection_from_phase": s.meta["reflection_from_phase"],
        "R_exact": r.R_exact_mag,
        "R_wkb": r.R_wkb_mag,
        "ka": r.ka,
        "regime_ok": r.regime_ok,
        "exponent_error": r.exponent_error,
        "flux_residual": r.flux_residual,
        "refinement_change": r.refinement_change,
    }
    return Table(["line", "re_x", "im_x"], rows, meta)


def _stokes2d(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    s = crit.trace_stokes_lines_2d(p, extent=pt["extent"])
    rows = [[i, z.real, z.imag] for i, ln in enumerate(s.lines) for z in ln]
    meta = {
        "branching_point": _cplx(s.origin),
        "saddle": _cplx(s.meta["saddle"]),
        "d": s.meta["d"],
        "a0": s.meta["a0"],
        "max_violation": crit.stokes_violation(s),
    }
    return Table(["line", "re_v", "im_v"], rows, meta)


def _wire(pt: dict, opts: RunOptions) -> Table:
    widths = np.linspace(pt["width_start"], pt["width_stop"], pt["width_count"])
    r = od.wire_overbarrier_reflection(pt["beta0"], widths, pt["E"], pt["u0"], _units(pt))
    rows = [[w, R, math.log(R) if R > 0 else -math.inf] for w, R in zip(r.widths, r.R_mag)]
    meta = {"k": r.k, "exponent_fit": r.exponent_fit, "fit_intercept": r.fit_intercept,
            "fit_residual": r.fit_residual, "flux_residual": r.flux_residual}
    return Table(["width", "R_mag", "log_R"], rows, meta)


def _caustics(pt: dict, opts: RunOptions) -> Table:
    p = _barrier(pt)
    bs = np.linspace(pt["b_start"], pt["b_stop"], pt["b_count"])
    fam = crit.caustic_trajectories(p, bs, pt["half_span"], pt["samples"])
    rows = [[c.b, e, x] for c in fam for e, x in zip(c.eta, c.x)]
    meta = {"tangency": [[c.b, c.eta_t, c.x_t] for c in fam]}
    return Table(["b", "eta", "x"], rows, meta)


KIND_FUNCS = {
    "branches": _branches,
    "critical": _critical,
    "penetration": _penetration,
    "crosscheck": _crosscheck,
    "threshold_sweep": _threshold_point,
    "impurity": _impurity,
    "stokes1d": _stokes1d,
    "stokes2d": _stokes2d,
    "wire_zero_field": _wire,
    "caustics": _caustics,
}

#: Kinds that produce exactly one row per parameter set (sweep values are already columns).
_ONE_ROW = {"penetration", "crosscheck", "threshold_sweep"}


def _evaluate(args) -> Table:
    kind, pt, opts = args
    return KIND_FUNCS[kind](pt, opts)


def _threshold_grid(sc: Scenario) -> tuple[list[dict], dict]:
    p = _barrier({**sc.params, "a": 1.0})
    th = tr.find_threshold(p)
    meta = {"a_R": th.a_R, "slope": th.slope, "x_b_at_threshold": th.x_b, "a0": th.a0}
    if sc.sweeps:
        return sc.grid(), meta
    grid = np.linspace(1.02 * th.a0, 1.2 * th.a_R, 21)
    return [{**sc.params, "a": float(a)} for a in grid], meta


def run_scenario(sc: Scenario, opts: RunOptions = RunOptions()) -> Table:
    """Evaluate ``sc`` on its whole grid and merge the per-point tables."""
    extra = {}
    if sc.kind == "threshold_sweep":
        points, extra = _threshold_grid(sc)
    else:
        points = sc.grid()
    jobs = [(sc.kind, pt, opts) for pt in points]
    if opts.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as ex:
            tables = list(ex.map(_evaluate, jobs))
    else:
        tables = [_evaluate(j) for j in jobs]
    if len(tables) == 1 and not sc.sweeps:
        out = tables[0]
        out.meta = {**extra, **out.meta}
        return out
    names = [sw.param for sw in sc.sweeps]
    if sc.kind in _ONE_ROW:
        out = Table(tables[0].columns, [r for t in tables for r in t.rows], dict(extra))
        for i, t in enumerate(tables):
            out.meta.update({f"point{i}.{k}": v for k, v in t.meta.items()})
        return out
    out = Table([f"sweep_{n}" for n in names] + tables[0].columns, [], dict(extra))
    for i, (pt, t) in enumerate(zip(points, tables)):
        prefix = [pt[n] for n in names]
        out.rows.extend(prefix + r for r in t.rows)
        out.meta.update({f"point{i}.{k}": v for k, v in t.meta.items()})
    return out


def meta_value(v) -> str:
    """Deterministic text form of a metadata value."""
    if isinstance(v, str):
        return v
    return json.dumps(_jsonable(v), separators=(",", ":"))


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v
