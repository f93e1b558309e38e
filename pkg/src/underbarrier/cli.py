"""Command line entry point.

``underbarrier run CONFIG`` evaluates every scenario of a configuration file
and writes ``<section>.csv`` or ``<section>.json`` into the output
directory.  ``underbarrier goldens`` regenerates the bundled reference
outputs.  Solver errors end the process with the exit code of their class
(see :data:`underbarrier.errors.EXIT_CODES`).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import Scenario, load_config
from .errors import ConfigError, IoError, UnderbarrierError
from .hj_solver import TOL_ROOT, BranchCurve
from .scenarios import RunOptions, Table, _jsonable, meta_value, run_scenario

#: Exit code for failures that are not solver errors (bugs); outside the range of EXIT_CODES.
EXIT_INTERNAL = 70

CONVENTIONS = {
    "conventions.sign": "d(i sigma)/dx = -r; |psi| ~ exp(-B Im sigma)",
    "conventions.sheet": "principal square roots continued by continuity along each branch",
    "conventions.log_scale": "natural logarithms; exponents normalized by B where labeled _over_B",
    "conventions.labels": "1,2,3 above the critical width; 1-3,3-1,2-2 below it at y=0, 1-1,3-3,2-2 at y!=0",
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def metadata(sc: Scenario, table: Table, opts: RunOptions) -> dict:
    """Header block: version, conventions, tolerances, the config section, then results."""
    meta = {"solver_version": __version__, "scenario": sc.name}
    meta.update(CONVENTIONS)
    meta["tolerances.seed"] = opts.seed_tolerance
    meta["tolerances.newton_default"] = TOL_ROOT
    meta.update({f"config.{k}": v for k, v in sc.raw.items()})
    meta.update({f"result.{k}": v for k, v in table.meta.items()})
    return meta


def render_csv(table: Table, meta: dict) -> str:
    buf = io.StringIO()
    for k, v in meta.items():
        text = meta_value(v)
        if "\n" in text:
            raise IoError(f"metadata value for {k!r} spans several lines")
        buf.write(f"# {k}: {text}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(table: Table, meta: dict) -> str:
    doc = {"metadata": _jsonable(meta), "columns": table.columns, "rows": _jsonable(table.rows)}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}", path=str(path)) from None


def emit_branch_csv(curves: list[BranchCurve], path) -> None:
    """Write branch samples with the standard branch columns."""
    if not curves:
        raise IoError("no branch curves to write")
    cols = ["branch_label", "y", "x", "re_v", "im_v", "re_sigma", "im_sigma", "log_psi_mag"]
    rows = [[c.label, c.y, x, v.real, v.imag, s.real, s.imag, lp]
            for c in curves for x, v, s, lp in zip(c.x, c.v, c.sigma, c.log_psi_mag)]
    _write(Path(path), render_csv(Table(cols, rows), {"solver_version": __version__}))


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of the CSV writer: (metadata as text, columns, rows as text)."""
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def run(config_path, out_dir=".", opts: RunOptions = RunOptions(), figures: bool = False) -> list[Path]:
    """Evaluate every scenario of ``config_path``; returns the written files."""
    scenarios = load_config(config_path)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out}: {exc.strerror}") from None
    written = []
    for sc in scenarios:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = run_scenario(sc, opts)
        meta = metadata(sc, table, opts)
        text = render_csv(table, meta) if sc.format == "csv" else render_json(table, meta)
        path = out / sc.filename
        _write(path, text)
        written.append(path)
        if figures:
            from .plotting import render_figure

            render_figure(sc.kind, table, out / f"{sc.name}.png")
    return written


def golden_configs() -> list[Path]:
    root = resources.files("underbarrier") / "goldens"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".cfg"))


def default_golden_dir() -> Path:
    return Path(str(resources.files("underbarrier") / "goldens" / "expected"))


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="underbarrier", description="Underbarrier tunneling scenarios")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="evaluate the scenarios of a configuration file")
    r.add_argument("config")
    r.add_argument("--out", default=".", help="output directory (default: current directory)")
    r.add_argument("--seed-tolerance", type=float, default=TOL_ROOT, help="Newton tolerance for branch seeds")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for sweep points")
    r.add_argument("--figures", action="store_true", help="also render a PNG per scenario")
    g = sub.add_parser("goldens", help="regenerate the bundled golden outputs")
    g.add_argument("--out", default=None, help="output directory (default: the bundled golden directory)")
    g.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be at least 1, got {args.jobs}", field="jobs")
        if args.command == "run":
            if not args.seed_tolerance > 0:
                raise ConfigError("--seed-tolerance must be positive", field="seed-tolerance")
            opts = RunOptions(seed_tolerance=args.seed_tolerance, jobs=args.jobs)
            for path in run(args.config, args.out, opts, args.figures):
                print(path)
        else:
            out = Path(args.out) if args.out else default_golden_dir()
            for cfg in golden_configs():
                for path in run(cfg, out, RunOptions(jobs=args.jobs)):
                    print(path)
    except UnderbarrierError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001 - anything else is a bug; report and use a fixed code
        print(f"internal error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0

