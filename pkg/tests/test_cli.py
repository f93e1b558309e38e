import json
import math

import pytest

from underbarrier import cli
from underbarrier.config import load_config
from underbarrier.errors import EXIT_CODES, IoError, UnderbarrierError
from underbarrier.hj_solver import seed_at_origin, trace_branch, TraceConfig
from underbarrier.potential import BarrierParams

SMALL = """\
[pen]
kind = penetration
a = 2.0
sweep_param = a
sweep_start = 2.0
sweep_stop = 2.4
sweep_count = 3

[lines]
kind = stokes1d
format = json
E = 1.5
V = 1.0
a = 2.0
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def test_run_writes_one_file_per_scenario(cfg, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["lines.json", "pen.csv"]
    meta, cols, rows = cli.read_csv(out / "pen.csv")
    assert cols[:4] == ["B", "gamma", "alpha0_sq", "a"]
    assert len(rows) == 3
    doc = json.loads((out / "lines.json").read_text())
    assert doc["columns"] == ["line", "re_x", "im_x"]
    assert doc["metadata"]["result.flux_residual"] < 1e-8


def test_output_is_deterministic(cfg, tmp_path):
    cli.main(["run", str(cfg), "--out", str(tmp_path / "a")])
    cli.main(["run", str(cfg), "--out", str(tmp_path / "b"), "--jobs", "2"])
    for name in ("pen.csv", "lines.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_header_reproduces_config(cfg, tmp_path):
    cli.main(["run", str(cfg), "--out", str(tmp_path)])
    meta, _, _ = cli.read_csv(tmp_path / "pen.csv")
    sec = load_config(cfg)[0]
    got = {k[len("config."):]: v for k, v in meta.items() if k.startswith("config.")}
    assert got == sec.raw
    for key in ("solver_version", "conventions.sheet", "tolerances.seed"):
        assert key in meta


def test_seventeen_digits(cfg, tmp_path):
    cli.main(["run", str(cfg), "--out", str(tmp_path)])
    _, cols, rows = cli.read_csv(tmp_path / "pen.csv")
    v = rows[0][cols.index("w_log")]
    assert float(v) == float(format(float(v), ".17g"))
    assert len(v.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) >= 15


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[s]\nkind = penetration\na = 2\nsweep_param = a\nsweep_start = 1\nsweep_stop = 2\nsweep_count = 1\n")
    assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == EXIT_CODES["ConfigError"]
    assert "sweep_count" in capsys.readouterr().err


def test_solver_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[s]\nkind = stokes1d\nE = 0.5\nV = 1.0\na = 1.0\n")
    assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == EXIT_CODES["DomainError"]


def test_option_validation(cfg, tmp_path):
    assert cli.main(["run", str(cfg), "--jobs", "0"]) == EXIT_CODES["ConfigError"]
    assert cli.main(["run", str(cfg), "--seed-tolerance", "-1"]) == EXIT_CODES["ConfigError"]


def test_exit_code_map_total_and_unique():
    import underbarrier.errors as errors

    classes = [c for c in vars(errors).values() if isinstance(c, type) and issubclass(c, UnderbarrierError)]
    assert {c.__name__ for c in classes} == set(EXIT_CODES)
    assert len(set(EXIT_CODES.values())) == len(EXIT_CODES)
    assert cli.EXIT_INTERNAL not in EXIT_CODES.values()


def test_branch_csv_of_homogeneous_wire(tmp_path):
    p = BarrierParams(B=30.0, gamma=0.2, alpha0=0.0, a=1.0)
    curves = trace_branch(0.0, (0.0, 0.9), p, seed_at_origin(0.0, p), TraceConfig(extensions=False))
    cli.emit_branch_csv(curves, tmp_path / "wkb.csv")
    _, cols, rows = cli.read_csv(tmp_path / "wkb.csv")
    assert cols == ["branch_label", "y", "x", "re_v", "im_v", "re_sigma", "im_sigma", "log_psi_mag"]
    lp = [float(r[-1]) for r in rows]
    assert all(b < a for a, b in zip(lp, lp[1:]))
    with pytest.raises(IoError):
        cli.emit_branch_csv([], tmp_path / "none.csv")


def test_figures_rendered(tmp_path):
    path = tmp_path / "w.cfg"
    path.write_text("[w]\nkind = wire_zero_field\nbeta0 = 0.5\nE = 0.5\nu0 = 1.0\nwidth_start = 1\nwidth_stop = 2\n"
                    "width_count = 3\n")
    assert cli.main(["run", str(path), "--out", str(tmp_path), "--figures"]) == 0
    assert (tmp_path / "w.png").stat().st_size > 0


GOLDEN_NAMES = ["fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig8", "threshold", "impurity", "stokes1d"]


def test_bundled_goldens_present():
    names = {p.stem for p in cli.golden_configs()}
    assert set(GOLDEN_NAMES) <= names
    for n in names:
        assert any(f.stem == n for f in cli.default_golden_dir().iterdir())


def _numbers_close(a: str, b: str) -> bool:
    try:
        x, y = float(a), float(b)
    except ValueError:
        return a == b
    if math.isnan(x) or math.isnan(y):
        return math.isnan(x) and math.isnan(y)
    return abs(x - y) <= 1e-9 * max(1.0, abs(y))


@pytest.mark.parametrize("name", ["fig2", "fig3a", "fig4a", "fig8", "impurity"])
def test_golden_regression(name, tmp_path):
    cfg = next(p for p in cli.golden_configs() if p.stem == name)
    cli.run(cfg, tmp_path)
    _, cols, rows = cli.read_csv(tmp_path / f"{name}.csv")
    _, gcols, grows = cli.read_csv(cli.default_golden_dir() / f"{name}.csv")
    assert cols == gcols and len(rows) == len(grows)
    for r, g in zip(rows, grows):
        assert all(_numbers_close(a, b) for a, b in zip(r, g)), (r, g)
