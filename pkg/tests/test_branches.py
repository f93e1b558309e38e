import pytest

from underbarrier.branches import trace_branches
from underbarrier.critical import fold_piercings


def _main_labels(curves):
    return sorted(c.label for c in curves if c.kind == "main")


def test_wide_at_axis(p_wide):
    assert _main_labels(trace_branches(0.0, (0.0, 2.5), p_wide)) == ["1", "2", "3"]


def test_wide_off_axis(p_wide):
    curves = trace_branches(1.0, (0.0, 2.5), p_wide)
    assert _main_labels(curves) == ["1", "2", "3"]
    for c in curves:
        assert (abs(c.v.imag) > 0).any()


def test_narrow_at_axis(p_narrow):
    assert _main_labels(trace_branches(0.0, (0.0, 2.5), p_narrow)) == ["1-3", "2-2", "3-1"]


def test_narrow_at_fold_piercing(p_narrow):
    y = max(yy for _, yy, _ in fold_piercings(p_narrow))
    curves = trace_branches(y, (0.0, 2.5), p_narrow)
    assert _main_labels(curves) == ["1-1", "2-2", "3-3"]
    x_fold = [x for x, yy, _ in fold_piercings(p_narrow) if yy > 0][0]
    ends = {c.label: (c.x[0], c.x[-1]) for c in curves}
    # 1-1 and 3-3 meet at the fold, 2-2 runs across
    assert ends["1-1"][1] == pytest.approx(x_fold, abs=1e-6)
    assert ends["3-3"][1] == pytest.approx(x_fold, abs=1e-6)
    assert ends["2-2"][0] < x_fold < ends["2-2"][1]
