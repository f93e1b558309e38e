"""Quick-look PNG rendering of scenario tables (optional, ``run --figures``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .scenarios import Table  # noqa: E402

# (x column, y column, grouping column) per kind
_AXES = {
    "branches": ("x", "log_psi_mag", "branch_label"),
    "critical": None,
    "penetration": ("a", "w_log_over_B", None),
    "crosscheck": ("a", "rel_diff", None),
    "threshold_sweep": ("a", "exponent_over_B", None),
    "impurity": ("x", "ratio_single", None),
    "stokes1d": ("re_x", "im_x", "line"),
    "stokes2d": ("re_v", "im_v", "line"),
    "wire_zero_field": ("width", "log_R", None),
    "caustics": ("eta", "x", "b"),
}


def render_figure(kind: str, table: Table, path: Path) -> Path | None:
    """Line plot of the table's principal columns; kinds without curves are skipped."""
    axes = _AXES.get(kind)
    if axes is None or not table.rows:
        return None
    xc, yc, gc = axes
    cols = table.columns
    ix, iy = cols.index(xc), cols.index(yc)
    groups: dict = {}
    if gc is None:
        groups[None] = table.rows
    else:
        ig = cols.index(gc)
        for r in table.rows:
            groups.setdefault(r[ig], []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, rows in groups.items():
        ax.plot([r[ix] for r in rows], [r[iy] for r in rows], ".-" if gc is None else "-", ms=3,
                label=None if key is None else str(key))
    ax.set_xlabel(xc)
    ax.set_ylabel(yc)
    if gc is not None and len(groups) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
