"""Tracing of level curves Im h(z) = 0 of an analytic function.

Used for Stokes lines both of the local quartic action in the complex
saddle-coordinate plane and of the one-dimensional WKB phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import TracerStall

Analytic = Callable[[complex], complex]


@dataclass
class StokesLineSet:
    """Polylines in a complex plane emanating from ``origin``."""

    origin: complex
    lines: list[np.ndarray] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def max_violation(self, h: Analytic) -> float:
        """Largest |Im h| / max(1, |Re h|) over all vertices."""
        worst = 0.0
        for line in self.lines:
            for z in line:
                val = h(complex(z))
                worst = max(worst, abs(val.imag) / max(1.0, abs(val.real)))
        return worst


def _project(h: Analytic, dh: Analytic, z: complex, t: complex, tol: float) -> complex | None:
    """Newton back onto Im h = 0, moving across the tangent ``t``."""
    n = 1j * t
    for _ in range(30):
        val = h(z)
        if abs(val.imag) <= tol * max(1.0, abs(val.real)):
            return z
        d = (dh(z) * n).imag
        if d == 0:
            return None
        z = z - val.imag / d * n
    return None


def trace_level_curve(
    h: Analytic,
    dh: Analytic,
    start: complex,
    direction: complex,
    *,
    step: float,
    stop: Callable[[complex], bool],
    tol: float = 1e-12,
    max_steps: int = 20000,
    h_min: float | None = None,
    on_accept: Callable[[complex], None] | None = None,
) -> np.ndarray:
    """Follow Im h = 0 from ``start`` (assumed on the curve) along ``direction``.

    The local tangent is conj(h')/|h'|, oriented to continue the previous step.
    ``on_accept`` is called with every accepted vertex, which lets a
    path-dependent ``h`` move its reference point along.
    """
    h_min = h_min if h_min is not None else step * 1e-6
    t = direction / abs(direction)
    z = _project(h, dh, complex(start), t, tol)
    if z is None:
        raise TracerStall(f"start point {start} cannot be projected onto the level curve", z=start)
    if on_accept:
        on_accept(z)
    pts = [z]
    ds = step
    for _ in range(max_steps):
        g = dh(z)
        if abs(g) > 1e-14:
            tn = g.conjugate() / abs(g)
            if (tn * t.conjugate()).real < 0:
                tn = -tn
        else:
            tn = t
        while True:
            z_new = _project(h, dh, z + ds * tn, tn, tol)
            if z_new is not None and abs(z_new - z) < 1.5 * ds:
                d = (z_new - z) / abs(z_new - z)
                if (d * tn.conjugate()).real > 0.8:
                    break
            ds *= 0.5
            if ds < h_min:
                raise TracerStall(f"Stokes-line step collapsed near z={z:.6g}", z=z)
        t = (z_new - z) / abs(z_new - z)
        z = z_new
        if on_accept:
            on_accept(z)
        pts.append(z)
        ds = min(step, ds * 1.5)
        if stop(z):
            return np.array(pts)
    raise TracerStall(f"Stokes line not terminated after {max_steps} steps", z=z)


def ray_angles(order: int, phase: float) -> list[float]:
    """Directions of Im(c z^order) = 0 rays for c = exp(i phase)."""
    return [(k * math.pi - phase) / order for k in range(2 * order)]


def unit(angle: float) -> complex:
    return cmath.exp(1j * angle)
