"""Problem definition: wire profile, impurity potential and unit conversion.

Lengths are measured in units of ``u0 / E_field`` and energies in units of
``u0``; the semiclassical parameter is ``B = u0 sqrt(2 m u0) / (hbar E_field)``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import sympy as sp

from .errors import DomainError, OutOfRange

#: Largest |exponent| accepted when evaluating Gaussians.
EXPONENT_CAP = 700.0

#: Below this B the exponential approximation is not trusted.
SEMICLASSICAL_B = 25.0


def _capped_exp(arg: complex) -> complex:
    if abs(arg.real) > EXPONENT_CAP:
        raise OutOfRange(
            f"Gaussian exponent {arg.real:.4g} exceeds the cap {EXPONENT_CAP:g}",
            cap=EXPONENT_CAP,
            exponent=arg,
        )
    return cmath.exp(arg)


class Profile:
    """Even wire profile alpha(y).

    Subclasses supply a numeric evaluation and a symbolic form of
    ``alpha^2(i v)`` used to derive exact derivatives of the saddle map.
    """

    def alpha(self, y: complex) -> complex:
        raise NotImplementedError

    def alpha_sq(self, y: complex) -> complex:
        return self.alpha(y) ** 2

    def dalpha_sq(self, y: complex) -> complex:
        raise NotImplementedError

    def alpha_sq_imag(self, v: complex) -> complex:
        """alpha^2 evaluated at the imaginary argument ``i v``."""
        return self.alpha_sq(1j * v)

    @staticmethod
    def symbolic_alpha_sq_imag(v, width, amp_sq):
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianProfile(Profile):
    alpha0: float
    a: float

    def alpha(self, y: complex) -> complex:
        y = complex(y)
        return self.alpha0 * _capped_exp(-(y * y) / self.a**2)

    def alpha_sq(self, y: complex) -> complex:
        y = complex(y)
        return self.alpha0**2 * _capped_exp(-2.0 * (y * y) / self.a**2)

    def dalpha_sq(self, y: complex) -> complex:
        return -4.0 * complex(y) / self.a**2 * self.alpha_sq(y)

    @staticmethod
    def symbolic_alpha_sq_imag(v, width, amp_sq):
        return amp_sq * sp.exp(2 * v**2 / width**2)


@dataclass(frozen=True)
class BarrierParams:
    """Dimensionless problem definition.

    Attributes:
        B: semiclassical parameter (large).
        gamma: energy parameter, ``E = (gamma - 1) u0``.
        alpha0: profile amplitude.
        a: profile width in units of ``u0 / E_field``.
    """

    B: float
    gamma: float
    alpha0: float
    a: float

    def __post_init__(self):
        if not (math.isfinite(self.B) and self.B > 0):
            raise DomainError(f"B must be finite and positive, got {self.B}")
        if not (0.0 < self.gamma < 1.0):
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.alpha0 < 0:
            raise DomainError(f"alpha0 must be non-negative, got {self.alpha0}")
        if not self.a > 0:
            raise DomainError(f"a must be positive, got {self.a}")
        if self.B < SEMICLASSICAL_B:
            warnings.warn(
                f"B={self.B:g} is below {SEMICLASSICAL_B:g}; the semiclassical regime is marginal",
                stacklevel=3,
            )

    @classmethod
    def from_alpha0_sq(cls, B: float, gamma: float, alpha0_sq: float, a: float) -> "BarrierParams":
        return cls(B=B, gamma=gamma, alpha0=math.sqrt(alpha0_sq), a=a)

    @property
    def alpha0_sq(self) -> float:
        return self.alpha0**2

    @property
    def profile(self) -> GaussianProfile:
        return GaussianProfile(self.alpha0, self.a)

    def replace(self, **changes) -> "BarrierParams":
        fields = dict(B=self.B, gamma=self.gamma, alpha0=self.alpha0, a=self.a)
        fields.update(changes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return BarrierParams(**fields)


def alpha(y: complex, p: BarrierParams) -> complex:
    """Wire profile alpha0 exp(-y^2/a^2), valid for complex ``y``."""
    return p.profile.alpha(y)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional inputs: barrier depth, field, mass and hbar (any consistent units)."""

    u0: float
    E_field: float
    m: float = 1.0
    hbar: float = 1.0

    @property
    def B(self) -> float:
        return self.u0 * math.sqrt(2.0 * self.m * self.u0) / (self.hbar * self.E_field)

    @property
    def length_unit(self) -> float:
        return self.u0 / self.E_field

    def to_dimensionless(self, E: float, alpha0: float, a_phys: float) -> BarrierParams:
        """Map energy ``E`` and profile width ``a_phys`` to :class:`BarrierParams`."""
        return BarrierParams(
            B=self.B,
            gamma=E / self.u0 + 1.0,
            alpha0=alpha0,
            a=a_phys / self.length_unit,
        )

    @classmethod
    def from_dimensionless(
        cls, p: BarrierParams, u0: float, m: float = 1.0, hbar: float = 1.0
    ) -> tuple["PhysicalParams", float, float]:
        """Inverse map; returns ``(physical, E, a_phys)``."""
        E_field = u0 * math.sqrt(2.0 * m * u0) / (hbar * p.B)
        phys = cls(u0=u0, E_field=E_field, m=m, hbar=hbar)
        return phys, (p.gamma - 1.0) * u0, p.a * phys.length_unit

    def threshold_field(self, a_R: float, a_phys: float) -> float:
        """Field at which the dimensionless width reaches ``a_R``."""
        return a_R * self.u0 / a_phys


@dataclass(frozen=True)
class ImpurityParams:
    """Symmetric Gaussian impurity pair at x = +-l (depth u, width a_imp).

    ``k`` is the wave vector along the wire, so that ``gamma = k^2``.
    """

    u: float
    l: float
    a_imp: float
    k: float

    def __post_init__(self):
        if self.u < 0:
            raise DomainError(f"impurity depth u must be non-negative, got {self.u}")
        if not self.a_imp > 0:
            raise DomainError(f"impurity width must be positive, got {self.a_imp}")
        if self.k**2 >= 1.0:
            raise DomainError(f"k^2 = {self.k**2:g} must be below 1 (underbarrier state)")

    @property
    def gamma(self) -> float:
        return self.k**2

    @property
    def enhancement_exponent(self) -> float:
        """(4k^2 - l^2) / a^2, the log of the effective amplitude gain."""
        return (4.0 * self.k**2 - self.l**2) / self.a_imp**2

    @property
    def window_margin(self) -> float:
        """min(2k^2 - l, 2 - 2k^2); positive inside ``l < 2k^2 < 2``."""
        return min(2.0 * self.k**2 - self.l, 2.0 - 2.0 * self.k**2)

    @property
    def in_window(self) -> bool:
        return self.window_margin > 0

    def perturbative(self, threshold: float = 0.1) -> bool:
        """First applicability condition, ``u exp(E) << 1`` read as ``< threshold``."""
        return self.u * math.exp(min(self.enhancement_exponent, EXPONENT_CAP)) < threshold

    def semiclassical(self, B: float, threshold: float = 0.1) -> bool:
        """Second applicability condition, ``exp(E) << B`` read as ``< threshold * B``."""
        return self.enhancement_exponent < math.log(threshold * B)


def impurity_u(x: complex, y: complex, p: ImpurityParams) -> complex:
    """Two-Gaussian impurity potential, symmetric under x -> -x."""
    x, y = complex(x), complex(y)
    a2 = p.a_imp**2
    return -p.u * (
        _capped_exp(-((x - p.l) ** 2 + y * y) / a2) + _capped_exp(-((x + p.l) ** 2 + y * y) / a2)
    )
