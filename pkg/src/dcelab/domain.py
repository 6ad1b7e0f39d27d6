"""Shared physical types, unit conventions and cavity mode algebra.

All solver cores work in natural units (hbar = c = 1) with lengths measured
in an arbitrary reference unit. ``UnitSystem`` converts to and from SI at the
boundaries.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy import interpolate, special

from .errors import DomainError, PhysicsWarning, PreconditionError

# CODATA exact SI constants
HBAR_SI = 1.054_571_817e-34
C_SI = 299_792_458.0
EPS0_SI = 8.854_187_8128e-12
E_CHARGE_SI = 1.602_176_634e-19

# (mass, length, time) exponents of common quantities
DIMENSIONLESS = (0, 0, 0)
LENGTH = (0, 1, 0)
AREA = (0, 2, 0)
INVERSE_LENGTH = (0, -1, 0)
TIME = (0, 0, 1)
FREQUENCY = (0, 0, -1)
RATE = FREQUENCY
MASS = (1, 0, 0)
MOMENTUM = (1, 1, -1)
ENERGY = (1, 2, -2)
POWER = (1, 2, -3)
FORCE = (1, 1, -2)
PRESSURE = (1, -1, -2)


class UnitMode(str, Enum):
    NATURAL = "natural"
    SI = "SI"


@dataclass(frozen=True)
class UnitSystem:
    """Active unit system.

    In natural mode hbar = c = 1 and lengths are counted in multiples of
    ``length_scale`` metres, so a quantity with SI dimensions
    M^m L^l T^t is stored as a multiple of length_scale^(l - m + t).
    """

    mode: UnitMode = UnitMode.NATURAL
    length_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", UnitMode(self.mode))
        if not self.length_scale > 0:
            raise DomainError("length_scale must be positive")

    @property
    def hbar(self) -> float:
        return 1.0 if self.mode is UnitMode.NATURAL else HBAR_SI

    @property
    def c(self) -> float:
        return 1.0 if self.mode is UnitMode.NATURAL else C_SI

    @property
    def eps0(self) -> float:
        return 1.0 if self.mode is UnitMode.NATURAL else EPS0_SI

    def _si_factor(self, dims: Sequence[int]) -> float:
        m, l, t = dims
        return HBAR_SI**m * C_SI ** (-t - m) * self.length_scale ** (l - m + t)

    def to_si(self, value, dims: Sequence[int]):
        if self.mode is UnitMode.SI:
            return value
        return value * self._si_factor(dims)

    def from_si(self, value, dims: Sequence[int]):
        if self.mode is UnitMode.SI:
            return value
        return value / self._si_factor(dims)


NATURAL = UnitSystem(UnitMode.NATURAL)
SI = UnitSystem(UnitMode.SI)


class Polarization(str, Enum):
    SCALAR = "Scalar"
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Cavity eigenmode label.

    For rectangular cavities (nx, ny, nz) are the Cartesian half-wave counts.
    For circular cavities nx is the azimuthal order n, ny the radial index m
    and nz the axial index.
    """

    pol: Polarization
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        object.__setattr__(self, "pol", Polarization(self.pol))
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DomainError(f"mode index {name}={v!r} must be a non-negative integer")
            object.__setattr__(self, name, int(v))

    @classmethod
    def of(cls, nx: int, ny: int, nz: int, pol: Polarization | str = Polarization.SCALAR) -> "ModeIndex":
        return cls(Polarization(pol), nx, ny, nz)

    @property
    def transverse(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def with_nz(self, nz: int) -> "ModeIndex":
        return ModeIndex(self.pol, self.nx, self.ny, nz)

    def __str__(self):
        return f"{self.pol.value}({self.nx},{self.ny},{self.nz})"


@dataclass(frozen=True)
class RectCavity:
    Lx: float
    Ly: float
    Lz: float

    def __post_init__(self):
        for name in ("Lx", "Ly", "Lz"):
            if not getattr(self, name) > 0:
                raise DomainError(f"cavity length {name} must be > 0")


@dataclass(frozen=True)
class CircCavity:
    R: float
    Lz: float

    def __post_init__(self):
        if not (self.R > 0 and self.Lz > 0):
            raise DomainError("cavity radius R and length Lz must be > 0")


CavityGeometry = Union[RectCavity, CircCavity]


def validate_mode(geom: CavityGeometry, m: ModeIndex) -> None:
    """Raise DomainError if ``m`` is not an allowed mode of ``geom``."""
    if isinstance(geom, RectCavity):
        if m.pol is Polarization.SCALAR:
            if min(m.nx, m.ny, m.nz) < 1:
                raise DomainError(f"{m}: scalar Dirichlet modes need nx, ny, nz >= 1")
        elif m.pol is Polarization.TE:
            if m.nx == 0 and m.ny == 0:
                raise DomainError(f"{m}: TE modes need nx, ny not simultaneously zero")
            if m.nz < 1:
                raise DomainError(f"{m}: TE modes need nz >= 1")
        else:
            if m.nx < 1 or m.ny < 1:
                raise DomainError(f"{m}: TM modes need nx, ny >= 1")
    elif isinstance(geom, CircCavity):
        if m.ny < 1:
            raise DomainError(f"{m}: circular modes need radial index m >= 1")
        if m.pol in (Polarization.TE, Polarization.SCALAR) and m.nz < 1:
            raise DomainError(f"{m}: {m.pol.value} circular modes need nz >= 1")
    else:
        raise DomainError(f"unsupported geometry {geom!r}")


def spectrum_rect(geom: RectCavity, m: ModeIndex) -> float:
    validate_mode(geom, m)
    return math.pi * math.sqrt((m.nx / geom.Lx) ** 2 + (m.ny / geom.Ly) ** 2 + (m.nz / geom.Lz) ** 2)


def spectrum_circ(geom: CircCavity, m: ModeIndex) -> float:
    """TE modes use the roots of J_n'; TM and scalar (Dirichlet) modes the roots of J_n."""
    validate_mode(geom, m)
    kind = "Jprime" if m.pol is Polarization.TE else "J"
    root = bessel_root(kind, m.nx, m.ny)
    return math.hypot(root / geom.R, m.nz * math.pi / geom.Lz)


def spectrum(geom: CavityGeometry, m: ModeIndex) -> float:
    if isinstance(geom, RectCavity):
        return spectrum_rect(geom, m)
    return spectrum_circ(geom, m)


def axial_wavenumber(geom: CavityGeometry, m: ModeIndex) -> float:
    """k_z = nz*pi/Lz, the axial wavenumber in the same units as the spectrum."""
    return m.nz * math.pi / geom.Lz


def transverse_wavenumber(geom: CavityGeometry, m: ModeIndex) -> float:
    w = spectrum(geom, m)
    kz = axial_wavenumber(geom, m)
    return math.sqrt(max(w * w - kz * kz, 0.0))


# Bessel roots -------------------------------------------------------------


def bessel_root(kind: str, n: int, m: int) -> float:
    """m-th positive root of J_n (kind="J") or of J_n' (kind="Jprime")."""
    if kind not in ("J", "Jprime"):
        raise DomainError(f"unknown Bessel root kind {kind!r}")
    if int(n) != n or n < 0:
        raise DomainError("Bessel order n must be a non-negative integer")
    if int(m) != m or m < 1:
        raise DomainError("root index m must be >= 1")
    return _bessel_root(kind, int(n), int(m))


@lru_cache(maxsize=None)
def _bessel_root(kind: str, n: int, m: int) -> float:
    zeros = special.jn_zeros if kind == "J" else special.jnp_zeros
    return float(zeros(n, m)[-1])


# Motion profiles ----------------------------------------------------------


class MotionForm(str, Enum):
    HARMONIC_LENGTH = "HarmonicLength"
    HARMONIC_PARAMETER = "HarmonicParameter"
    TABULATED = "Tabulated"


@dataclass(frozen=True)
class MotionProfile:
    """Wall or parameter modulation switched on over [t_start, t_end].

    HarmonicLength: L(t) = L0 [1 + eps sin(Omega (t - t_start))].
    HarmonicParameter: generic modulation eps sin(Omega (t - t_start)).
    Tabulated: L(t) from ``samples`` = (times, lengths), cubic spline.
    Outside the active window the length is L0.
    """

    eps: float = 0.0
    Omega: float = 1.0
    t_start: float = 0.0
    t_end: float = math.inf
    form: MotionForm = MotionForm.HARMONIC_LENGTH
    L0: float = 1.0
    samples: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "form", MotionForm(self.form))
        if self.eps < 0:
            raise DomainError("eps must be >= 0")
        if self.L0 <= 0:
            raise DomainError("L0 must be > 0")
        if self.t_end < self.t_start:
            raise DomainError("t_end must be >= t_start")
        if self.form is MotionForm.TABULATED:
            if self.samples is None:
                raise DomainError("Tabulated motion needs samples=(times, lengths)")
            t, L = (np.asarray(a, dtype=float) for a in self.samples)
            if t.ndim != 1 or t.shape != L.shape or t.size < 4 or np.any(np.diff(t) <= 0):
                raise DomainError("Tabulated samples need >= 4 strictly increasing times")
            spline = interpolate.CubicSpline(t, L, bc_type="clamped")
            object.__setattr__(self, "_spline", spline)
            object.__setattr__(self, "t_start", float(t[0]))
            object.__setattr__(self, "t_end", float(t[-1]))

    def check_perturbative(self, limit: float = 0.1, warn_above: float = 0.01) -> None:
        if self.eps > limit:
            raise PreconditionError(f"eps={self.eps} exceeds the perturbative limit {limit}")
        if self.eps > warn_above:
            warnings.warn(f"eps={self.eps} > {warn_above}: perturbative accuracy degraded", PhysicsWarning, stacklevel=3)

    def modulation(self, t):
        """eps * sin(Omega (t - t_start)) inside the active window, zero outside."""
        t = np.asarray(t, dtype=float)
        active = (t >= self.t_start) & (t <= self.t_end)
        return np.where(active, self.eps * np.sin(self.Omega * (t - self.t_start)), 0.0)

    def length_derivs(self, t):
        """(L, L', L'', L''') at times t; derivatives are one-sided zero outside the window."""
        t = np.asarray(t, dtype=float)
        active = (t >= self.t_start) & (t <= self.t_end)
        if self.form is MotionForm.TABULATED:
            s = self._spline
            tc = np.clip(t, self.t_start, self.t_end)
            vals = [s(tc, k) for k in range(4)]
            L = np.where(t < self.t_start, self.L0, vals[0])
            return (L,) + tuple(np.where(active, v, 0.0) for v in vals[1:])
        ph = self.Omega * (t - self.t_start)
        a = self.L0 * self.eps
        W = self.Omega
        s, c = np.sin(ph), np.cos(ph)
        L = np.where(active, self.L0 + a * s, self.L0)
        L1 = np.where(active, a * W * c, 0.0)
        L2 = np.where(active, -a * W**2 * s, 0.0)
        L3 = np.where(active, -a * W**3 * c, 0.0)
        return L, L1, L2, L3

    def length(self, t):
        return self.length_derivs(t)[0]

    def max_wall_speed(self) -> float:
        if self.form is MotionForm.TABULATED:
            tt = np.linspace(self.t_start, self.t_end, 4001)
            return float(np.max(np.abs(self._spline(tt, 1))))
        return self.L0 * self.eps * self.Omega

    def is_continuous(self, tol: float = 1e-12) -> bool:
        """L(t) continuous at switch-off (it always is at switch-on)."""
        if self.form is MotionForm.TABULATED or not math.isfinite(self.t_end):
            return True
        return abs(math.sin(self.Omega * (self.t_end - self.t_start))) * self.eps <= tol
