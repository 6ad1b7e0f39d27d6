"""Vacuum radiation reaction on a single moving mirror.

Covers the 1D susceptibility and force, the 3D scalar and electromagnetic
forces, the radiated energy and photon rate of an oscillating plate, and the
damping, diffusion and decoherence coefficients of a trapped mirror.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .domain import NATURAL, UnitSystem
from .errors import DomainError, NumericError, PhysicsWarning, PreconditionError

MIN_STENCIL_POINTS = 11


def fd_weights(offsets, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative on integer ``offsets``."""
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    A = np.vander(offsets, n, increasing=True).T
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


@dataclass(frozen=True)
class MirrorTrajectory:
    """Mirror position q(t).

    Harmonic form: q(t) = q0 exp(-t/T) sin(Omega t) (T = inf for undamped motion).
    Tabulated form: samples of q on a uniform grid t0 + k*dt.
    """

    q0: float = 0.0
    Omega: float = 0.0
    T: float = math.inf
    samples: tuple | None = None
    t0: float = 0.0
    dt: float | None = None

    @classmethod
    def harmonic(cls, q0: float, Omega: float, T: float = math.inf, units: UnitSystem = NATURAL) -> "MirrorTrajectory":
        traj = cls(q0=q0, Omega=Omega, T=T)
        if abs(Omega * q0) / units.c >= 0.1:
            raise PreconditionError(f"v_max/c = {abs(Omega * q0) / units.c:.3g} violates the non-relativistic bound 0.1")
        return traj

    @classmethod
    def tabulated(cls, values, t0: float, dt: float) -> "MirrorTrajectory":
        values = tuple(float(v) for v in values)
        if dt <= 0:
            raise DomainError("dt must be > 0")
        return cls(samples=values, t0=t0, dt=dt)

    @classmethod
    def static(cls, position: float = 0.0) -> "MirrorTrajectory":
        return cls.tabulated([position] * MIN_STENCIL_POINTS * 2, -float(MIN_STENCIL_POINTS), 1.0)

    @property
    def is_tabulated(self) -> bool:
        return self.samples is not None

    def derivative(self, order: int, t: float) -> float:
        """d^order q / dt^order at time t (order <= 5)."""
        if not 0 <= order <= 5:
            raise DomainError("derivative order must be in 0..5")
        if not self.is_tabulated:
            z = 1j * self.Omega - (0.0 if math.isinf(self.T) else 1.0 / self.T)
            return float(np.imag(self.q0 * z**order * np.exp(z * t)))
        return self._tabulated_derivative(order, t)

    def _tabulated_derivative(self, order: int, t: float) -> float:
        q = np.asarray(self.samples)
        if q.size < MIN_STENCIL_POINTS:
            raise NumericError(f"tabulated trajectory has {q.size} points, need >= {MIN_STENCIL_POINTS}")
        pos = (t - self.t0) / self.dt
        k = int(round(pos))
        if abs(pos - k) > 1e-9:
            raise NumericError("tabulated derivatives are only available at grid nodes")
        if order == 0:
            return float(q[k])
        # second-order central stencil with step h and 2h, combined by Richardson
        half = (order + 1) // 2
        reach = max(2 * half, MIN_STENCIL_POINTS // 2)
        if k - reach < 0 or k + reach >= q.size:
            raise NumericError(
                f"t={t} needs {2 * reach + 1} stencil points centred on node {k}; trajectory has nodes 0..{q.size - 1}"
            )
        offs = np.arange(-half, half + 1)
        window = q[k + 2 * offs]
        if np.all(window == window[0]) and np.all(q[k + offs] == window[0]):
            # weights sum to zero only up to rounding
            return 0.0
        w = fd_weights(offs, order)
        d_h = np.dot(w, q[k + offs]) / self.dt**order
        d_2h = np.dot(w, q[k + 2 * offs]) / (2 * self.dt) ** order
        return float((4.0 * d_h - d_2h) / 3.0)


def susceptibility_1d(Omega: float, units: UnitSystem = NATURAL) -> complex:
    """Closed-form force susceptibility chi(Omega) = i hbar Omega^3 / (6 pi c^2)."""
    return 1j * units.hbar * Omega**3 / (6.0 * math.pi * units.c**2)


def susceptibility_1d_quadrature(Omega: float, units: UnitSystem = NATURAL) -> complex:
    """chi(Omega) from the regularised frequency integral over [-Omega, 0].

    Evaluated at |Omega| and extended as an odd function, since the force
    response is real in the time domain.
    """
    W = abs(Omega)
    if W == 0.0:
        return 0j
    val, _ = integrate.quad(lambda w: (W + w) * abs(w), -W, 0.0, epsabs=0.0, epsrel=1e-13)
    return math.copysign(1.0, Omega) * 2j * (units.hbar / units.c**2) * val / (2.0 * math.pi)


def force_1d(traj: MirrorTrajectory, t: float, units: UnitSystem = NATURAL) -> float:
    return units.hbar * traj.derivative(3, t) / (6.0 * math.pi * units.c**2)


def force_3d(traj: MirrorTrajectory, area: float, field: str, t: float, units: UnitSystem = NATURAL) -> float:
    """Dissipative force on a plane mirror of area ``area``; ``field`` is "Scalar" or "EM"."""
    denominators = {"Scalar": 360.0, "EM": 30.0}
    if field not in denominators:
        raise DomainError(f"field must be 'Scalar' or 'EM', got {field!r}")
    return -units.hbar * area * traj.derivative(5, t) / (denominators[field] * math.pi**2 * units.c**4)


def dissipated_work(traj: MirrorTrajectory, t0: float, t1: float, dim: str = "1D", area: float = 1.0,
                    units: UnitSystem = NATURAL) -> float:
    """-int f(t) q'(t) dt over [t0, t1] for a harmonic trajectory."""
    if dim == "1D":
        f = lambda t: force_1d(traj, t, units)
    else:
        f = lambda t: force_3d(traj, area, dim, t, units)
    val, _ = integrate.quad(lambda t: -f(t) * traj.derivative(1, t), t0, t1, epsabs=0.0, epsrel=1e-12, limit=500)
    return val


def radiated_energy_and_rate(q0: float, Omega: float, T: float, area: float,
                             units: UnitSystem = NATURAL) -> tuple[float, float]:
    """Radiated energy and photon rate of an exponentially damped oscillating EM mirror.

    Returns (E, N/T). Requires Omega*T > 10.
    """
    if not Omega * T > 10:
        raise PreconditionError(f"Omega*T = {Omega * T:.3g} must exceed 10")
    hbar, c = units.hbar, units.c
    energy = hbar * T * area * q0**2 * Omega**6 / (120.0 * math.pi**2 * c**4)
    wavelength = 2.0 * math.pi * c / Omega
    v_max = Omega * q0
    rate = (area / wavelength**2) * (v_max / c) ** 2 * Omega / 15.0
    return energy, rate


def photon_rate(v_over_c: float, Omega: float, area_over_wavelength2: float) -> float:
    """N/T in terms of the dimensionless groups v_max/c and A/lambda0^2."""
    return area_over_wavelength2 * v_over_c**2 * Omega / 15.0


@dataclass(frozen=True)
class MirrorOscillatorParams:
    M: float
    Omega: float
    P0: float = 0.0

    def check(self, units: UnitSystem = NATURAL) -> None:
        ratio = units.hbar * self.Omega / (self.M * units.c**2)
        if ratio > 1e-3:
            warnings.warn(f"hbar*Omega/(M c^2) = {ratio:.3g} is not small", PhysicsWarning, stacklevel=3)


def damping_rate(p: MirrorOscillatorParams, units: UnitSystem = NATURAL) -> float:
    p.check(units)
    return (units.hbar * p.Omega / (p.M * units.c**2)) * p.Omega / (12.0 * math.pi)


def diffusion_coefficient(p: MirrorOscillatorParams, units: UnitSystem = NATURAL) -> float:
    """Position-diffusion coefficient D1 = hbar Gamma / (M Omega)."""
    return units.hbar * damping_rate(p, units) / (p.M * p.Omega)


def decoherence_time(p: MirrorOscillatorParams, units: UnitSystem = NATURAL) -> float:
    """Decoherence time of a two-component momentum superposition separated by 2*P0.

    Computed from the diffusion coefficient and cross-checked against the
    coherent-state-width form 4 (dp / 2 P0)^2 / Gamma.
    """
    if p.P0 == 0:
        raise DomainError("P0 = 0: superposition components coincide, decoherence time is infinite")
    hbar = units.hbar
    gamma = damping_rate(p, units)
    d1 = hbar * gamma / (p.M * p.Omega)
    t_d = hbar**2 / (2.0 * p.P0**2 * d1)
    dp = math.sqrt(p.M * hbar * p.Omega / 2.0)
    t_alt = 4.0 * (dp / (2.0 * p.P0)) ** 2 / gamma
    if not math.isclose(t_d, t_alt, rel_tol=1e-12):
        raise NumericError(f"decoherence routes disagree: {t_d!r} vs {t_alt!r}")
    if p.Omega * t_d < 10:
        warnings.warn(f"Omega*t_d = {p.Omega * t_d:.3g}: the Omega t_d >> 1 assumption fails", PhysicsWarning,
                      stacklevel=2)
    return t_d
