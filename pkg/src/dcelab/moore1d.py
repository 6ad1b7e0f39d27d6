"""One-dimensional cavity with an oscillating mirror, via Moore's function R(t).

The field modes in a Dirichlet cavity [0, L(t)] are fixed by a single
function R satisfying R(t + L(t)) - R(t - L(t)) = 2 with R(t) = t/L0 on
[-L0, L0]. Two evaluators are provided: the RG-improved closed form for
harmonic motion at Omega = q pi / L0, and a numeric backward-characteristic
solver for arbitrary continuous L(t).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, signal

from .domain import MotionForm, MotionProfile
from .errors import DomainError, NumericError, PhysicsWarning, PreconditionError

RG_HORIZON_WARN = 0.3
_NEWTON_MAXITER = 80


class Provenance(str, Enum):
    RG = "RG"
    NUMERIC = "Numeric"


def _rg_derivs(q: int, eps: float, L0: float, t):
    t = np.asarray(t, dtype=float)
    om = q * math.pi / L0
    s = (-1) ** (q + 1) * math.pi * q * eps / L0
    tt = np.maximum(t, 0.0)
    E = np.exp(1j * om * tt)
    u = np.exp(s * tt)
    # z = u + 1 + (1 - u) E, derivatives by Leibniz on (1 - u) E
    w_d = [1.0 - u, -s * u, -s**2 * u, -s**3 * u]
    E_d = [E * (1j * om) ** k for k in range(4)]
    u_d = [u, s * u, s**2 * u, s**3 * u]
    z = [u_d[k] + sum(math.comb(k, j) * w_d[j] * E_d[k - j] for j in range(k + 1)) for k in range(4)]
    z[0] = z[0] + 1.0
    z0, z1, z2, z3 = z
    pref = 2.0 / (math.pi * q)
    R = tt / L0 - pref * np.angle(z0)
    R1 = 1.0 / L0 - pref * np.imag(z1 / z0)
    R2 = -pref * np.imag((z2 * z0 - z1**2) / z0**2)
    R3 = -pref * np.imag(z3 / z0 - 3.0 * z2 * z1 / z0**2 + 2.0 * z1**3 / z0**3)
    before = t < 0
    R = np.where(before, t / L0, R)
    R1 = np.where(before, 1.0 / L0, R1)
    R2 = np.where(before, 0.0, R2)
    R3 = np.where(before, 0.0, R3)
    return R, R1, R2, R3


def _solve_foot(profile: MotionProfile, tau: np.ndarray, L_lo: float, L_hi: float) -> np.ndarray:
    """Solve t + L(t) = tau for t; g is strictly increasing when |L'| < 1."""
    lo = tau - L_hi
    hi = tau - L_lo
    t = np.clip(tau - profile.L0, lo, hi)
    scale = np.maximum(1.0, np.abs(tau))
    for _ in range(_NEWTON_MAXITER):
        L, L1, _, _ = profile.length_derivs(t)
        g = t + L - tau
        done = np.abs(g) <= 1e-15 * scale
        if np.all(done):
            return t
        lo = np.where(g < 0, t, lo)
        hi = np.where(g > 0, t, hi)
        step = t - g / (1.0 + L1)
        bad = (step <= lo) | (step >= hi)
        t = np.where(done, t, np.where(bad, 0.5 * (lo + hi), step))
    L = profile.length(t)
    resid = np.abs(t + L - tau)
    if np.any(resid > 1e-12 * scale):
        k = int(np.argmax(resid))
        raise NumericError(f"foot solve failed at tau={tau[k]!r}: bracket [{lo[k]!r}, {hi[k]!r}], residual {resid[k]:.3g}")
    return t


def _length_bounds(profile: MotionProfile) -> tuple[float, float]:
    if profile.form is MotionForm.TABULATED:
        Ls = profile.length(np.linspace(profile.t_start, profile.t_end, 20001))
        lo, hi = min(float(Ls.min()), profile.L0), max(float(Ls.max()), profile.L0)
    else:
        lo, hi = profile.L0 * (1 - profile.eps), profile.L0 * (1 + profile.eps)
    # margin keeps the bracket strict when L touches its extremes
    return lo * (1 - 1e-9) - 1e-12, hi * (1 + 1e-9) + 1e-12


def _numeric_derivs(profile: MotionProfile, t_max: float, t):
    t = np.asarray(t, dtype=float)
    if np.any(t > t_max * (1 + 1e-12)):
        raise DomainError(f"R requested beyond the solved horizon t_max={t_max}")
    L0 = profile.L0
    L_lo, L_hi = _length_bounds(profile)

    tau = t.ravel().copy()
    shift = np.zeros_like(tau)
    chain = []
    # walk every point down its characteristic until it lands in the seed window
    while True:
        active = tau > L0
        if not np.any(active):
            break
        ta = tau[active]
        foot = _solve_foot(profile, ta, L_lo, L_hi)
        _, a, b, c = profile.length_derivs(foot)
        d = 1.0 + a
        t1 = 1.0 / d
        t2 = -b / d**3
        t3 = -c / d**4 + 3.0 * b**2 / d**5
        s1 = 1.0 - 2.0 * a * t1
        s2 = -2.0 * (b * t1**2 + a * t2)
        s3 = -2.0 * (c * t1**3 + 3.0 * b * t1 * t2 + a * t3)
        chain.append((active, s1, s2, s3))
        tau[active] = foot - profile.length(foot)
        shift[active] += 2.0

    R = tau / L0 + shift
    R1 = np.full_like(tau, 1.0 / L0)
    R2 = np.zeros_like(tau)
    R3 = np.zeros_like(tau)
    for active, s1, s2, s3 in reversed(chain):
        r1, r2, r3 = R1[active], R2[active], R3[active]
        R1[active] = r1 * s1
        R2[active] = r2 * s1**2 + r1 * s2
        R3[active] = r3 * s1**3 + 3.0 * r2 * s1 * s2 + r1 * s3
    shape = t.shape
    return R.reshape(shape), R1.reshape(shape), R2.reshape(shape), R3.reshape(shape)


@dataclass(frozen=True)
class MooreSolution:
    """Evaluator for Moore's function and its first three derivatives."""

    provenance: Provenance
    L0: float
    q: int | None = None
    eps: float = 0.0
    profile: MotionProfile | None = field(default=None, compare=False)
    t_max: float = math.inf

    def derivs(self, t):
        """(R, R', R'', R''') at t (scalar or array)."""
        if self.provenance is Provenance.RG:
            out = _rg_derivs(self.q, self.eps, self.L0, t)
        else:
            out = _numeric_derivs(self.profile, self.t_max, t)
        if np.ndim(t) == 0:
            return tuple(float(v) for v in out)
        return out

    def R(self, t):
        return self.derivs(t)[0]

    def length(self, t):
        if self.profile is not None:
            return self.profile.length(t)
        return self.L0 * (1.0 + self.eps * np.sin(self.q * math.pi / self.L0 * np.maximum(t, 0.0)) * (np.asarray(t) >= 0))

    def moore_residual(self, t):
        """R(t + L(t)) - R(t - L(t)) - 2."""
        t = np.asarray(t, dtype=float)
        L = self.length(t)
        return self.R(t + L) - self.R(t - L) - 2.0


def harmonic_profile(q: int, eps: float, L0: float = 1.0) -> MotionProfile:
    """L(t) = L0 (1 + eps sin(q pi t / L0)) for t >= 0."""
    return MotionProfile(eps=eps, Omega=q * math.pi / L0, L0=L0, form=MotionForm.HARMONIC_LENGTH)


def moore_rg(q: int, eps: float, L0: float = 1.0, t_horizon: float | None = None) -> MooreSolution:
    """RG-improved closed form for L(t) = L0 (1 + eps sin(q pi t / L0))."""
    if int(q) != q or q < 1:
        raise DomainError(f"q must be a positive integer, got {q!r}")
    if eps < 0 or eps > 0.1:
        raise PreconditionError(f"eps={eps} outside [0, 0.1]")
    if t_horizon is not None:
        horizon = eps**2 * (q * math.pi / L0) * t_horizon
        if horizon > RG_HORIZON_WARN:
            warnings.warn(f"eps^2 Omega t = {horizon:.3g} exceeds {RG_HORIZON_WARN}; RG form unreliable",
                          PhysicsWarning, stacklevel=2)
    return MooreSolution(Provenance.RG, L0=L0, q=int(q), eps=eps)


def moore_numeric(profile: MotionProfile, t_max: float) -> MooreSolution:
    """Backward-characteristic solver for R(t), t <= t_max."""
    if not profile.is_continuous():
        raise PreconditionError("L(t) must be continuous; choose t_end at a zero of the modulation")
    if profile.max_wall_speed() >= 1.0:
        raise PreconditionError(f"wall speed {profile.max_wall_speed():.3g} >= c: characteristics cross")
    q = None
    if profile.form is MotionForm.HARMONIC_LENGTH:
        ratio = profile.Omega * profile.L0 / math.pi
        q = int(round(ratio)) if abs(ratio - round(ratio)) < 1e-12 else None
    return MooreSolution(Provenance.NUMERIC, L0=profile.L0, q=q, eps=profile.eps, profile=profile, t_max=t_max)


# Energy density ------------------------------------------------------------


def f_density(sol: MooreSolution, u):
    """f(u) = (1/24 pi) [R'''/R' - 3/2 (R''/R')^2 + pi^2/2 R'^2]."""
    _, R1, R2, R3 = sol.derivs(u)
    if np.any(np.asarray(R1) <= 0):
        raise NumericError("R' <= 0: solution is not monotone")
    return (R3 / R1 - 1.5 * (R2 / R1) ** 2 + 0.5 * math.pi**2 * R1**2) / (24.0 * math.pi)


def static_energy_density(L0: float) -> float:
    return -math.pi / (24.0 * L0**2)


@dataclass(frozen=True)
class EnergyDensityProfile:
    t: float
    x: np.ndarray
    values: np.ndarray

    def peaks(self, prominence_frac: float = 0.1) -> np.ndarray:
        """Indices of maxima whose prominence is at least ``prominence_frac`` of the profile's range."""
        v = self.values
        span = float(np.max(v) - np.min(v))
        if span == 0.0:
            return np.array([], dtype=int)
        idx, _ = signal.find_peaks(v, prominence=prominence_frac * span)
        return idx


def energy_density(sol: MooreSolution, x, t: float):
    """<T00(x, t)> = -f(t + x) - f(t - x)."""
    x = np.asarray(x, dtype=float)
    L = float(sol.length(t))
    if np.any(x < -1e-12 * L) or np.any(x > L * (1 + 1e-12)):
        raise DomainError(f"x must lie in [0, L(t)] = [0, {L}]")
    return -f_density(sol, t + x) - f_density(sol, t - x)


def energy_profile(sol: MooreSolution, t: float, n: int = 4001) -> EnergyDensityProfile:
    L = float(sol.length(t))
    x = np.linspace(0.0, L, n)
    return EnergyDensityProfile(t=t, x=x, values=energy_density(sol, x, t))


def intracavity_energy(sol: MooreSolution, t: float, rtol: float = 1e-6) -> float:
    """Field energy inside the cavity relative to the static Casimir energy -pi/(24 L0).

    Uses the identity int_0^L T00 dx = -int_{t-L}^{t+L} f(u) du and splits the
    range at the peaks of f so each panel holds at most one narrow pulse.
    """
    L = float(sol.length(t))
    a, b = t - L, t + L
    grid = np.linspace(a, b, 8001)
    fg = f_density(sol, grid)
    idx, _ = signal.find_peaks(np.abs(fg - fg.mean()))
    breaks = np.concatenate(([a], grid[idx], [b]))
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        val, err, info = integrate.quad(lambda u: float(f_density(sol, u)), lo, hi, epsabs=0.0, epsrel=rtol * 1e-2,
                                        limit=200, full_output=True)[:3]
        if err > rtol * max(abs(val), 1e-300) and err > 1e-14:
            raise NumericError(f"panel [{lo:.6g}, {hi:.6g}] did not converge: value {val:.6g}, error {err:.3g}")
        total += val
    return -total + math.pi / (24.0 * sol.L0)


def mirror_force(sol: MooreSolution, t: float) -> float:
    """Pressure on the moving mirror, <T00(L(t), t)>; the outside field is neglected."""
    if t < 0:
        return static_energy_density(sol.L0)
    L = float(sol.length(t))
    return float(-f_density(sol, t + L) - f_density(sol, t - L))


def jump_times(sol: MooreSolution, t0: float, t1: float, n: int = 200001) -> np.ndarray:
    """Locations of the steepest rise of R (maxima of R') in [t0, t1], refined by parabolic fit."""
    t = np.linspace(t0, t1, n)
    _, R1, _, _ = sol.derivs(t)
    idx, _ = signal.find_peaks(R1, prominence=0.5 * (np.max(R1) - np.min(R1)))
    h = t[1] - t[0]
    out = []
    for i in idx:
        y0, y1, y2 = R1[i - 1], R1[i], R1[i + 1]
        denom = y0 - 2 * y1 + y2
        out.append(t[i] + (0.5 * h * (y0 - y2) / denom if denom != 0 else 0.0))
    return np.array(out)
