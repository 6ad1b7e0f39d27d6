"""Zero-temperature, non-retarded quantum friction between identical dielectric plates.

Force per unit area on plates separated by d and sheared at speed v:

    F_x = (hbar / 4 pi^3) int_{-pi/2}^{pi/2} dtheta cos(theta)
              int_0^inf dk k^2 exp(-2 k d) I(k v cos theta),
    I(W) = int_0^W S(w) S(W - w) dw,   S = Im[(eps - 1) / (eps + 1)].

Only k_x = k cos(theta) > 0 contributes; for k_x <= 0 the frequency window is empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, interpolate, special

from .domain import NATURAL, UnitSystem
from .errors import DomainError, NumericError

THETA_NODES = 48
_GL_X, _GL_W = special.roots_legendre(THETA_NODES)


class ModelKind(str, Enum):
    DRUDE = "Drude"
    LORENTZ = "Lorentz"
    TABULATED = "Tabulated"


@dataclass(frozen=True)
class DielectricModel:
    """Complex permittivity eps(w) for w >= 0.

    Drude: 1 - wp^2 / (w (w + i gamma)).
    Lorentz: 1 + wp^2 / (w0^2 - w^2 - i gamma w).
    Tabulated: linear interpolation of (omega, eps) samples.
    """

    kind: ModelKind
    wp: float = 0.0
    gamma: float = 0.0
    w0: float = 0.0
    table: tuple | None = field(default=None, compare=False)

    @classmethod
    def drude(cls, wp: float, gamma: float) -> "DielectricModel":
        return cls(ModelKind.DRUDE, wp=wp, gamma=gamma)

    @classmethod
    def lorentz(cls, w0: float, wp: float, gamma: float) -> "DielectricModel":
        return cls(ModelKind.LORENTZ, wp=wp, gamma=gamma, w0=w0)

    @classmethod
    def tabulated(cls, omega, eps) -> "DielectricModel":
        return cls(ModelKind.TABULATED, table=(tuple(map(float, omega)), tuple(map(complex, eps))))

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.kind is ModelKind.TABULATED:
            if self.table is None:
                raise DomainError("Tabulated model needs (omega, eps) samples")
            w, e = (np.asarray(a) for a in self.table)
            if w.size < 2 or w.shape != e.shape or np.any(np.diff(w) <= 0) or w[0] < 0:
                raise DomainError("Tabulated omega grid must be non-negative and strictly increasing")
            bad = np.where((w > 0) & (e.imag < 0))[0]
            if bad.size:
                raise DomainError(f"passivity violated: Im eps < 0 at omega={w[bad[0]]!r}")
            # a sign change of Re(eps + 1) with no loss crosses the surface pole
            re = e.real + 1.0
            for i in np.where(np.sign(re[:-1]) * np.sign(re[1:]) <= 0)[0]:
                if e.imag[i] == 0 and e.imag[i + 1] == 0:
                    raise NumericError(f"eps = -1 pole crossed between omega={w[i]!r} and {w[i + 1]!r}")
            object.__setattr__(self, "_re", interpolate.interp1d(w, e.real, bounds_error=True))
            object.__setattr__(self, "_im", interpolate.interp1d(w, e.imag, bounds_error=True))
        else:
            if self.wp < 0 or self.gamma < 0 or self.w0 < 0:
                raise DomainError("model parameters must be >= 0 (gamma < 0 violates passivity)")

    @property
    def is_lossless(self) -> bool:
        if self.kind is ModelKind.TABULATED:
            return bool(np.all(np.asarray(self.table[1]).imag == 0))
        return self.gamma == 0 or self.wp == 0

    def eps(self, omega):
        w = np.asarray(omega, dtype=float)
        if np.any(w < 0):
            raise DomainError("eps(omega) is defined for omega >= 0")
        if self.kind is ModelKind.DRUDE:
            with np.errstate(divide="ignore", invalid="ignore"):
                return 1.0 - self.wp**2 / (w * (w + 1j * self.gamma))
        if self.kind is ModelKind.LORENTZ:
            return 1.0 + self.wp**2 / (self.w0**2 - w**2 - 1j * self.gamma * w)
        return self._re(w) + 1j * self._im(w)


def surface_response(model: DielectricModel, omega):
    """S(w) = Im[(eps - 1)/(eps + 1)], with S(0) = 0 (the w -> 0 limit for Drude)."""
    w = np.asarray(omega, dtype=float)
    if model.is_lossless:
        return np.zeros_like(w)
    e = model.eps(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.imag((e - 1.0) / (e + 1.0))
    return np.where(w == 0, 0.0, s)


def spectral_overlap(model: DielectricModel, W, epsrel: float = 1e-9):
    """I(W) = int_0^W S(w) S(W - w) dw, vectorised over W >= 0 via the symmetric half range."""
    W = np.atleast_1d(np.asarray(W, dtype=float))
    if model.is_lossless:
        return np.zeros_like(W)

    def integrand(u):
        return surface_response(model, W * u) * surface_response(model, W * (1.0 - u))

    val, err = integrate.quad_vec(integrand, 0.0, 0.5, epsrel=epsrel, epsabs=0.0, norm="max", limit=400)
    return 2.0 * W * val


@dataclass(frozen=True)
class FrictionScenario:
    model: DielectricModel
    d: float
    v: float

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("gap d must be > 0")
        if self.v < 0:
            raise DomainError("shear speed v must be >= 0")


def _k_cutoff(sc: FrictionScenario) -> float:
    """Smallest K beyond the peak where the theta = 0 integrand drops below 1e-12 of its maximum."""
    h = lambda k: k**2 * math.exp(-2.0 * k * sc.d) * float(spectral_overlap(sc.model, k * sc.v)[0])
    ks = np.geomspace(1e-3 / sc.d, 200.0 / sc.d, 400)
    vals = np.array([h(k) for k in ks])
    peak = vals.max()
    if peak == 0:
        return float(ks[-1])
    ipk = int(np.argmax(vals))
    below = np.where(vals[ipk:] < 1e-12 * peak)[0]
    if below.size == 0:
        raise NumericError(f"integrand still above 1e-12 of peak at k = {ks[-1]:.3g}; K_cut not found")
    return float(ks[ipk + below[0]])


@dataclass(frozen=True)
class FrictionResult:
    force: float
    k_cut: float
    abserr: float
    evaluations: int


def friction_force(sc: FrictionScenario, units: UnitSystem = NATURAL, rtol: float = 1e-6,
                   detail: bool = False) -> float | FrictionResult:
    """Friction force per unit area along the shear direction."""
    if sc.v == 0 or sc.model.is_lossless:
        return FrictionResult(0.0, 0.0, 0.0, 0) if detail else 0.0
    theta = 0.5 * math.pi * _GL_X
    cos_t = np.cos(theta)
    wts = 0.5 * math.pi * _GL_W
    k_cut = _k_cutoff(sc)
    calls = 0

    def over_theta(k: float) -> float:
        nonlocal calls
        calls += 1
        I = spectral_overlap(sc.model, k * sc.v * cos_t, epsrel=rtol * 1e-3)
        return k * k * math.exp(-2.0 * k * sc.d) * float(np.dot(wts, cos_t * I))

    k_peak = 2.5 / sc.d
    pts = [p for p in (k_peak,) if p < k_cut]
    val, err, info = integrate.quad(over_theta, 0.0, k_cut, points=pts, epsabs=0.0, epsrel=rtol * 1e-2,
                                    limit=200, full_output=True)[:3]
    if err > rtol * abs(val):
        raise NumericError(f"k-integral did not converge: value {val:.6g}, error estimate {err:.3g}, "
                           f"{info['last']} subintervals on [0, {k_cut:.3g}]")
    force = units.hbar * val / (4.0 * math.pi**3)
    if detail:
        return FrictionResult(force, k_cut, units.hbar * err / (4.0 * math.pi**3), calls)
    return force


def friction_force_mc(sc: FrictionScenario, samples: int = 2_000_000, seed: int = 12345, chunks: int = 8,
                      units: UnitSystem = NATURAL) -> tuple[float, float]:
    """Monte-Carlo estimate of the same integral and its standard error.

    k is drawn from Gamma(6, 1/(2d)), which matches k^5 exp(-2kd); theta and the
    frequency split are uniform. Each chunk has its own spawned stream so the
    result does not depend on how chunks are scheduled.
    """
    if sc.v == 0 or sc.model.is_lossless:
        return 0.0, 0.0
    streams = np.random.SeedSequence(seed).spawn(chunks)
    per = samples // chunks
    total, total_sq, n = 0.0, 0.0, 0
    for ss in streams:
        rng = np.random.default_rng(ss)
        th = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, per)
        k = rng.gamma(6.0, 1.0 / (2.0 * sc.d), per)
        u = rng.uniform(0.0, 1.0, per)
        W = k * sc.v * np.cos(th)
        f = np.cos(th) * k**2 * np.exp(-2.0 * k * sc.d) * W \
            * surface_response(sc.model, W * u) * surface_response(sc.model, W * (1.0 - u))
        pdf = (1.0 / math.pi) * np.exp(special.xlogy(5.0, k) - 2.0 * k * sc.d + 6.0 * math.log(2.0 * sc.d)) / 120.0
        x = f / pdf
        total += x.sum()
        total_sq += (x * x).sum()
        n += per
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    scale = units.hbar / (4.0 * math.pi**3)
    return scale * mean, scale * math.sqrt(var / n)


def low_velocity_force(model: DielectricModel, d: float, v: float, units: UnitSystem = NATURAL) -> float:
    """Drude asymptote for k v << gamma, where S(w) ~ 2 gamma w / wp^2."""
    if model.kind is not ModelKind.DRUDE:
        raise DomainError("low-velocity asymptote is derived for the Drude model")
    c = 2.0 * model.gamma / model.wp**2
    # I(W) = c^2 W^3 / 6; int cos^4 = 3 pi / 8; int k^5 e^{-2kd} = 120 / (2d)^6
    return units.hbar / (4.0 * math.pi**3) * c * c * v**3 / 6.0 * (3.0 * math.pi / 8.0) * 120.0 / (2.0 * d) ** 6


def velocity_exponent(model: DielectricModel, d: float, vs, units: UnitSystem = NATURAL) -> float:
    """Fitted slope of log F_x against log v (reported, not asserted against any law)."""
    vs = np.asarray(vs, dtype=float)
    F = np.array([friction_force(FrictionScenario(model, d, v), units) for v in vs])
    if np.any(F <= 0):
        raise NumericError("velocity fit needs positive forces")
    return float(np.polyfit(np.log(vs), np.log(F), 1)[0])


# Perturbative transition picture ------------------------------------------------


def beta_squared(model: DielectricModel, k: float, omega: float, dN_domega: float = 1.0,
                 units: UnitSystem = NATURAL) -> float:
    """Oscillator coupling beta^2 = (dN/dw)^{-1} (4 k w eps0 / pi) S(w)."""
    return 4.0 * k * omega * units.eps0 / math.pi * float(surface_response(model, omega)) / dN_domega


def _pair_prefactor(sc: FrictionScenario, k: float, omega_u: float, omega_l: float, dN_u: float, dN_l: float,
                    units: UnitSystem) -> float:
    b2u = beta_squared(sc.model, k, omega_u, dN_u, units)
    b2l = beta_squared(sc.model, k, omega_l, dN_l, units)
    return b2u * b2l / (4.0 * k * k * units.eps0**2) * math.exp(-2.0 * sc.d * k) / (4.0 * omega_u * omega_l)


def transition_probability(sc: FrictionScenario, k_vec, omega_u: float, omega_l: float, t, dN_u: float = 1.0,
                           dN_l: float = 1.0, units: UnitSystem = NATURAL):
    """First-order probability of exciting the pair (k, j) on the upper and (-k, j') on the lower plate."""
    kx, ky = k_vec
    k = math.hypot(kx, ky)
    if k == 0:
        raise DomainError("k = 0 has no evanescent coupling")
    pref = _pair_prefactor(sc, k, omega_u, omega_l, dN_u, dN_l, units)
    delta = omega_u + omega_l - kx * sc.v
    t = np.asarray(t, dtype=float)
    # sin^2(x t / 2) / (x / 2)^2 written with sinc to stay finite at x = 0
    kernel = t * t * np.sinc(delta * t / (2.0 * math.pi)) ** 2
    return pref * kernel


def transition_rate(sc: FrictionScenario, k_vec, omega_u: float, omega_l: float, dN_u: float = 1.0,
                    dN_l: float = 1.0, units: UnitSystem = NATURAL) -> float:
    """Coefficient r in dP/dt = r delta(w_u + w_l - k_x v), using the pi t delta(x) long-time kernel."""
    kx, ky = k_vec
    return math.pi * _pair_prefactor(sc, math.hypot(kx, ky), omega_u, omega_l, dN_u, dN_l, units)
