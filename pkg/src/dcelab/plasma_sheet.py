"""Time-dependent conducting sheet at the midpoint of a rectangular cavity.

The sheet is a delta potential V(t) delta(x - Lx/2) with
V(t) = V0 + (Vmax - V0) f(t), f a periodic pulse train. Modes that are
symmetric about the sheet have x-wavenumbers solving

    2 k cot(k Lx / 2) = -V,

whose m-th root lies in ((2m - 1) pi / Lx, 2 m pi / Lx] for V >= 0. Modes with
a node at the sheet do not feel it and are not modelled.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .cavity3d import TAU_RES, ResonanceKind, ResonanceReport
from .domain import ModeIndex, Polarization, RectCavity
from .errors import DomainError, NumericError, PhysicsWarning


def _root_fn(V: float, Lx: float):
    # cot form multiplied through by sin(x) to stay finite on the whole bracket
    return lambda k: 2.0 * k * math.cos(0.5 * k * Lx) + V * math.sin(0.5 * k * Lx)


def sheet_residual(k: float, V: float, Lx: float) -> float:
    """|2k cos(kLx/2) + V sin(kLx/2)| / (2k + V), the scaled defining-equation residual."""
    return abs(_root_fn(V, Lx)(k)) / (2.0 * k + V)


def sheet_wavenumbers(V: float, Lx: float, count: int) -> np.ndarray:
    """First ``count`` symmetric-mode wavenumbers for sheet strength V >= 0.

    With x = k Lx / 2 = (m - 1/2) pi + d, the m-th root solves
    h(d) = 4 x sin d - V Lx cos d = 0 on [0, pi/2], where h(0) = -V Lx <= 0 and
    h(pi/2) = 4 m pi > 0 hold exactly, so the bracket never loses its sign change.
    """
    if V < 0:
        raise DomainError("sheet strength V must be >= 0")
    if not Lx > 0 or count < 1:
        raise DomainError("need Lx > 0 and count >= 1")
    out = np.empty(count)
    a = V * Lx
    for m in range(1, count + 1):
        base = (m - 0.5) * math.pi
        if V == 0.0:
            out[m - 1] = 2.0 * base / Lx
            continue
        h = lambda d: 4.0 * (base + d) * math.sin(d) - a * math.cos(d)
        d = optimize.brentq(h, 0.0, 0.5 * math.pi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        # one Newton polish; keep it only if it stays in the bracket and lowers |h|
        dh = 4.0 * math.sin(d) + 4.0 * (base + d) * math.cos(d) + a * math.sin(d)
        dn = d - h(d) / dh
        if 0.0 <= dn <= 0.5 * math.pi and abs(h(dn)) < abs(h(d)):
            d = dn
        k = 2.0 * (base + d) / Lx
        if sheet_residual(k, V, Lx) > 1e-12:
            raise NumericError(f"root {m} for V={V!r}, Lx={Lx!r} has residual {sheet_residual(k, V, Lx):.3g}")
        out[m - 1] = k
    return out


# Pulse train --------------------------------------------------------------


@dataclass(frozen=True)
class PulseShape:
    """Raised-cosine rise over [0, tau_e] to f = 1, then exponential relaxation.

    The relaxation exp(-(t - tau_e)/tau_r) is shifted and rescaled so that
    f(T) = 0 and f(tau_e) = 1; the shape repeats with period T.
    """

    T: float
    tau_e: float
    tau_r: float

    def __post_init__(self):
        if not (0 < self.tau_e < self.T and self.tau_r > 0):
            raise DomainError("pulse needs 0 < tau_e < T and tau_r > 0")

    def __call__(self, t):
        t = np.mod(np.asarray(t, dtype=float), self.T)
        rise = 0.5 * (1.0 - np.cos(math.pi * t / self.tau_e))
        tail_end = math.exp(-(self.T - self.tau_e) / self.tau_r)
        decay = (np.exp(-(t - self.tau_e) / self.tau_r) - tail_end) / (1.0 - tail_end)
        return np.where(t <= self.tau_e, rise, decay)

    def harmonic(self, j: int) -> float:
        """Amplitude sqrt(a_j^2 + b_j^2) of the component at Omega_j = 2 pi j / T."""
        if j < 1:
            raise DomainError("harmonic index j must be >= 1")
        W = 2.0 * math.pi * j / self.T
        opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
        parts = [(0.0, self.tau_e), (self.tau_e, self.T)]
        a = sum(integrate.quad(lambda t: float(self(t)), lo, hi, weight="cos", wvar=W, **opts)[0] for lo, hi in parts)
        b = sum(integrate.quad(lambda t: float(self(t)), lo, hi, weight="sin", wvar=W, **opts)[0] for lo, hi in parts)
        return 2.0 / self.T * math.hypot(a, b)

    def scaled(self, s: float) -> "PulseShape":
        return PulseShape(self.T * s, self.tau_e * s, self.tau_r * s)


@dataclass(frozen=True)
class SheetModel:
    V0: float
    Vmax: float
    pulse: PulseShape

    def __post_init__(self):
        if not self.V0 > 0:
            raise DomainError("V0 must be > 0")
        if not self.Vmax > self.V0:
            raise DomainError("Vmax must exceed V0")

    def perturbative(self, Lx: float) -> bool:
        """V0 Lx >> Vmax/V0 > 1, with '>>' read as a factor of at least 10."""
        r = self.Vmax / self.V0
        return self.V0 * Lx >= 10.0 * r and r > 1.0

    def V(self, t):
        return self.V0 + (self.Vmax - self.V0) * self.pulse(t)


@dataclass(frozen=True)
class SheetSpectrum:
    geom: RectCavity
    V: float
    k: np.ndarray

    def omega(self, m: ModeIndex) -> float:
        if m.nx < 1 or m.nx > self.k.size:
            raise DomainError(f"{m}: x-index outside the solved range 1..{self.k.size}")
        if m.ny < 1 or m.nz < 1:
            raise DomainError(f"{m}: ny, nz must be >= 1")
        return math.sqrt(self.k[m.nx - 1] ** 2 + (math.pi * m.ny / self.geom.Ly) ** 2
                         + (math.pi * m.nz / self.geom.Lz) ** 2)


def sheet_spectrum(geom: RectCavity, V: float, count: int) -> SheetSpectrum:
    return SheetSpectrum(geom, V, sheet_wavenumbers(V, geom.Lx, count))


def modulation_depth(model: SheetModel, Lx: float, n: int) -> float:
    """eps_n = (Vmax - V0) / (Lx k_n^2 + V0 (1 + V0 Lx / 4)) with k_n the n-th root at V0."""
    if not model.perturbative(Lx):
        warnings.warn(f"V0*Lx = {model.V0 * Lx:.3g} vs Vmax/V0 = {model.Vmax / model.V0:.3g}: "
                      "linearised modulation is not reliable", PhysicsWarning, stacklevel=2)
    k0 = sheet_wavenumbers(model.V0, Lx, n)[-1]
    return (model.Vmax - model.V0) / (Lx * k0 * k0 + model.V0 * (1.0 + 0.25 * model.V0 * Lx))


def wavenumber_evaluator(model: SheetModel, Lx: float, n: int):
    """k_n(t) = k_n^0 (1 + eps_n f(t))."""
    k0 = sheet_wavenumbers(model.V0, Lx, n)[-1]
    eps = modulation_depth(model, Lx, n)
    return lambda t: k0 * (1.0 + eps * model.pulse(t))


def resonance_check_sheet(model: SheetModel, geom: RectCavity, j: int, search_bound: int = 6,
                          harmonic_bound: int | None = None, tol: float = TAU_RES) -> ResonanceReport:
    """Modes with Omega_j = 2 w_n, plus partners linked by |w_n +- w_n'| = Omega_j' for any harmonic j'.

    Partners share (ny, nz) since the sheet only mixes x-profiles.
    """
    Om1 = 2.0 * math.pi / model.pulse.T
    Om = j * Om1
    spec = sheet_spectrum(geom, model.V0, search_bound)
    modes = [ModeIndex(Polarization.SCALAR, *idx) for idx in itertools.product(range(1, search_bound + 1), repeat=3)]
    w = {m: spec.omega(m) for m in modes}
    resonant = tuple(m for m in modes if abs(2.0 * w[m] - Om) <= tol * Om)
    jmax = harmonic_bound or 4 * j
    pairs = []
    for r in resonant:
        for m in modes:
            if m == r or (m.ny, m.nz) != (r.ny, r.nz):
                continue
            for x in (w[r] + w[m], abs(w[r] - w[m])):
                jj = round(x / Om1)
                if 1 <= jj <= jmax and abs(x - jj * Om1) <= tol * x:
                    pairs.append(tuple(sorted((r, m))))
    pairs = tuple(sorted(set(pairs)))
    kind = ResonanceKind.COUPLED if pairs else ResonanceKind.UNCOUPLED if resonant else ResonanceKind.OFF
    return ResonanceReport(kind, resonant, pairs)


def sheet_photon_number(model: SheetModel, geom: RectCavity, n: ModeIndex, j: int, t, search_bound: int = 6,
                        tol: float = TAU_RES):
    """sinh^2((k_n^0)^2 f_j eps_n t / Omega_j) for an uncoupled resonant mode."""
    Om = 2.0 * math.pi * j / model.pulse.T
    bound = max(search_bound, n.nx, n.ny, n.nz)
    rep = resonance_check_sheet(model, geom, j, bound, tol=tol)
    if n not in rep.resonant:
        w = sheet_spectrum(geom, model.V0, bound).omega(n)
        raise DomainError(f"{n} is off resonance: Omega_{j} = {Om!r}, 2w = {2 * w!r}")
    partners = [q if p == n else p for p, q in rep.coupled_pairs if n in (p, q)]
    if partners:
        raise DomainError(f"{n} is coupled to {', '.join(map(str, partners))}")
    k0 = sheet_wavenumbers(model.V0, geom.Lx, n.nx)[-1]
    eps = modulation_depth(model, geom.Lx, n.nx)
    fj = model.pulse.harmonic(j)
    return np.sinh(k0 * k0 * fj * eps * np.asarray(t, dtype=float) / Om) ** 2


def resonant_period(geom: RectCavity, V0: float, n: ModeIndex, j: int = 1) -> float:
    """Pulse period T with Omega_j = 2 pi j / T = 2 w_n."""
    w = sheet_spectrum(geom, V0, n.nx).omega(n)
    return math.pi * j / w


def length_for_frequency(Lx: float, Ly: float, V0: float, omega: float, n: ModeIndex = ModeIndex.of(1, 1, 1)) -> float:
    """Lz giving w_n = omega for the sheet mode n."""
    kx = sheet_wavenumbers(V0, Lx, n.nx)[-1]
    rest = omega**2 - kx**2 - (math.pi * n.ny / Ly) ** 2
    if rest <= 0:
        raise DomainError(f"omega={omega!r} is below the (nx, ny) cutoff; no Lz works")
    return math.pi * n.nz / math.sqrt(rest)
