"""Parametric photon creation in 3D cavities with one oscillating end wall.

The field is expanded in the instantaneous eigenbasis of the cavity with
length L(t) = Lz (1 + eps sin Omega t). To first order in eps each mode
amplitude obeys a driven oscillator equation

    Q_m'' + w_m^2 Q_m = eps sum_j [sin(Omega t) a_mj Q_j + cos(Omega t) b_mj Q_j'],

where (a, b) depend on the polarization family and couple only modes that
share their transverse indices. The same (a, b) feed three solvers: direct
integration of the driven system, the averaged slow-amplitude (MSA)
equations and the single-mode Mathieu reference.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, linalg, optimize

from .domain import (
    CavityGeometry,
    CircCavity,
    ModeIndex,
    MotionProfile,
    Polarization,
    axial_wavenumber,
    spectrum,
    validate_mode,
)
from .errors import DomainError, NumericError, PhysicsWarning, PreconditionError

TAU_RES = 1e-9


def coupling_g(mz: int, jz: int) -> float:
    """Dimensionless coupling g_mj = Lz int_0^Lz (d phi_m / d Lz) phi_j dz for Dirichlet z-modes."""
    if mz < 1 or jz < 1:
        raise DomainError("coupling_g needs mz, jz >= 1")
    if mz == jz:
        return 0.0
    return (-1) ** (mz + jz) * 2.0 * mz * jz / (jz * jz - mz * mz)


def _channel(m: ModeIndex) -> tuple:
    return (m.pol, m.nx, m.ny)


# Forcing matrices -----------------------------------------------------------


@dataclass(frozen=True)
class ForcingTerms:
    """Coefficients of the first-order driven equations over an ordered mode set.

    ``G`` is the antisymmetric matrix entering the canonical momentum
    P = Q' - (L'/L) G Q; it is zero for families whose velocity coupling is
    symmetric (TM), where P = Q' whenever L = Lz.
    """

    modes: tuple
    omega: np.ndarray
    kz: np.ndarray
    a: np.ndarray
    b: np.ndarray
    G: np.ndarray


def _tm_weight(nz: int, zero_mode_factor: float) -> float:
    if nz == 0:
        return math.sqrt(zero_mode_factor)
    return math.sqrt(2.0) * (-1) ** nz


def forcing_terms(geom: CavityGeometry, modes: Sequence[ModeIndex], Omega: float,
                  zero_mode_factor: float = 2.0) -> ForcingTerms:
    """Build (a, b, G) for ``modes``.

    Scalar and TE families use Dirichlet axial functions:
    a_mm = 2 kz_m^2, a_mj = -Omega^2 g_mj, b_mj = 2 Omega g_mj.
    TM families use Neumann axial functions with weights w_n = sqrt(2) (-1)^nz:
    a_mj = w_m w_j kz_j^2, b_mj = -Omega w_m w_j. ``zero_mode_factor`` sets w_0^2;
    2 reproduces the conventional growth rates, 1 is the unit-normalised
    constant axial function.
    """
    modes = tuple(modes)
    for m in modes:
        validate_mode(geom, m)
    if len(set(modes)) != len(modes):
        raise DomainError("duplicate modes in truncation set")
    n = len(modes)
    omega = np.array([spectrum(geom, m) for m in modes])
    kz = np.array([axial_wavenumber(geom, m) for m in modes])
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    G = np.zeros((n, n))
    for i, m in enumerate(modes):
        for j, k in enumerate(modes):
            if _channel(m) != _channel(k):
                continue
            if m.pol is Polarization.TM:
                w = _tm_weight(m.nz, zero_mode_factor) * _tm_weight(k.nz, zero_mode_factor)
                a[i, j] = w * kz[j] ** 2
                b[i, j] = -Omega * w
            elif i == j:
                a[i, i] = 2.0 * kz[i] ** 2
            else:
                g = coupling_g(m.nz, k.nz)
                G[i, j] = g
                a[i, j] = -Omega**2 * g
                b[i, j] = 2.0 * Omega * g
    return ForcingTerms(modes, omega, kz, a, b, G)


def _harmonic_profile_check(profile: MotionProfile) -> None:
    if profile.form.value != "HarmonicLength":
        raise PreconditionError("cavity solvers need a HarmonicLength motion profile")
    if profile.t_start != 0.0:
        raise PreconditionError("cavity solvers assume the motion starts at t = 0")
    profile.check_perturbative()


# Resonances -------------------------------------------------------------------


class ResonanceKind(str, Enum):
    UNCOUPLED = "Uncoupled"
    COUPLED = "CoupledSet"
    OFF = "OffResonance"


@dataclass(frozen=True)
class ResonanceReport:
    kind: ResonanceKind
    resonant: tuple
    coupled_pairs: tuple
    near_misses: tuple = ()

    def closure(self, seed: ModeIndex) -> tuple:
        """Modes connected to ``seed`` through coupled pairs (seed included), sorted."""
        seen = {seed}
        frontier = [seed]
        while frontier:
            cur = frontier.pop()
            for p, q in self.coupled_pairs:
                other = q if p == cur else p if q == cur else None
                if other is not None and other not in seen:
                    seen.add(other)
                    frontier.append(other)
        return tuple(sorted(seen))


def enumerate_modes(geom: CavityGeometry, pol: Polarization | str, bound: int) -> list[ModeIndex]:
    pol = Polarization(pol)
    out = []
    for nx, ny, nz in itertools.product(range(bound + 1), repeat=3):
        m = ModeIndex(pol, nx, ny, nz)
        try:
            validate_mode(geom, m)
        except DomainError:
            continue
        out.append(m)
    return out


def find_resonances(geom: CavityGeometry, Omega: float, pol: Polarization | str, search_bound: int = 8,
                    tol: float = TAU_RES) -> ResonanceReport:
    """Parametric resonances (Omega = 2 w_m) and intermode couplings (|w_m +- w_j| = Omega).

    Coupled pairs are reported only within components that create photons,
    i.e. those reachable from a resonant mode or a sum-frequency pair.
    """
    if not Omega > 0:
        raise DomainError("Omega must be > 0")
    modes = enumerate_modes(geom, pol, search_bound)
    w = {m: spectrum(geom, m) for m in modes}
    near = []

    def hit(x: float, label: str) -> bool:
        rel = abs(x - Omega) / Omega
        if rel <= tol:
            return True
        if rel <= 10 * tol:
            near.append(label)
            warnings.warn(f"near-miss resonance {label}: relative mismatch {rel:.3g}", PhysicsWarning, stacklevel=3)
        return False

    resonant = tuple(m for m in modes if hit(2.0 * w[m], f"2w{m}"))
    diff_pairs, sum_pairs = [], []
    for m, k in itertools.combinations(modes, 2):
        if _channel(m) != _channel(k):
            continue
        if hit(w[m] + w[k], f"w{m}+w{k}"):
            sum_pairs.append((m, k))
        elif hit(abs(w[m] - w[k]), f"|w{m}-w{k}|"):
            diff_pairs.append((m, k))
    # keep only the coupling components that contain a photon source;
    # difference links among unexcited modes only exchange quanta
    active = set(resonant) | {x for p in sum_pairs for x in p}
    pairs = list(sum_pairs)
    grown = True
    while grown:
        grown = False
        for p in diff_pairs:
            if p not in pairs and (p[0] in active or p[1] in active):
                pairs.append(p)
                active.update(p)
                grown = True
    pairs.sort()
    if pairs:
        kind = ResonanceKind.COUPLED
    elif resonant:
        kind = ResonanceKind.UNCOUPLED
    else:
        kind = ResonanceKind.OFF
    return ResonanceReport(kind, resonant, tuple(pairs), tuple(near))


def truncation_set(geom: CavityGeometry, core: Iterable[ModeIndex], extra: int = 2) -> tuple:
    """Per transverse channel, every valid axial index up to max(core nz) + extra."""
    channels: dict[tuple, int] = {}
    for m in core:
        key = _channel(m)
        channels[key] = max(channels.get(key, 0), m.nz)
    out = []
    for (pol, nx, ny), top in channels.items():
        for nz in range(0, top + extra + 1):
            m = ModeIndex(pol, nx, ny, nz)
            try:
                validate_mode(geom, m)
            except DomainError:
                continue
            out.append(m)
    return tuple(sorted(out))


# Direct integration ----------------------------------------------------------


@dataclass(frozen=True)
class ModeAmplitudeState:
    """Q_m^(n) and its canonical momentum at time ``t``; arrays are indexed [mode, seed]."""

    modes: tuple
    seeds: tuple
    omega: np.ndarray
    t: float
    Q: np.ndarray
    Qdot: np.ndarray
    P: np.ndarray
    moving: bool = False


def initial_amplitudes(omega: np.ndarray, seed_idx: Sequence[int]):
    n, s = omega.size, len(seed_idx)
    Q = np.zeros((n, s), dtype=complex)
    V = np.zeros((n, s), dtype=complex)
    for c, i in enumerate(seed_idx):
        Q[i, c] = 1.0 / math.sqrt(2.0 * omega[i])
        V[i, c] = -1j * math.sqrt(omega[i] / 2.0)
    return Q, V


def _resolve_seeds(modes: tuple, seeds) -> tuple:
    if seeds is None:
        return modes
    if isinstance(seeds, ModeIndex):
        seeds = (seeds,)
    seeds = tuple(seeds)
    for s in seeds:
        if s not in modes:
            raise PreconditionError(f"seed {s} is not in the truncation set")
    return seeds


def stop_time(Omega: float, t_final: float) -> float:
    """Nearest t >= 0 with sin(Omega t) = 0, so the wall is back at Lz."""
    return round(t_final * Omega / math.pi) * math.pi / Omega


def _step(rhs, y0: np.ndarray, t0: float, t1: float, rtol: float, atol: float) -> np.ndarray:
    if t1 == t0:
        return y0
    sol = integrate.solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericError(f"mode integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return sol.y[:, -1]


def integrate_terms(terms: ForcingTerms, eps: float, Omega: float, t_final: float, seeds=None,
                    rtol: float = 1e-10, atol: float = 1e-12, method: str = "floquet") -> ModeAmplitudeState:
    """Integrate the driven system from the vacuum seeds up to ``t_final``.

    ``floquet`` integrates one drive period for the monodromy matrix and
    raises it to the number of whole periods, then steps the remainder;
    ``direct`` steps the whole interval. Both solve the same linear system.
    """
    if method not in ("floquet", "direct"):
        raise DomainError(f"unknown method {method!r}")
    modes = terms.modes
    seeds = _resolve_seeds(modes, seeds)
    idx = [modes.index(s) for s in seeds]
    n, s = len(modes), len(idx)
    Q0, V0 = initial_amplitudes(terms.omega, idx)
    w2 = terms.omega[:, None] ** 2
    ea, eb = eps * terms.a, eps * terms.b

    def rhs_for(cols: int):
        def rhs(t, y):
            Y = y.reshape(2 * n, cols)
            Q, V = Y[:n], Y[n:]
            acc = -w2 * Q + math.sin(Omega * t) * (ea @ Q) + math.cos(Omega * t) * (eb @ V)
            return np.concatenate([V, acc]).ravel()
        return rhs

    Y0 = np.concatenate([Q0, V0])
    if eps == 0.0:
        # free evolution in closed form keeps beta exactly zero
        w = terms.omega[:, None]
        Q = Q0 * np.exp(-1j * w * t_final)
        V = -(1j * w) * Q
        return ModeAmplitudeState(modes, seeds, terms.omega, t_final, Q, V, V)
    period = 2.0 * math.pi / Omega
    cycles = int(math.floor(t_final / period + 1e-9)) if method == "floquet" else 0
    if cycles >= 2:
        ident = np.eye(2 * n, dtype=complex)
        mono = _step(rhs_for(2 * n), ident.ravel(), 0.0, period, rtol, atol).reshape(2 * n, 2 * n)
        Y = np.linalg.matrix_power(mono, cycles) @ Y0
        # the coefficients repeat every period, so the remainder starts again from t = 0
        rest = t_final - cycles * period
        Y = _step(rhs_for(s), Y.ravel(), 0.0, rest, rtol, atol).reshape(2 * n, s) if rest > 0 else Y
    else:
        Y = _step(rhs_for(s), Y0.ravel(), 0.0, t_final, rtol, atol).reshape(2 * n, s)
    Q, V = Y[:n], Y[n:]
    lam = eps * Omega * math.cos(Omega * t_final) / (1.0 + eps * math.sin(Omega * t_final))
    P = V - lam * (terms.G @ Q)
    return ModeAmplitudeState(modes, seeds, terms.omega, t_final, Q, V, P)


def integrate_modes(geom: CavityGeometry, profile: MotionProfile, truncation: Sequence[ModeIndex], t_final: float,
                    seeds=None, zero_mode_factor: float = 2.0, rtol: float = 1e-10,
                    method: str = "floquet") -> ModeAmplitudeState:
    """Integrate the first-order driven system with the wall stopped at the nearest L = Lz instant."""
    _harmonic_profile_check(profile)
    # a static wall needs no snapping and keeps the closed-form free evolution exact
    t_stop = t_final if profile.eps == 0 else stop_time(profile.Omega, min(t_final, profile.t_end))
    terms = forcing_terms(geom, truncation, profile.Omega, zero_mode_factor)
    state = integrate_terms(terms, profile.eps, profile.Omega, t_stop, seeds, rtol=rtol, method=method)
    if t_final > t_stop:
        state = free_evolve(state, t_final)
    return state


def free_evolve(state: ModeAmplitudeState, t: float) -> ModeAmplitudeState:
    """Advance a stopped-wall state: each mode rotates at its static frequency."""
    dt = t - state.t
    w = state.omega[:, None]
    c, s_ = np.cos(w * dt), np.sin(w * dt)
    Q = c * state.Q + s_ / w * state.P
    P = -w * s_ * state.Q + c * state.P
    return ModeAmplitudeState(state.modes, state.seeds, state.omega, t, Q, P, P)


@dataclass(frozen=True)
class Bogoliubov:
    """alpha[n, m] and beta[n, m] for seed n and output mode m."""

    seeds: tuple
    modes: tuple
    alpha: np.ndarray
    beta: np.ndarray

    def photon_numbers(self) -> np.ndarray:
        """<N_m> = sum_n |beta_nm|^2 (per output mode)."""
        return np.sum(np.abs(self.beta) ** 2, axis=0)

    def unitarity_defect(self) -> float:
        """max_n |sum_m (|alpha_nm|^2 - |beta_nm|^2) - 1|."""
        rows = np.sum(np.abs(self.alpha) ** 2 - np.abs(self.beta) ** 2, axis=1)
        return float(np.max(np.abs(rows - 1.0)))


def amplitudes_from_state(state: ModeAmplitudeState) -> tuple[np.ndarray, np.ndarray]:
    """(A, B) of the decomposition Q = A e^{iwt} + B e^{-iwt}, indexed [mode, seed]."""
    iw = 1j * state.omega[:, None]
    ph = np.exp(iw * state.t)
    A = (iw * state.Q + state.P) / (2.0 * iw * ph)
    B = ph * (iw * state.Q - state.P) / (2.0 * iw)
    return A, B


def extract_bogoliubov(state: ModeAmplitudeState) -> Bogoliubov:
    if state.moving:
        raise PreconditionError("Bogoliubov coefficients need the wall at rest")
    A, B = amplitudes_from_state(state)
    root = np.sqrt(2.0 * state.omega[:, None])
    return Bogoliubov(state.seeds, state.modes, (root * B).T, (root * A).T)


# Multiple-scale (slow amplitude) equations ----------------------------------------


def _hsin(nu: np.ndarray, Omega: float, tol: float) -> np.ndarray:
    # time average of sin(Omega t) e^{i nu t}
    up = np.abs(nu + Omega) <= tol * Omega
    dn = np.abs(nu - Omega) <= tol * Omega
    return (up.astype(float) - dn.astype(float)) / 2j


def _hcos(nu: np.ndarray, Omega: float, tol: float) -> np.ndarray:
    up = np.abs(nu + Omega) <= tol * Omega
    dn = np.abs(nu - Omega) <= tol * Omega
    return (up.astype(float) + dn.astype(float)) / 2.0


def msa_matrix(terms: ForcingTerms, eps: float, Omega: float, tol: float = TAU_RES) -> np.ndarray:
    """Constant matrix M with d/dt [A; B] = M [A; B] after averaging over fast phases."""
    w = terms.omega
    n = w.size
    wm, wj = w[:, None], w[None, :]
    a, b = terms.a, terms.b
    hs, hc = (lambda nu: _hsin(nu, Omega, tol)), (lambda nu: _hcos(nu, Omega, tol))
    # <F_m e^{-i w_m t}> and <F_m e^{+i w_m t}> split by the A_j and B_j coefficients
    fa_minus = a * hs(wj - wm) + b * 1j * wj * hc(wj - wm)
    fb_minus = a * hs(-wj - wm) - b * 1j * wj * hc(-wj - wm)
    fa_plus = a * hs(wj + wm) + b * 1j * wj * hc(wj + wm)
    fb_plus = a * hs(wm - wj) - b * 1j * wj * hc(wm - wj)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    pref = eps / (2j * wm)
    M[:n, :n] = pref * fa_minus
    M[:n, n:] = pref * fb_minus
    M[n:, :n] = -pref * fa_plus
    M[n:, n:] = -pref * fb_plus
    return M


@dataclass(frozen=True)
class SlowAmplitudeState:
    """A_m^(n), B_m^(n) at time t, indexed [mode, seed]."""

    modes: tuple
    seeds: tuple
    omega: np.ndarray
    t: float
    A: np.ndarray
    B: np.ndarray

    def photon_numbers(self) -> np.ndarray:
        return np.sum(2.0 * self.omega[:, None] * np.abs(self.A) ** 2, axis=1)


def msa_evolve_terms(terms: ForcingTerms, eps: float, Omega: float, t_final, seeds=None, method: str = "expm",
                     tol: float = TAU_RES) -> SlowAmplitudeState | list[SlowAmplitudeState]:
    """Evolve the slow equations by matrix exponential (``expm``) or ODE stepping (``ode``).

    ``t_final`` may be a scalar or a sequence of times.
    """
    modes = terms.modes
    seeds = _resolve_seeds(modes, seeds)
    idx = [modes.index(s) for s in seeds]
    n = len(modes)
    M = msa_matrix(terms, eps, Omega, tol)
    Y0 = np.zeros((2 * n, len(idx)), dtype=complex)
    for c, i in enumerate(idx):
        Y0[n + i, c] = 1.0 / math.sqrt(2.0 * terms.omega[i])
    times = np.atleast_1d(np.asarray(t_final, dtype=float))
    if method == "expm":
        Ys = [linalg.expm(M * t) @ Y0 for t in times]
    elif method == "ode":
        sol = integrate.solve_ivp(lambda t, y: (M @ y.reshape(2 * n, -1)).ravel(), (0.0, float(times.max())),
                                  Y0.ravel(), method="DOP853", t_eval=times, rtol=1e-13, atol=1e-15)
        if not sol.success:
            raise NumericError(f"slow-amplitude integration failed: {sol.message}")
        Ys = [sol.y[:, k].reshape(2 * n, -1) for k in range(times.size)]
    else:
        raise DomainError(f"unknown method {method!r}")
    states = [SlowAmplitudeState(modes, seeds, terms.omega, float(t), Y[:n], Y[n:]) for t, Y in zip(times, Ys)]
    return states[0] if np.ndim(t_final) == 0 else states


def msa_evolve(geom: CavityGeometry, profile: MotionProfile, modes: Sequence[ModeIndex], t_final, seeds=None,
               method: str = "expm", zero_mode_factor: float = 2.0, tol: float = TAU_RES):
    _harmonic_profile_check(profile)
    terms = forcing_terms(geom, modes, profile.Omega, zero_mode_factor)
    return msa_evolve_terms(terms, profile.eps, profile.Omega, t_final, seeds, method, tol)


def msa_growth_exponent(geom: CavityGeometry, Omega: float, modes: Sequence[ModeIndex],
                        zero_mode_factor: float = 2.0) -> float:
    """Asymptotic exponent of <N> per unit eps*t, 2 max Re(eig M)/eps."""
    terms = forcing_terms(geom, modes, Omega, zero_mode_factor)
    ev = np.linalg.eigvals(msa_matrix(terms, 1.0, Omega))
    return float(2.0 * np.max(ev.real))


def fit_log_growth(t, N) -> float:
    """Least-squares slope of log N against t."""
    t = np.asarray(t, dtype=float)
    N = np.asarray(N, dtype=float)
    if np.any(N <= 0):
        raise NumericError("log-fit needs positive photon numbers")
    return float(np.polyfit(t, np.log(N), 1)[0])


# Closed forms -----------------------------------------------------------------


def lambda_te(geom: CavityGeometry, m: ModeIndex) -> float:
    """Rate for Dirichlet-type axial dependence (TE and scalar): kz^2 / (2 w)."""
    return axial_wavenumber(geom, m) ** 2 / (2.0 * spectrum(geom, m))


def lambda_tm(geom: CavityGeometry, m: ModeIndex) -> float:
    w = spectrum(geom, m)
    return (2.0 * w * w - axial_wavenumber(geom, m) ** 2) / (2.0 * w)


def growth_rate(geom: CavityGeometry, m: ModeIndex) -> float:
    return lambda_tm(geom, m) if m.pol is Polarization.TM else lambda_te(geom, m)


def photon_number_closed_form(geom: CavityGeometry, m: ModeIndex, eps: float, t, Omega: float | None = None,
                              search_bound: int = 8, tol: float = TAU_RES):
    """sinh^2(lambda eps t) for a mode driven at Omega = 2 w_m with no resonant partner."""
    w = spectrum(geom, m)
    Omega = 2.0 * w if Omega is None else Omega
    if abs(Omega - 2.0 * w) > tol * Omega:
        raise DomainError(f"{m} is not parametrically resonant at Omega={Omega!r} (2w={2 * w!r})")
    bound = max(search_bound, m.nx, m.ny, m.nz)
    rep = find_resonances(geom, Omega, m.pol, bound, tol)
    partners = [p for p in rep.coupled_pairs if m in p]
    if partners:
        other = [q if p == m else p for p, q in partners]
        raise DomainError(f"{m} is coupled to {', '.join(map(str, other))}; use msa_evolve")
    return np.sinh(growth_rate(geom, m) * eps * np.asarray(t, dtype=float)) ** 2


def mathieu_reference(geom: CavityGeometry, m: ModeIndex, eps: float, Omega: float, t_final: float,
                      rtol: float = 1e-10, method: str = "floquet") -> float:
    """<N> from Q'' + [w^2 - 2 eps kz^2 sin(Omega t)] Q = 0 with the wall stopped at L = Lz."""
    validate_mode(geom, m)
    w = spectrum(geom, m)
    kz = axial_wavenumber(geom, m)
    terms = ForcingTerms((m,), np.array([w]), np.array([kz]), np.array([[2.0 * kz * kz]]), np.zeros((1, 1)),
                         np.zeros((1, 1)))
    state = integrate_terms(terms, eps, Omega, stop_time(Omega, t_final), rtol=rtol, method=method)
    return float(extract_bogoliubov(state).photon_numbers()[0])


@dataclass(frozen=True)
class PhotonReport:
    modes: tuple
    N: np.ndarray
    exponent: float | None
    resonance: ResonanceReport
    unitarity_defect: float | None = None
    extra: dict = field(default_factory=dict)


def cylinder_crossover_length(R: float = 1.0) -> float:
    """Lz at which TE111 and TM010 are degenerate; TE111 is the fundamental above it."""
    geom = lambda Lz: CircCavity(R, Lz)
    te = ModeIndex(Polarization.TE, 1, 1, 1)
    tm = ModeIndex(Polarization.TM, 0, 1, 0)
    f = lambda Lz: spectrum(geom(Lz), te) - spectrum(geom(Lz), tm)
    return optimize.bisect(f, 0.5 * R, 10.0 * R, xtol=1e-14 * R, maxiter=200)
