"""Order-of-magnitude estimates for laboratory parametric-amplification setups."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import SI, UnitSystem
from .errors import DomainError


@dataclass(frozen=True)
class EstimateInput:
    """Cavity quality factor, modulation depth, resonant photon frequency and geometry factor."""

    Q: float
    eps: float
    omega: float
    eta: float = 1.0

    def __post_init__(self):
        if not self.Q > 0:
            raise DomainError("Q must be > 0")
        if self.eps < 0:
            raise DomainError("eps must be >= 0")
        if not self.omega > 0:
            raise DomainError("omega must be > 0")


@dataclass(frozen=True)
class EstimateResult:
    N_max: float
    t_max: float
    P_max: float
    feasible: bool


def estimate_max_photons(inp: EstimateInput, units: UnitSystem = SI) -> EstimateResult:
    """Photon yield after one cavity lifetime t_max = Q/omega, with N = sinh^2(eta omega eps t).

    ``feasible`` is the necessary condition 2 Q eps > 1 for losses not to win.
    """
    t_max = inp.Q / inp.omega
    N = math.sinh(inp.eta * inp.Q * inp.eps) ** 2
    P = N * units.hbar * inp.omega / t_max
    return EstimateResult(N, t_max, P, 2.0 * inp.Q * inp.eps > 1.0)


def opo_modulation_depth(chi1: float, chi2: float, E_pump: float) -> float:
    """Relative permittivity modulation (chi2 E_pump / 2) / (1 + chi1) of a pumped nonlinear slab."""
    if 1.0 + chi1 <= 0:
        raise DomainError(f"1 + chi1 = {1.0 + chi1!r} must be > 0")
    return 0.5 * chi2 * E_pump / (1.0 + chi1)
