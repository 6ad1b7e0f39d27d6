"""Dynamical Casimir effect toolkit: moving mirrors, 1D and 3D cavities, quantum friction and plasma sheets."""

from __future__ import annotations

from .domain import NATURAL, SI, CircCavity, ModeIndex, MotionProfile, Polarization, RectCavity, UnitSystem
from .errors import DceError, DomainError, NumericError, PhysicsWarning, PreconditionError

__version__ = "0.1.0"

__all__ = [
    "NATURAL", "SI", "CircCavity", "ModeIndex", "MotionProfile", "Polarization", "RectCavity", "UnitSystem",
    "DceError", "DomainError", "NumericError", "PhysicsWarning", "PreconditionError", "__version__",
]
