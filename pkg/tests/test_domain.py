from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcelab.domain import (
    C_SI,
    ENERGY,
    FREQUENCY,
    HBAR_SI,
    LENGTH,
    MASS,
    NATURAL,
    SI,
    TIME,
    CircCavity,
    ModeIndex,
    MotionForm,
    MotionProfile,
    Polarization,
    RectCavity,
    UnitSystem,
    bessel_root,
    spectrum,
    transverse_wavenumber,
    validate_mode,
)
from dcelab.errors import DomainError, PreconditionError, PhysicsWarning


def test_natural_constants_are_one():
    assert (NATURAL.hbar, NATURAL.c) == (1.0, 1.0)
    assert SI.hbar == HBAR_SI and SI.c == C_SI


def test_frequency_in_natural_units_is_inverse_length():
    # 1 rad/s corresponds to 1/c inverse metres
    assert NATURAL.from_si(1.0, FREQUENCY) == pytest.approx(1.0 / C_SI, rel=1e-15)
    assert NATURAL.from_si(1.0, TIME) == pytest.approx(C_SI, rel=1e-15)


def test_energy_conversion_uses_hbar_c():
    # E = hbar c / l for l = 1 m
    assert NATURAL.to_si(1.0, ENERGY) == pytest.approx(HBAR_SI * C_SI, rel=1e-15)
    assert UnitSystem("natural", 1e-9).to_si(1.0, ENERGY) == pytest.approx(HBAR_SI * C_SI / 1e-9, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(1e-30, 1e30), scale=st.floats(1e-9, 1e3),
       dims=st.sampled_from([LENGTH, TIME, FREQUENCY, MASS, ENERGY, (1, -1, -2)]))
def test_unit_round_trip(x, scale, dims):
    u = UnitSystem("natural", scale)
    assert u.from_si(u.to_si(x, dims), dims) == pytest.approx(x, rel=1e-13)


def test_unit_system_rejects_bad_scale():
    with pytest.raises(DomainError):
        UnitSystem("natural", 0.0)


@pytest.mark.parametrize("kind,n,m", [("J", 0, 1), ("J", 0, 2), ("J", 1, 1), ("J", 3, 4),
                                      ("Jprime", 1, 1), ("Jprime", 0, 1), ("Jprime", 2, 3), ("J", 7, 2)])
def test_bessel_roots_against_mpmath(kind, n, m):
    # mpmath counts x = 0 as the first zero of J_0'; only positive roots are physical here
    shift = 1 if (kind, n) == ("Jprime", 0) else 0
    ref = float(mpmath.besseljzero(n, m + shift, derivative=int(kind == "Jprime")))
    assert bessel_root(kind, n, m) == pytest.approx(ref, rel=1e-14)


def _series_j0(x: float) -> float:
    # power series; adequate for x < 10
    term, total, k = 1.0, 1.0, 0
    while abs(term) > 1e-18:
        k += 1
        term *= -(x * x / 4.0) / (k * k)
        total += term
    return total


def test_second_j0_root_by_series_bisection():
    lo, hi = 5.0, 6.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _series_j0(lo) * _series_j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert abs(0.5 * (lo + hi) - 5.5200781102863106) < 1e-13
    assert bessel_root("J", 0, 2) == pytest.approx(5.5200781102863106, abs=1e-13)


@pytest.mark.parametrize("args", [("K", 0, 1), ("J", -1, 1), ("J", 0, 0), ("J", 1.5, 1)])
def test_bessel_root_rejects_bad_arguments(args):
    with pytest.raises(DomainError):
        bessel_root(*args)


def test_cube_spectrum():
    cube = RectCavity(1.0, 1.0, 1.0)
    assert spectrum(cube, ModeIndex.of(1, 1, 1)) == pytest.approx(math.sqrt(3) * math.pi, rel=1e-15)
    assert spectrum(cube, ModeIndex.of(1, 1, 0, "TM")) == pytest.approx(math.sqrt(2) * math.pi, rel=1e-15)


def test_cylinder_spectrum_te111():
    g = CircCavity(1.0, 3.0)
    w = spectrum(g, ModeIndex.of(1, 1, 1, "TE"))
    assert w == pytest.approx(math.hypot(1.8411837813406593, math.pi / 3.0), rel=1e-14)
    assert transverse_wavenumber(g, ModeIndex.of(1, 1, 1, "TE")) == pytest.approx(1.8411837813406593, rel=1e-12)


@pytest.mark.parametrize("geom,mode", [
    (RectCavity(1, 1, 1), ModeIndex.of(0, 1, 1)),
    (RectCavity(1, 1, 1), ModeIndex.of(0, 0, 1, "TE")),
    (RectCavity(1, 1, 1), ModeIndex.of(1, 1, 0, "TE")),
    (RectCavity(1, 1, 1), ModeIndex.of(1, 0, 1, "TM")),
    (CircCavity(1, 1), ModeIndex.of(0, 0, 1, "TM")),
    (CircCavity(1, 1), ModeIndex.of(1, 1, 0, "TE")),
])
def test_invalid_modes_rejected(geom, mode):
    with pytest.raises(DomainError):
        validate_mode(geom, mode)


def test_tm_zero_axial_index_allowed():
    validate_mode(RectCavity(1, 1, 1), ModeIndex.of(1, 1, 0, "TM"))
    validate_mode(CircCavity(1, 1), ModeIndex.of(0, 1, 0, "TM"))


def test_mode_index_rejects_negative_and_orders():
    with pytest.raises(DomainError):
        ModeIndex.of(-1, 1, 1)
    assert ModeIndex.of(1, 1, 1) < ModeIndex.of(1, 1, 2)
    assert str(ModeIndex.of(1, 2, 3, Polarization.TM)) == "TM(1,2,3)"


@pytest.mark.parametrize("bad", [dict(Lx=0, Ly=1, Lz=1), dict(Lx=1, Ly=-1, Lz=1)])
def test_rect_cavity_needs_positive_lengths(bad):
    with pytest.raises(DomainError):
        RectCavity(**bad)


def test_profile_is_static_outside_window():
    p = MotionProfile(eps=0.01, Omega=2.0, t_start=1.0, t_end=3.0, L0=2.0)
    L, L1, L2, L3 = p.length_derivs(np.array([0.0, 4.0]))
    assert np.all(L == 2.0) and np.all(L1 == 0) and np.all(L2 == 0) and np.all(L3 == 0)
    assert p.max_wall_speed() == pytest.approx(0.04)


def test_profile_derivatives_match_finite_differences():
    p = MotionProfile(eps=0.02, Omega=3.0, L0=1.5)
    t, h = 0.7, 1e-5
    L, L1, L2, _ = p.length_derivs(np.array([t]))
    fd = (p.length(t + h) - p.length(t - h)) / (2 * h)
    assert L1[0] == pytest.approx(float(fd), rel=1e-8)
    fd2 = (p.length(t + h) - 2 * p.length(t) + p.length(t - h)) / h**2
    assert L2[0] == pytest.approx(float(fd2), rel=1e-4)


def test_profile_continuity_at_switch_off():
    assert MotionProfile(eps=0.01, Omega=math.pi, t_end=2.0).is_continuous()
    assert not MotionProfile(eps=0.01, Omega=math.pi, t_end=2.5).is_continuous()


def test_perturbative_check():
    MotionProfile(eps=0.005).check_perturbative()
    with pytest.warns(PhysicsWarning):
        MotionProfile(eps=0.05).check_perturbative()
    with pytest.raises(PreconditionError):
        MotionProfile(eps=0.2).check_perturbative()


def test_tabulated_profile_interpolates_samples():
    t = np.linspace(0, 1, 21)
    L = 1.0 + 0.01 * t**2
    p = MotionProfile(form=MotionForm.TABULATED, samples=(t, L))
    assert p.length(0.5) == pytest.approx(1.0025, rel=1e-6)
    with pytest.raises(DomainError):
        MotionProfile(form="Tabulated", samples=(t[:3], L[:3]))


def test_profile_validation():
    with pytest.raises(DomainError):
        MotionProfile(eps=-0.1)
    with pytest.raises(DomainError):
        MotionProfile(L0=0.0)
