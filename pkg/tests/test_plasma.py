from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcelab.cavity3d import ResonanceKind
from dcelab.domain import ModeIndex, RectCavity
from dcelab.errors import DomainError, PhysicsWarning
from dcelab.plasma_sheet import (
    PulseShape,
    SheetModel,
    length_for_frequency,
    modulation_depth,
    resonance_check_sheet,
    resonant_period,
    sheet_photon_number,
    sheet_residual,
    sheet_spectrum,
    sheet_wavenumbers,
    wavenumber_evaluator,
)

PULSE = PulseShape(1.0, 0.05, 0.2)


def test_roots_against_high_precision_oracle():
    # 2k cos(k/2) + 5 sin(k/2) = 0 solved to 30 digits
    ref = [4.21275134744245975525792860, 9.91859565164406030284835599, 16.0176211516487483801700916]
    np.testing.assert_allclose(sheet_wavenumbers(5.0, 1.0, 3), ref, rtol=1e-15)


@settings(max_examples=60, deadline=None)
@given(V=st.floats(0.0, 1e9), Lx=st.floats(1e-2, 10.0))
def test_roots_are_bracketed_and_accurate(V, Lx):
    k = sheet_wavenumbers(V, Lx, 4)
    m = np.arange(1, 5)
    assert np.all(k >= (2 * m - 1) * math.pi / Lx) and np.all(k <= 2 * m * math.pi / Lx)
    assert max(sheet_residual(x, V, Lx) for x in k) <= 1e-12


def test_free_and_hard_wall_limits():
    Lx = 0.37
    m = np.arange(1, 6)
    np.testing.assert_array_equal(sheet_wavenumbers(0.0, Lx, 5), (2 * m - 1) * math.pi / Lx)
    k = sheet_wavenumbers(1e12, Lx, 5)
    assert np.max(np.abs(k - 2 * m * math.pi / Lx)) < 1e-9


def test_tiny_sheet_strength_shifts_root_linearly():
    # k - (2m - 1) pi / Lx = V / (2 k) to first order in V
    Lx = 1.7712740527526762
    k = sheet_wavenumbers(1e-14, Lx, 2)
    k0 = np.array([1.0, 3.0]) * math.pi / Lx
    np.testing.assert_allclose(k - k0, 1e-14 / (2 * k0), rtol=0, atol=4 * np.spacing(k0.max()))


def test_wavenumbers_increase_with_sheet_strength():
    ks = [sheet_wavenumbers(V, 1.0, 2) for V in (0.0, 1.0, 10.0, 100.0)]
    assert all(np.all(a < b) for a, b in zip(ks, ks[1:]))


def test_wavenumber_guards():
    with pytest.raises(DomainError):
        sheet_wavenumbers(-1.0, 1.0, 2)
    with pytest.raises(DomainError):
        sheet_wavenumbers(1.0, 0.0, 2)


def test_pulse_shape_endpoints():
    assert float(PULSE(0.0)) == 0.0
    assert float(PULSE(0.05)) == pytest.approx(1.0, abs=1e-15)
    assert float(PULSE(1.0 - 1e-15)) == pytest.approx(0.0, abs=1e-12)
    assert float(PULSE(2.3)) == pytest.approx(float(PULSE(0.3)), rel=1e-12)
    with pytest.raises(DomainError):
        PulseShape(1.0, 1.5, 0.2)


@pytest.mark.parametrize("j,ref", [(1, 0.28004336104369293), (2, 0.16501763804933148), (3, 0.11300737303998759)])
def test_pulse_harmonics_match_fft(j, ref):
    # reference: 2|c_j| from a 2^20-point FFT of one period
    assert PULSE.harmonic(j) == pytest.approx(ref, rel=1e-11)


def test_modulation_depth_from_implicit_derivative():
    model = SheetModel(1e3, 1.1e3, PULSE)
    Lx, h = 0.2, 1e-3
    k = lambda V: sheet_wavenumbers(V, Lx, 1)[0]
    dk = (k(1e3 + h) - k(1e3 - h)) / (2 * h)
    assert modulation_depth(model, Lx, 1) == pytest.approx((model.Vmax - model.V0) * dk / k(1e3), rel=1e-6)
    kt = wavenumber_evaluator(model, Lx, 1)
    assert kt(0.0) == pytest.approx(k(1e3), rel=1e-15)


def test_non_perturbative_modulation_warns():
    with pytest.warns(PhysicsWarning):
        modulation_depth(SheetModel(1.0, 10.0, PULSE), 1.0, 1)
    assert not SheetModel(1.0, 10.0, PULSE).perturbative(1.0)


def test_midplane_slab_setup():
    V0, Lx, Ly = 1e6, 0.2, 0.1
    omega = 2 * math.pi * 4.70e9 / 299_792_458.0 / 2
    n = ModeIndex.of(1, 1, 1)
    Lz = length_for_frequency(Lx, Ly, V0, omega, n)
    geom = RectCavity(Lx, Ly, Lz)
    assert sheet_spectrum(geom, V0, 1).omega(n) == pytest.approx(omega, rel=1e-13)
    T = resonant_period(geom, V0, n)
    model = SheetModel(V0, 1e7, PulseShape(T, 0.05 * T, 0.2 * T))
    assert model.perturbative(Lx)
    assert modulation_depth(model, Lx, 1) == pytest.approx(1.79996e-4, rel=1e-5)
    assert resonance_check_sheet(model, geom, 1, 4).kind is ResonanceKind.UNCOUPLED


def _setup(scale: float = 1.0):
    geom = RectCavity(1.0 * scale, 0.8 * scale, 0.9 * scale)
    n = ModeIndex.of(1, 1, 1)
    V0 = 200.0 / scale
    T = resonant_period(geom, V0, n)
    return geom, n, SheetModel(V0, 2 * V0, PulseShape(T, 0.05 * T, 0.2 * T))


def test_rescaling_invariance():
    geom, n, model = _setup()
    N1 = float(sheet_photon_number(model, geom, n, 1, 300.0, 3))
    geom2, _, model2 = _setup(2.0)
    N2 = float(sheet_photon_number(model2, geom2, n, 1, 600.0, 3))
    assert N1 > 0
    assert N2 / N1 == pytest.approx(1.0, abs=1e-10)


def test_photon_number_grows_and_starts_at_zero():
    geom, n, model = _setup()
    N = sheet_photon_number(model, geom, n, 1, np.array([0.0, 100.0, 200.0]), 3)
    assert N[0] == 0.0 and 0 < N[1] < N[2]


def test_off_resonant_mode_rejected():
    geom, _, model = _setup()
    with pytest.raises(DomainError, match="off resonance"):
        sheet_photon_number(model, geom, ModeIndex.of(1, 1, 2), 1, 10.0, 3)


def test_sheet_model_guards():
    with pytest.raises(DomainError):
        SheetModel(0.0, 1.0, PULSE)
    with pytest.raises(DomainError):
        SheetModel(2.0, 1.0, PULSE)
    with pytest.raises(DomainError):
        length_for_frequency(1.0, 1.0, 0.0, 1.0)
