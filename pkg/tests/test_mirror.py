from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcelab.domain import SI
from dcelab.errors import DomainError, NumericError, PhysicsWarning, PreconditionError
from dcelab.mirror_vacuum import (
    MirrorOscillatorParams,
    MirrorTrajectory,
    damping_rate,
    decoherence_time,
    diffusion_coefficient,
    dissipated_work,
    fd_weights,
    force_1d,
    force_3d,
    photon_rate,
    radiated_energy_and_rate,
    susceptibility_1d,
    susceptibility_1d_quadrature,
)


@pytest.mark.parametrize("Omega", np.geomspace(1e-3, 1e3, 7))
def test_susceptibility_quadrature_matches_closed_form(Omega):
    ref = susceptibility_1d(Omega)
    assert abs(susceptibility_1d_quadrature(Omega) - ref) <= 1e-12 * abs(ref)


def test_susceptibility_is_odd_and_imaginary():
    for W in (0.3, 2.0):
        chi = susceptibility_1d_quadrature(W)
        assert chi.real == 0.0
        assert susceptibility_1d_quadrature(-W) == pytest.approx(-chi, rel=1e-13)
    assert susceptibility_1d_quadrature(0.0) == 0


def test_susceptibility_si_scaling():
    Omega = 1e9
    assert susceptibility_1d(Omega, SI).imag == pytest.approx(SI.hbar * Omega**3 / (6 * math.pi * SI.c**2), rel=1e-15)


def test_fd_weights_reproduce_central_difference():
    np.testing.assert_allclose(fd_weights([-1, 0, 1], 1), [-0.5, 0.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(fd_weights([-1, 0, 1], 2), [1.0, -2.0, 1.0], atol=1e-14)


def test_harmonic_force_1d_closed_form():
    q0, W = 1e-3, 2.0
    traj = MirrorTrajectory.harmonic(q0, W)
    for t in (0.0, 0.4, 1.3):
        assert force_1d(traj, t) == pytest.approx(-q0 * W**3 * math.cos(W * t) / (6 * math.pi), rel=1e-13)


def test_static_mirror_feels_no_force():
    traj = MirrorTrajectory.static(0.25)
    assert force_1d(traj, 0.0) == 0.0
    assert force_3d(traj, 1.0, "EM", 0.0) == 0.0


@pytest.mark.parametrize("order,rtol", [(1, 1e-8), (3, 1e-7), (5, 1e-6)])
def test_tabulated_derivatives_match_harmonic(order, rtol):
    W, dt = 1.0, 0.01
    t = np.arange(-40, 41) * dt
    tab = MirrorTrajectory.tabulated(np.sin(W * t), t0=t[0], dt=dt)
    exact = MirrorTrajectory.harmonic(1.0 * 0.05, W).derivative(order, 0.0) / 0.05
    assert tab.derivative(order, 0.0) == pytest.approx(exact, rel=rtol)


def test_tabulated_guards():
    with pytest.raises(NumericError):
        MirrorTrajectory.tabulated([0.0] * 5, 0.0, 0.1).derivative(3, 0.2)
    tab = MirrorTrajectory.tabulated(np.zeros(30), 0.0, 0.1)
    with pytest.raises(NumericError):
        tab.derivative(3, 1.05)
    with pytest.raises(NumericError):
        tab.derivative(3, 0.1)
    with pytest.raises(DomainError):
        MirrorTrajectory.tabulated([0.0] * 30, 0.0, -1.0)


def test_relativistic_motion_rejected():
    with pytest.raises(PreconditionError):
        MirrorTrajectory.harmonic(0.2, 1.0)


def test_em_force_is_twelve_times_scalar():
    traj = MirrorTrajectory.harmonic(1e-3, 3.0)
    assert force_3d(traj, 2.0, "EM", 0.1) == pytest.approx(12.0 * force_3d(traj, 2.0, "Scalar", 0.1), rel=1e-14)
    with pytest.raises(DomainError):
        force_3d(traj, 1.0, "TE", 0.0)


def test_dissipated_work_over_periods():
    # cycle-averaged power hbar q0^2 Omega^4 / (12 pi) after integrating q''' q' by parts
    q0, W = 1e-3, 2.0
    traj = MirrorTrajectory.harmonic(q0, W)
    period = 2 * math.pi / W
    work = dissipated_work(traj, 0.0, 5 * period)
    assert work == pytest.approx(5 * period * q0**2 * W**4 / (12 * math.pi), rel=1e-10)
    assert dissipated_work(traj, 0.0, period, dim="EM", area=1.0) > 0


def test_photon_rate_reference_point():
    # v/c = 1e-7 at 10 GHz on an area of one squared wavelength
    W = 2 * math.pi * 1e10
    q0 = 1e-7 * SI.c / W
    lam = 2 * math.pi * SI.c / W
    E, rate = radiated_energy_and_rate(q0, W, 1.0, lam**2, SI)
    assert rate == pytest.approx(4.18879020478639e-05, rel=1e-12)
    assert photon_rate(1e-7, W, 1.0) == pytest.approx(rate, rel=1e-14)
    # photons leave in pairs sharing hbar Omega
    assert rate == pytest.approx(E / (SI.hbar * W / 2), rel=1e-12)


def test_rate_requires_many_cycles():
    with pytest.raises(PreconditionError):
        radiated_energy_and_rate(1e-3, 1.0, 5.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(M=st.floats(1e-3, 1e3), W=st.floats(1e-2, 10.0), r=st.floats(1.0, 1e3))
def test_decoherence_routes_agree(M, W, r):
    p = MirrorOscillatorParams(M=M * 1e6, Omega=W * 1e-6, P0=r * math.sqrt(M * 1e6 * W * 1e-6 / 2.0))
    t_d = decoherence_time(p)
    gamma = damping_rate(p)
    assert t_d == pytest.approx(1.0 / (gamma * r * r), rel=1e-12)
    assert diffusion_coefficient(p) == pytest.approx(gamma / (p.M * p.Omega), rel=1e-14)


def test_decoherence_needs_separated_components():
    with pytest.raises(DomainError):
        decoherence_time(MirrorOscillatorParams(1.0, 1e-3, 0.0))


def test_warns_when_mirror_is_light():
    with pytest.warns(PhysicsWarning):
        damping_rate(MirrorOscillatorParams(M=1.0, Omega=0.1, P0=1.0))
