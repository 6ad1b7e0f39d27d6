from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcelab.domain import MotionProfile
from dcelab.errors import DomainError, PhysicsWarning, PreconditionError
from dcelab.moore1d import (
    Provenance,
    energy_profile,
    f_density,
    harmonic_profile,
    intracavity_energy,
    jump_times,
    mirror_force,
    moore_numeric,
    moore_rg,
    static_energy_density,
)


@pytest.fixture(scope="module")
def q4():
    return moore_rg(4, 0.01), moore_numeric(harmonic_profile(4, 0.01), 30.0)


def test_static_cavity_has_linear_R():
    t = np.linspace(-1.0, 12.0, 131)
    for sol in (moore_rg(3, 0.0), moore_numeric(harmonic_profile(3, 0.0), 12.0)):
        R, R1, R2, R3 = sol.derivs(t)
        np.testing.assert_allclose(R, t, atol=1e-13)
        np.testing.assert_allclose(R1, 1.0, atol=1e-13)
        assert np.all(np.abs(R2) < 1e-12) and np.all(np.abs(R3) < 1e-12)


def test_static_energy_density_and_force():
    L0 = 1.7
    sol = moore_rg(2, 0.0, L0)
    assert mirror_force(sol, -0.5) == -math.pi / (24.0 * L0**2)
    assert static_energy_density(L0) == -math.pi / (24.0 * L0**2)
    assert float(-2 * f_density(sol, 5.0)) == pytest.approx(static_energy_density(L0), rel=1e-14)
    assert abs(intracavity_energy(sol, 3.0)) < 1e-14


@pytest.mark.parametrize("q,eps", [(2, 0.005), (4, 0.01), (3, 0.02)])
def test_numeric_solver_satisfies_moore_equation(q, eps):
    sol = moore_numeric(harmonic_profile(q, eps), 27.0)
    t = np.linspace(0.0, 25.0, 5001)
    assert np.max(np.abs(sol.moore_residual(t))) <= 1e-10
    assert sol.provenance is Provenance.NUMERIC and sol.q == q


@pytest.mark.parametrize("q,eps", [(2, 0.005), (4, 0.01)])
def test_rg_tracks_numeric_within_uniform_bound(q, eps):
    # the RG form differs from the seed t/L0 on [0, L0] by O(eps), so the honest bound is uniform in t
    rg = moore_rg(q, eps)
    num = moore_numeric(harmonic_profile(q, eps), 27.0)
    t = np.linspace(0.0, 25.0, 5001)
    assert np.max(np.abs(rg.R(t) - num.R(t))) <= 2.0 * eps
    assert np.max(np.abs(rg.moore_residual(t))) <= 2.0 * eps


def test_numeric_derivatives_match_finite_differences(q4):
    _, num = q4
    t, h = np.array([3.3, 11.7, 19.9]), 1e-5
    R, R1, R2, _ = num.derivs(t)
    np.testing.assert_allclose(R1, (num.R(t + h) - num.R(t - h)) / (2 * h), rtol=1e-6)
    np.testing.assert_allclose(R2, (num.R(t + h) - 2 * R + num.R(t - h)) / h**2, rtol=1e-3, atol=1e-3)


def test_rg_derivatives_match_finite_differences(q4):
    rg, _ = q4
    t, h = np.array([2.1, 14.6, 24.3]), 1e-5
    R, R1, R2, R3 = rg.derivs(t)
    np.testing.assert_allclose(R1, (rg.R(t + h) - rg.R(t - h)) / (2 * h), rtol=1e-7)
    d2 = (rg.derivs(t + h)[1] - rg.derivs(t - h)[1]) / (2 * h)
    d3 = (rg.derivs(t + h)[2] - rg.derivs(t - h)[2]) / (2 * h)
    np.testing.assert_allclose(R2, d2, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(R3, d3, rtol=1e-6, atol=1e-4)


def test_q4_jumps_sit_at_odd_quarter_periods(q4):
    rg, _ = q4
    jumps = jump_times(rg, 22.0, 24.0)
    assert len(jumps) == 4
    expected = np.array([22.25, 22.75, 23.25, 23.75])
    assert np.max(np.abs(jumps - expected)) < 1e-4


@pytest.mark.parametrize("q,peaks", [(2, 2), (3, 3), (4, 4)])
def test_peak_count_matches_q(q, peaks):
    eps = 0.01
    for sol in (moore_rg(q, eps), moore_numeric(harmonic_profile(q, eps), 22.0)):
        assert len(energy_profile(sol, 20.4, 2001).peaks()) == peaks


def test_off_parametric_drive_stays_small():
    sol = moore_rg(1, 0.01)
    excess = [np.max(energy_profile(sol, t, 801).values) - static_energy_density(1.0) for t in (10.0, 20.0, 30.0)]
    assert max(excess) < 1e-3
    growing = moore_rg(2, 0.01)
    assert np.max(energy_profile(growing, 30.0, 801).values) - static_energy_density(1.0) > 1.0


def test_q2_energy_grows():
    sol = moore_rg(2, 0.01)
    e = [intracavity_energy(sol, t) for t in (10.0, 20.0, 30.0)]
    assert 0 < e[0] < e[1] < e[2]


@settings(max_examples=25, deadline=None)
@given(q=st.integers(1, 6), eps=st.floats(0.0, 0.05), t=st.floats(0.0, 20.0))
def test_rg_solution_is_monotone(q, eps, t):
    assert moore_rg(q, eps).derivs(t)[1] > 0


def test_numeric_solver_handles_tabulated_motion():
    ts = np.linspace(0.0, 10.0, 2001)
    L = 1.0 + 0.01 * np.sin(math.pi * ts) ** 2
    sol = moore_numeric(MotionProfile(form="Tabulated", samples=(ts, L), L0=1.0), 10.0)
    t = np.linspace(0.0, 9.0, 901)
    assert np.max(np.abs(sol.moore_residual(t))) <= 1e-10


def test_guards():
    with pytest.raises(DomainError):
        moore_rg(0, 0.01)
    with pytest.raises(PreconditionError):
        moore_rg(2, 0.2)
    with pytest.warns(PhysicsWarning):
        moore_rg(2, 0.05, t_horizon=100.0)
    with pytest.raises(PreconditionError):
        moore_numeric(MotionProfile(eps=0.01, Omega=math.pi, t_end=2.5), 5.0)
    sol = moore_numeric(harmonic_profile(2, 0.01), 5.0)
    with pytest.raises(DomainError):
        sol.R(6.0)
