from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcelab.domain import HBAR_SI
from dcelab.errors import DomainError
from dcelab.estimates import EstimateInput, estimate_max_photons, opo_modulation_depth


def test_fbar_power():
    omega = 2 * math.pi * 1.5e9
    res = estimate_max_photons(EstimateInput(Q=1e8, eps=1e-8, omega=omega))
    assert res.t_max == pytest.approx(1e8 / omega)
    assert res.N_max == pytest.approx(math.sinh(1.0) ** 2, rel=1e-15)
    assert res.P_max == pytest.approx(res.N_max * HBAR_SI * omega**2 / 1e8, rel=1e-15)
    assert res.P_max == pytest.approx(1.2937e-22, rel=1e-4)
    assert res.feasible


def test_static_wall_is_infeasible():
    res = estimate_max_photons(EstimateInput(Q=1e6, eps=0.0, omega=1.0))
    assert res.N_max == 0.0 and not res.feasible


@pytest.mark.parametrize("two_q_eps,feasible", [(0.5, False), (0.999, False), (1.001, True), (4.0, True)])
def test_feasibility_threshold(two_q_eps, feasible):
    res = estimate_max_photons(EstimateInput(Q=1e4, eps=two_q_eps / 2e4, omega=1.0))
    assert res.feasible is feasible
    assert res.N_max > 0


@pytest.mark.parametrize("bad", [dict(Q=0.0, eps=1e-3, omega=1.0), dict(Q=1.0, eps=-1e-3, omega=1.0),
                                 dict(Q=1.0, eps=1e-3, omega=0.0)])
def test_input_validation(bad):
    with pytest.raises(DomainError):
        EstimateInput(**bad)


def test_opo_mapping():
    assert opo_modulation_depth(1.25, 4.5e-3, 1.0) == pytest.approx(1e-3, rel=1e-14)
    assert opo_modulation_depth(1.25, 0.0, 3.0) == 0.0
    with pytest.raises(DomainError):
        opo_modulation_depth(-1.0, 1.0, 1.0)


@given(chi1=st.floats(-0.9, 10.0), chi2=st.floats(-1.0, 1.0), E=st.floats(0.0, 1e3))
def test_opo_is_linear_in_pump(chi1, chi2, E):
    assert opo_modulation_depth(chi1, chi2, 2 * E) == pytest.approx(2 * opo_modulation_depth(chi1, chi2, E),
                                                                    rel=1e-14, abs=1e-300)
