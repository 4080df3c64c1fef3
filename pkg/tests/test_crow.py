import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from gaugetransfer.analytic import exact_final_state_from_eigenstate, theta_vector
from gaugetransfer.chain import ChainSpec, GaugeRamp, SitePotentials, build_lab_hamiltonian
from gaugetransfer.crow import (
    CrowSpec,
    accumulated_phase,
    bessel_j0,
    effective_hamiltonian,
    effective_params,
    evolve_crow,
    initial_cavity_amplitudes,
    ramp_phase_schedule,
    ramped_crow_spec,
    rwa_discrepancy,
    stroboscopic_times,
)
from gaugetransfer.dynamics import eigenstate_initial_state
from gaugetransfer.errors import DimensionError

J0_FIRST_ZERO = 2.40482555769577


def _series_oracle(x, terms=40):
    q = Fraction(x) ** 2 / 4
    total = Fraction(0)
    term = Fraction(1)
    for k in range(terms):
        total += term
        term = -term * q / ((k + 1) ** 2)
    return float(total)


def test_j0_at_origin():
    assert bessel_j0(0.0) == 1.0


def test_j0_first_zero():
    assert abs(bessel_j0(J0_FIRST_ZERO)) < 1e-10


def test_j0_matches_truncated_series():
    for x in (1.0, 0.3, 2.5, 6.0):
        assert abs(bessel_j0(x) - _series_oracle(x)) < 1e-13


def test_j0_matches_reference_library():
    x = np.concatenate([np.linspace(-20, 20, 801), np.linspace(20, 80, 121)])
    assert np.max(np.abs(bessel_j0(x) - scipy.special.j0(x))) < 1e-12


def test_j0_rejects_non_finite():
    with pytest.raises(ValueError):
        bessel_j0(float("inf"))


def test_effective_params_limits():
    eff = effective_params(CrowSpec(rho=1.3, Omega=30.0, Gamma=0.0, phi=0.8))
    assert eff.kappa_eff == 1.3 and eff.h_eff == 0.0
    eff = effective_params(CrowSpec(rho=1.0, Omega=10.0, Gamma=24.05, phi=0.0))
    assert abs(eff.kappa_eff) < 1e-3 and eff.h_eff == 0.0


def test_effective_gauge_field_sinh():
    sinh1 = float(sum(Fraction(1, math.factorial(2 * k + 1)) for k in range(20)))
    eff = effective_params(CrowSpec(rho=1.0, Omega=20.0, Gamma=20.0, phi=1.0))
    assert eff.h_eff == pytest.approx(sinh1, abs=1e-15)
    assert eff.h_eff == pytest.approx(1.1752, abs=1e-4)


@settings(max_examples=60, deadline=None)
@given(rho=st.floats(0.01, 10), depth=st.floats(0, 30), phi=st.floats(-3, 3))
def test_effective_hopping_bounded(rho, depth, phi):
    eff = effective_params(CrowSpec(rho=rho, Omega=20 * rho, Gamma=depth * 20 * rho, phi=phi))
    assert abs(eff.kappa_eff) <= rho * (1 + 1e-15)


def test_spec_validation_and_flags():
    with pytest.raises(ValueError):
        CrowSpec(rho=0.0, Omega=1.0, Gamma=1.0)
    with pytest.raises(ValueError):
        CrowSpec(rho=1.0, Omega=-1.0, Gamma=1.0)
    with pytest.raises(ValueError):
        CrowSpec(rho=1.0, Omega=1.0, Gamma=-1.0)
    assert CrowSpec(rho=1.0, Omega=20.0, Gamma=1.0).rwa_regime
    assert not CrowSpec(rho=1.0, Omega=19.0, Gamma=1.0).rwa_regime
    assert CrowSpec(rho=1.0, Omega=4.0, Gamma=1.0, rwa_min_ratio=2.0).rwa_regime
    with pytest.raises(ValueError):
        effective_params(CrowSpec(rho=1.0, Omega=20.0, Gamma=1.0, phi=lambda t: t))


def test_accumulated_phase_closed_form_cases():
    spec = CrowSpec(rho=1.0, Omega=7.0, Gamma=3.0, phi=0.0)
    assert accumulated_phase(spec, 0.0) == 0
    assert abs(accumulated_phase(spec, math.pi / 7.0)) < 1e-15
    spec = CrowSpec(rho=1.0, Omega=7.0, Gamma=3.0, phi=0.6)
    assert abs(accumulated_phase(spec, 0.0)) < 1e-15


@pytest.mark.parametrize("t", [0.01, 0.9, 3.7, -2.2])
def test_accumulated_phase_quadrature_agrees(t):
    spec = CrowSpec(rho=1.0, Omega=11.0, Gamma=7.0, phi=0.5)
    closed = accumulated_phase(spec, t)
    quad = accumulated_phase(spec, t, quadrature=True)
    assert abs(closed - quad) < 1e-8


def test_phase_schedule_gives_linear_gauge_field():
    phi = ramp_phase_schedule(Gamma=40.0, Omega=40.0, alpha=0.7)
    spec = CrowSpec(rho=1.0, Omega=40.0, Gamma=40.0, phi=phi)
    for t in (-2.0, 0.0, 1.5):
        assert effective_params(spec, spec.phi_at(t)).h_eff == pytest.approx(0.7 * t, abs=1e-12)
    with pytest.raises(ValueError):
        ramp_phase_schedule(0.0, 1.0, 1.0)


def test_stroboscopic_times():
    spec = CrowSpec(rho=1.0, Omega=2 * math.pi, Gamma=1.0)
    assert np.allclose(stroboscopic_times(spec, 0.0, 3.0), [0, 1, 2, 3])
    assert np.allclose(stroboscopic_times(spec, 0.5, 2.2), [0.5, 1, 2])


def test_sign_convention_matches_chain_model():
    chain = ChainSpec(4)
    for phi, alpha in ((0.0, 0.37), (0.4, -0.2)):
        spec = CrowSpec(rho=1.0, Omega=30.0, Gamma=30.0, phi=phi, alpha=alpha)
        eff = effective_params(spec)
        pots = SitePotentials(-alpha * chain.indices.astype(float))
        H_chain = build_lab_hamiltonian(ChainSpec(4, eff.kappa_eff), eff.h_eff, pots)
        assert np.max(np.abs(effective_hamiltonian(spec, chain) - H_chain)) < 1e-15


def test_unmodulated_limit_is_hermitian_chain():
    rho, N = 0.8, 4
    chain = ChainSpec(N, rho)
    spec = CrowSpec(rho=rho, Omega=25.0, Gamma=0.0)
    c0 = np.eye(chain.size)[0]
    times = np.linspace(0, 4.0, 9)
    traj = evolve_crow(spec, chain, c0, (0.0, 4.0), times=times)
    for t, p in zip(times, traj.pn_series):
        theta = theta_vector(chain, t / 2)
        assert np.max(np.abs(p - np.abs(theta) ** 2)) < 1e-6


def test_carrier_frequency_is_irrelevant():
    chain = ChainSpec(3)
    c0 = np.eye(chain.size)[1]
    runs = []
    for omega0 in (0.0, 7.3):
        spec = CrowSpec(rho=1.0, Omega=20.0, Gamma=20.0, phi=0.4, omega0=omega0)
        b0 = initial_cavity_amplitudes(spec, chain, c0)
        runs.append(evolve_crow(spec, chain, b0, (0.0, 2.0)))
    assert np.max(np.abs(runs[0].pn_series - runs[1].pn_series)) < 1e-10


def test_evolve_crow_input_checks():
    spec = CrowSpec(rho=1.0, Omega=20.0, Gamma=1.0)
    with pytest.raises(DimensionError):
        evolve_crow(spec, ChainSpec(2), np.ones(3), (0.0, 1.0))
    with pytest.raises(ValueError):
        evolve_crow(spec, ChainSpec(1), np.ones(3), (0.0, 1.0), times=[0.5, 1.0])
    with pytest.raises(ValueError):
        evolve_crow(spec, ChainSpec(1), np.ones(3), (0.0, 1.0), carrier="other")


def test_rwa_constant_phase_within_two_percent():
    spec = CrowSpec(rho=1.0, Omega=50.0, Gamma=50.0, phi=0.5)
    assert rwa_discrepancy(spec, ChainSpec(5), kappa_t_max=3.0) < 0.02


def test_rwa_needs_constant_phase():
    spec = CrowSpec(rho=1.0, Omega=20.0, Gamma=20.0, phi=lambda t: 0.1 * t)
    with pytest.raises(ValueError):
        rwa_discrepancy(spec, ChainSpec(1))


def _fig2_ramp_run(dc_gradient):
    rho = 1.0
    kappa = rho * bessel_j0(1.0)
    T = 3.0 / kappa
    m = round(40 * T / (2 * math.pi))
    Omega = 2 * math.pi * m / T
    chain, ramp = ChainSpec(5, kappa), GaugeRamp(3.0, T)
    spec = ramped_crow_spec(rho, Omega, 1.0, 3.0, T, dc_gradient=dc_gradient)
    c0 = eigenstate_initial_state(chain, ramp, 6).amplitudes
    b0 = initial_cavity_amplitudes(spec, chain, c0, -T)
    traj = evolve_crow(spec, chain, b0, (-T, T), times=[-T, T], rtol=1e-9)
    exact = exact_final_state_from_eigenstate(chain, ramp, 6)
    return traj, np.abs(exact) ** 2 / np.sum(np.abs(exact) ** 2)


@pytest.mark.slow
def test_ramped_phase_reproduces_gauge_transfer():
    traj, p_ideal = _fig2_ramp_run(dc_gradient=False)
    assert abs(traj.pn_series[-1, -1] - p_ideal[-1]) / p_ideal[-1] < 0.05
    assert np.max(np.abs(traj.pn_series[-1] - p_ideal)) < 0.01
    assert 0.9 < traj.norm_series[-1] < 1.1


@pytest.mark.slow
def test_explicit_dc_gradient_double_counts_gain():
    traj, p_ideal = _fig2_ramp_run(dc_gradient=True)
    # the transfer itself survives, but the gain gradient acts twice
    assert abs(traj.pn_series[-1, -1] - p_ideal[-1]) < 0.05
    assert traj.norm_series[-1] > 1e10
