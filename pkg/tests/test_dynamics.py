import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reservoir_qfi import (
    AmplitudeTrajectory,
    ConfigurationError,
    DivergenceError,
    DomainError,
    EstimandSelector,
    SpectralDensity,
    TimeGrid,
    amplitude_sensitivity,
    decoherence_rates,
    evaluate,
    find_bound_state,
    level_shift,
    markovian_amplitude,
    markovian_rates,
    solve_amplitude,
)
from reservoir_qfi import dynamics, finite_diff

from oracles import jaynes_cummings


def test_time_grid():
    g = TimeGrid(2.0, 4)
    assert g.dt == 0.5
    np.testing.assert_array_equal(g.times, [0, 0.5, 1.0, 1.5, 2.0])
    assert g.refined().n_steps == 8
    for bad in [(0.0, 4), (1.0, 0), (1.0, 2.5)]:
        with pytest.raises(DomainError):
            TimeGrid(*bad)
    J = SpectralDensity.ohmic(0.1, 1.0, 30.0)
    assert TimeGrid.default(J, 10.0).dt <= 0.1 / 30.0


def test_free_evolution():
    J = SpectralDensity.ohmic(0.0, 1.0, 10.0)
    traj = solve_amplitude(J, 1.0, TimeGrid(20.0, 1000))
    np.testing.assert_allclose(traj.c, np.exp(-1j * traj.times), atol=1e-13)
    assert traj.c[0] == 1.0
    rates = decoherence_rates(traj)
    dt2 = traj.grid.dt ** 2
    # exact in the interior; the one-sided end stencils carry an O(dt^2) error
    assert np.max(np.abs(rates.gamma[1:-1])) < 1e-12
    assert np.max(np.abs(rates.gamma)) < dt2
    np.testing.assert_allclose(rates.Omega, 2.0, atol=dt2)


@pytest.mark.parametrize("gamma,lam", [(0.1, 1.0), (0.5, 0.2), (1.0, 5.0), (2.0, 0.5)])
def test_jaynes_cummings_closed_form(gamma, lam):
    J = SpectralDensity.direct_kernel(gamma, lam, 1.0)
    grid = TimeGrid.default(J, 20.0)
    c = solve_amplitude(J, 1.0, grid).c
    np.testing.assert_allclose(c, jaynes_cummings(grid.times, 1.0, gamma, lam), rtol=0, atol=1e-8)


def test_detuned_kernel_two_routes():
    """Detuned exponential kernel: the amplitude obeys a linear 2x2 ODE, solved by expm."""
    from scipy.linalg import expm

    gamma, lam, wl = 0.3, 0.8, 1.4
    J = SpectralDensity.direct_kernel(gamma, lam, wl)
    grid = TimeGrid.default(J, 15.0)
    c = solve_amplitude(J, 1.0, grid).c
    # c' = -i c - m,  m' = (gamma lam / 2) c - (lam + i wl) m
    A = np.array([[-1j, -1.0], [gamma * lam / 2, -(lam + 1j * wl)]])
    ref = np.array([(expm(A * t) @ np.array([1.0, 0.0]))[0] for t in grid.times])
    np.testing.assert_allclose(c, ref, rtol=0, atol=1e-9)


@pytest.mark.parametrize("n", [1, 2, 37, 300, 1500])
@pytest.mark.parametrize("leaf", [1, 8, 128])
def test_fast_history_matches_direct(n, leaf):
    J = SpectralDensity.ohmic(0.1, 0.5, 10.0)
    kernel = lambda x: dynamics.memory_kernel(J, x) * np.exp(1j * x)
    direct = dynamics._trapezoid_direct(kernel, 0.01, n)
    fast = dynamics._trapezoid(kernel, 0.01, n, leaf)
    np.testing.assert_allclose(fast, direct, rtol=0, atol=1e-13)


def test_convergence_orders():
    J = SpectralDensity.direct_kernel(0.5, 0.2, 1.0)
    errs_plain, errs_rich = [], []
    for n in (200, 400, 800):
        grid = TimeGrid(10.0, n)
        exact = jaynes_cummings(grid.times, 1.0, 0.5, 0.2)
        errs_plain.append(abs(solve_amplitude(J, 1.0, grid, extrapolate=False).c[-1] - exact[-1]))
        errs_rich.append(abs(solve_amplitude(J, 1.0, grid).c[-1] - exact[-1]))
    plain = np.log2(np.array(errs_plain[:-1]) / errs_plain[1:])
    rich = np.log2(np.array(errs_rich[:-1]) / errs_rich[1:])
    assert np.all(plain > 1.8)
    assert np.all(rich > 3.5)


@settings(max_examples=15)
@given(st.floats(0.0, 0.5), st.floats(0.3, 2.0), st.floats(1.0, 20.0))
def test_contractive(eta, s, omega_c):
    J = SpectralDensity.ohmic(eta, s, omega_c)
    traj = solve_amplitude(J, 1.0, TimeGrid.default(J, 5.0))
    assert traj.c[0] == 1.0
    assert np.all(np.abs(traj.c) <= 1 + 1e-6)
    assert np.all(traj.p <= 1 + 2e-6)


def test_coarse_step_is_rejected():
    J = SpectralDensity.ohmic(0.1, 1.0, 30.0)
    with pytest.raises(ConfigurationError):
        solve_amplitude(J, 1.0, TimeGrid(10.0, 100))
    with pytest.raises(DomainError):
        solve_amplitude(J, 0.0, TimeGrid(1.0, 1000))


def test_divergence_names_the_step():
    with pytest.raises(DivergenceError) as info:
        dynamics._trapezoid(lambda x: -5.0 * np.ones_like(x, dtype=complex), 0.01, 500)
    assert info.value.step > 0
    assert info.value.value > 1 + 1e-3


def test_markovian_example_and_rates():
    J = SpectralDensity.ohmic(0.1, 1.0, 10.0)
    kappa, shift = markovian_rates(J, 1.0)
    assert kappa == pytest.approx(math.pi * 0.1 * math.exp(-0.1), rel=1e-14)
    assert shift == pytest.approx(level_shift(J, 1.0), rel=1e-14)
    traj = markovian_amplitude(J, 1.0, TimeGrid(10.0, 2000))
    rates = decoherence_rates(traj)
    np.testing.assert_allclose(rates.gamma, 2 * kappa, rtol=1e-5)
    np.testing.assert_allclose(rates.Omega, 2 * (1 + shift), rtol=1e-5)
    free = markovian_amplitude(SpectralDensity.ohmic(0.0, 1.0, 10.0), 1.0, TimeGrid(5.0, 10)).c
    np.testing.assert_allclose(np.abs(free), 1.0, rtol=0, atol=1e-15)


def test_markovian_limit():
    J = SpectralDensity.ohmic(0.01, 1.0, 5.0)
    grid = TimeGrid.default(J, 5.0)
    exact = np.abs(solve_amplitude(J, 1.0, grid).c)
    markov = np.abs(markovian_amplitude(J, 1.0, grid).c)
    assert np.max(np.abs(exact / markov - 1)) < 0.05


def test_rate_consistency():
    J = SpectralDensity.ohmic(0.1, 0.5, 10.0)
    residuals = []
    for n in (1000, 2000, 4000):
        traj = solve_amplitude(J, 1.0, TimeGrid(10.0, n))
        rates = decoherence_rates(traj)
        dp = np.gradient(traj.p, traj.grid.dt, edge_order=2)
        residuals.append(np.max(np.abs(dp + rates.gamma * traj.p)))
    assert residuals[0] < 1e-3
    assert np.all(np.log2(np.array(residuals[:-1]) / residuals[1:]) > 1.8)


def test_rates_mask_vanishing_amplitude():
    grid = TimeGrid(1.0, 4)
    c = np.array([1.0, 0.5, 0.0, 0.5, 0.25], dtype=complex)
    rates = decoherence_rates(AmplitudeTrajectory(grid, c))
    assert rates.gamma.mask.tolist() == [False, False, True, False, False]
    assert np.all(np.isfinite(rates.gamma.compressed()))


def test_bound_state_plateau():
    J = SpectralDensity.ohmic(0.1, 1.0, 30.0)
    traj = solve_amplitude(J, 1.0, TimeGrid.default(J, 200.0))
    Z = find_bound_state(J).Z
    late = traj.times >= 150
    assert np.abs(traj.c[late]).mean() == pytest.approx(Z, rel=0.02)
    gamma = decoherence_rates(traj).gamma
    assert np.max(np.abs(gamma[late])) < 1e-3


def test_markovian_eta_sensitivity_analytic():
    J = SpectralDensity.ohmic(0.1, 1.0, 10.0)
    grid = TimeGrid(5.0, 200)
    dc = amplitude_sensitivity(J, 1.0, grid, EstimandSelector("eta"), solver=markovian_amplitude)
    c = markovian_amplitude(J, 1.0, grid).c
    d_abs = np.real(np.conj(c) * dc) / np.abs(c)
    expected = -math.pi * evaluate(J, 1.0) * grid.times * np.abs(c) / 0.1
    np.testing.assert_allclose(d_abs, expected, rtol=1e-6, atol=1e-12)


def test_sensitivity_zero_coupling():
    J = SpectralDensity.ohmic(0.0, 1.0, 10.0)
    dc = amplitude_sensitivity(J, 1.0, TimeGrid(5.0, 500), EstimandSelector("s"))
    assert np.all(dc == 0)


def test_sensitivity_one_sided_at_domain_edge():
    J = SpectralDensity.ohmic(0.0, 1.0, 10.0)
    grid = TimeGrid.default(J, 5.0)
    sel = EstimandSelector("eta")
    dc = amplitude_sensitivity(J, 1.0, grid, sel)
    # at eta = 0: dc/deta = -int_0^t int_0^t' nu(t'-tau) c0(tau) ... compare to a small forward solve
    h = 1e-6
    fwd = (solve_amplitude(sel.with_value(J, h), 1.0, grid).c - solve_amplitude(J, 1.0, grid).c) / h
    np.testing.assert_allclose(dc, fwd, rtol=1e-4, atol=1e-8)


def test_finite_difference_orders():
    assert finite_diff.observed_order(np.exp, 0.3, 1e-2) == pytest.approx(2.0, abs=0.05)
    one_sided = finite_diff.derivative(np.sqrt, 0.0, 1e-3, lambda v: v >= 0)
    assert one_sided.one_sided
    d = finite_diff.derivative(np.log, 1.0, 1e-3, lambda v: v >= 1.0)
    assert d.one_sided and d.value == pytest.approx(1.0, rel=1e-5)
    with pytest.raises(DomainError):
        finite_diff.derivative(np.exp, 0.0, 1e-3, lambda v: False)
    assert finite_diff.derivative(np.exp, 0.0, 1e-4).value == pytest.approx(1.0, rel=1e-8)


def test_metadata():
    J = SpectralDensity.ohmic(0.1, 0.5, 10.0)
    traj = solve_amplitude(J, 1.0, TimeGrid(1.0, 200))
    assert traj.metadata["method"] == "volterra"
    assert traj.metadata["dt"] == 0.005
    assert SpectralDensity.from_dict(traj.metadata["spectral_density"]) == J
