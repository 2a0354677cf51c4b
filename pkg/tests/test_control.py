"""Gain synthesis, observer stepping and closed-loop co-simulation."""

import numpy as np
import pytest

from semitrack import (ClosedLoopConfig, ConfigurationError,
                       NumericalError, benchmark_gains, closed_loop_simulate,
                       default_poles, design_observer, design_state_feedback,
                       find_equilibrium, lyapunov_solve, norm_trajectory,
                       observer_step)


class TestLyapunov:
    def test_identity_case(self):
        assert np.allclose(lyapunov_solve(-np.eye(2), 1.0), np.eye(2))

    def test_random_hurwitz_residuals(self, rng):
        for _ in range(20):
            # Hurwitz by construction: negative-definite symmetric part
            M = rng.normal(size=(2, 2))
            A = M - (np.abs(np.linalg.eigvals(M).real).max() + 1.0) * np.eye(2)
            Q = lyapunov_solve(A, 2.0)
            assert np.allclose(A.T @ Q + Q @ A, -4.0 * np.eye(2),
                               atol=1e-9)
            assert np.all(np.linalg.eigvalsh(Q) > 0.0)

    def test_non_hurwitz_rejected(self):
        with pytest.raises(NumericalError, match="Hurwitz"):
            lyapunov_solve(np.array([[0.0, 1.0], [-1.0, 0.0]]), 1.0)

    def test_argument_validation(self):
        with pytest.raises(ConfigurationError):
            lyapunov_solve(-np.eye(3), 1.0)
        with pytest.raises(ConfigurationError):
            lyapunov_solve(-np.eye(2), 0.0)


class TestGainSynthesis:
    def test_placement_with_rank_one_input(self, flexible):
        # the benchmark car steers only the front axle, so the effective
        # input matrix has a single active column
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        poles = np.array([-2.0, -3.0])
        F = design_state_feedback(eq.A1tilde, eq.G1tilde, poles)
        assert np.allclose(F[1, :], 0.0)   # dead rear-steer row
        placed = np.linalg.eigvals(eq.A1tilde + eq.G1tilde @ F)
        assert np.allclose(np.sort(placed.real), [-3.0, -2.0], atol=1e-8)

    def test_open_loop_poles_give_zero_gain(self, flexible):
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        poles = np.linalg.eigvals(eq.A1tilde)
        assert np.allclose(
            design_state_feedback(eq.A1tilde, eq.G1tilde, poles), 0.0)

    def test_zero_input_matrix_rejected(self):
        with pytest.raises(NumericalError, match="fixed mode"):
            design_state_feedback(-np.eye(2), np.zeros((2, 2)),
                                  [-1.0, -2.0])

    def test_uncontrollable_pair_rejected(self):
        A = np.diag([-1.0, -2.0])
        G = np.array([[1.0, 0.0], [0.0, 0.0]])   # second state unreachable
        with pytest.raises(NumericalError, match="controllable"):
            design_state_feedback(A, G, [-3.0, -4.0])

    def test_observer_placement(self, flexible):
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        poles = np.array([-8.0, -9.0])
        L = design_observer(eq.A1tilde, flexible.C, poles)
        placed = np.linalg.eigvals(eq.A1tilde + L @ flexible.C)
        assert np.allclose(np.sort(placed.real), [-9.0, -8.0], atol=1e-8)

    def test_unobservable_pair_rejected(self):
        A = np.diag([-1.0, -2.0])
        C = np.array([[1.0, 0.0]])   # second state invisible
        with pytest.raises(NumericalError, match="nobservable"):
            design_observer(A, C, [-3.0, -4.0])

    def test_undetectable_pair_names_unstable_mode(self):
        A = np.diag([0.5, -2.0])
        C = np.array([[0.0, 1.0]])
        with pytest.raises(NumericalError, match="detectable"):
            design_observer(A, C, [-3.0, -4.0])

    def test_default_poles_structure(self, flexible):
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        ctrl, obs = default_poles(eq.A1tilde, margin=0.5)
        open_eig = np.linalg.eigvals(eq.A1tilde)
        assert np.all(ctrl.real < open_eig.real.max())
        assert len(set(ctrl)) == 2
        assert np.allclose(obs, 3.0 * ctrl)

    def test_separation_principle(self, flexible):
        # observer-based loop: spectrum splits into controller poles
        # union observer poles
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        pc = np.array([-2.0, -3.0])
        po = np.array([-8.0, -9.0])
        F = design_state_feedback(eq.A1tilde, eq.G1tilde, pc)
        L = design_observer(eq.A1tilde, flexible.C, po)
        A, G, C = eq.A1tilde, eq.G1tilde, flexible.C
        big = np.block([[A + G @ F, -G @ F],
                        [np.zeros((2, 2)), A + L @ C]])
        have = np.sort(np.linalg.eigvals(big).real)
        assert np.allclose(have, [-9.0, -8.0, -3.0, -2.0], atol=1e-8)

    def test_benchmark_gains_stabilize(self, flexible):
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 200)
        g = benchmark_gains()
        assert np.max(np.linalg.eigvals(
            eq.A1tilde + eq.G1tilde @ g.F).real) < 0.0
        assert np.max(np.linalg.eigvals(
            eq.A1tilde + g.L @ flexible.C).real) < 0.0


class TestObserver:
    def test_equilibrium_is_observer_fixed_point(self, flexible):
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        g = benchmark_gains()
        Y = float(flexible.C[0] @ eq.X_star)
        xhat = observer_step(eq.X_star, Y, eq.U_star, flexible, g, 1e-4)
        assert np.allclose(xhat, eq.X_star, atol=1e-12)

    def test_innovation_direction(self, flexible):
        # exact state, biased measurement: the update moves along L
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        g = benchmark_gains()
        dt = 1e-4
        bias = 0.01
        Y = float(flexible.C[0] @ eq.X_star) + bias
        xhat = observer_step(eq.X_star, Y, eq.U_star, flexible, g, dt)
        assert np.allclose(xhat - eq.X_star,
                           -dt * bias * g.L.reshape(2), atol=1e-12)


def _loop_setup(flexible, **overrides):
    eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
    cfg = dict(gains=benchmark_gains(), target=eq, delay=0.0,
               noise_std=0.0, rng_seed=7, mode="output")
    cfg.update(overrides)
    return eq, ClosedLoopConfig(**cfg)


class TestClosedLoop:
    def test_config_validation(self, flexible):
        eq = find_equilibrium(np.zeros(2), np.zeros(2), flexible, 50)
        g = benchmark_gains()
        with pytest.raises(ConfigurationError, match="delay"):
            ClosedLoopConfig(gains=g, target=eq, delay=-1.0)
        with pytest.raises(ConfigurationError, match="mode"):
            ClosedLoopConfig(gains=g, target=eq, mode="midway")

    def test_composite_norm_contracts(self, flexible):
        eq, config = _loop_setup(flexible)
        res = closed_loop_simulate(config, np.array([0.03, -0.25]),
                                   np.array([0.027, 0.033]),
                                   np.zeros(2), flexible,
                                   dt=4e-6, T=1.0, sample_stride=2500)
        assert not res.diverged
        assert res.composite_norm[-1] < 0.15 * res.composite_norm[0]
        assert (res.estimate_error_norm[-1]
                < 0.15 * res.estimate_error_norm[0])

    def test_seed_reproducibility_bit_identical(self, flexible):
        eq, config = _loop_setup(flexible, noise_std=0.1, delay=0.002)
        kwargs = dict(X0=np.array([0.03, -0.25]),
                      z0=np.array([0.027, 0.033]), xhat0=np.zeros(2),
                      form=flexible, dt=4e-6, T=0.02, sample_stride=100)
        a = closed_loop_simulate(config, **kwargs)
        b = closed_loop_simulate(config, **kwargs)
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.composite_norm, b.composite_norm)

    def test_different_seed_changes_trajectory(self, flexible):
        eq, c1 = _loop_setup(flexible, noise_std=0.1)
        _, c2 = _loop_setup(flexible, noise_std=0.1, rng_seed=8)
        kwargs = dict(X0=np.array([0.03, -0.25]),
                      z0=np.array([0.027, 0.033]), xhat0=np.zeros(2),
                      form=flexible, dt=4e-6, T=0.02, sample_stride=100)
        a = closed_loop_simulate(c1, **kwargs)
        b = closed_loop_simulate(c2, **kwargs)
        assert not np.array_equal(a.X, b.X)

    def test_zero_delay_equals_one_step_buffer(self, flexible):
        # delay below one step rounds to the undelayed loop
        eq, c0 = _loop_setup(flexible, delay=0.0)
        _, c1 = _loop_setup(flexible, delay=1e-9)
        kwargs = dict(X0=np.array([0.01, -0.02]),
                      z0=None, xhat0=np.zeros(2), form=flexible,
                      dt=4e-6, T=0.01, sample_stride=50)
        a = closed_loop_simulate(c0, **kwargs)
        b = closed_loop_simulate(c1, **kwargs)
        assert np.array_equal(a.X, b.X)

    def test_state_mode_ignores_observer(self, flexible):
        eq, config = _loop_setup(flexible, mode="state")
        res = closed_loop_simulate(config, np.array([0.03, -0.25]),
                                   np.array([0.027, 0.033]),
                                   np.array([5.0, 5.0]), flexible,
                                   dt=4e-6, T=0.2, sample_stride=2500)
        # wildly wrong observer start must not destabilize the plant
        assert not res.diverged
        assert np.linalg.norm(res.X[-1]) < np.linalg.norm(res.X[0])

    def test_norm_fit_envelope_dominates(self, flexible):
        eq, config = _loop_setup(flexible)
        res = closed_loop_simulate(config, np.array([0.03, -0.25]),
                                   np.array([0.027, 0.033]),
                                   np.zeros(2), flexible,
                                   dt=4e-6, T=0.5, sample_stride=2500)
        fit = norm_trajectory(res)
        assert fit.sigma_hat > 0.0
        envelope = fit.beta_hat * np.exp(-fit.sigma_hat * fit.t)
        assert np.all(envelope >= fit.norm * (1.0 - 1e-12))
