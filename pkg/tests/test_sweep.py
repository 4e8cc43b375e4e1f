"""Sweep solver: clipping, callback consistency, convergence, stationarity."""

import numpy as np
import pytest

from ocsolve import (
    OcProblem,
    PmpCallbacks,
    SweepConfig,
    check_callbacks,
    clip_control,
    negate_callbacks,
    negate_sense,
    quadratic_control_problem,
    sweep_solve,
)


class TestClipControl:
    @pytest.mark.parametrize(
        "value,expected",
        [(0.5, 0.5), (1.7, 0.9), (-0.3, 0.0)],
    )
    def test_scalar_cases(self, value, expected):
        out = clip_control(np.array([value]), np.array([0.0]), np.array([0.9]))
        assert out[0] == expected

    def test_is_componentwise_median(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = rng.normal(size=4)
            b = a + rng.uniform(0.0, 2.0, 4)
            u = rng.normal(scale=3.0, size=4)
            out = clip_control(u, a, b)
            expected = np.median(np.stack([a, u, b]), axis=0)
            np.testing.assert_array_equal(out, expected)
            assert np.all(out >= a) and np.all(out <= b)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            clip_control(np.zeros(3), np.zeros(2), np.ones(2))


class TestCallbackConsistency:
    def test_rubella(self, rubella_pair):
        problem, callbacks = rubella_pair
        check = check_callbacks(problem, callbacks, n_samples=100, seed=1234)
        assert check.adjoint_rel_err <= 1e-5
        assert check.stationarity_resid <= 1e-6

    def test_quadratic(self):
        problem, callbacks = quadratic_control_problem()
        check = check_callbacks(problem, callbacks, n_samples=50, seed=0)
        assert check.adjoint_rel_err <= 1e-5
        assert check.stationarity_resid <= 1e-6

    def test_detects_broken_adjoint(self, rubella_pair):
        problem, callbacks = rubella_pair
        broken = PmpCallbacks(
            hamiltonian=callbacks.hamiltonian,
            adjoint_rhs=lambda t, x, u, lam: 1.02 * callbacks.adjoint_rhs(t, x, u, lam),
            control_update=callbacks.control_update,
        )
        check = check_callbacks(problem, broken, n_samples=50, seed=0)
        assert check.adjoint_rel_err > 1e-3

    def test_rubella_adjoint_fourth_component(self, rubella_pair):
        _, callbacks = rubella_pair
        rate = callbacks.adjoint_rhs(0.0, np.zeros(4), np.zeros(1), np.array([0.0, 0.0, 0.0, 1.0]))
        assert rate[3] == pytest.approx(0.012, abs=1e-15)

    def test_rubella_hamiltonian_origin(self, rubella_pair):
        _, callbacks = rubella_pair
        x = np.array([0.0, 0.0, 0.0, 0.0])
        value = callbacks.hamiltonian(0.0, x, np.zeros(1), np.zeros(4))
        assert value == 0.0


class TestSweepSolve:
    def test_stationary_at_zero(self):
        # f = u^2, g = 0: the characterized control is zero from the start.
        problem = OcProblem(
            0.0,
            1.0,
            [0.0],
            lambda t, x, u: np.zeros(1),
            1,
            [-1.0],
            [1.0],
            running_cost=lambda t, x, u: u[0] ** 2,
        )
        callbacks = PmpCallbacks(
            hamiltonian=lambda t, x, u, lam: float(u[0] ** 2),
            adjoint_rhs=lambda t, x, u, lam: np.zeros(1),
            control_update=lambda t, x, lam: np.zeros(1),
        )
        result = sweep_solve(problem, callbacks, SweepConfig(n_intervals=50))
        assert result.converged
        assert result.iterations <= 2
        assert np.all(result.control == 0.0)
        assert result.objective == 0.0

    def test_rubella_decoupled_components(self, rubella_sweep_3000):
        result, _ = rubella_sweep_3000
        assert result.converged
        assert np.max(np.abs(result.states[:, 3] - 1.0)) == 0.0
        assert np.max(np.abs(result.adjoints[:, 3])) == 0.0

    def test_control_feasible_every_node(self, rubella_sweep_3000):
        result, _ = rubella_sweep_3000
        assert np.all(result.control >= 0.0)
        assert np.all(result.control <= 0.9)

    def test_pmp_residual_small_at_convergence(self, rubella_sweep_3000):
        result, _ = rubella_sweep_3000
        u_inf = np.max(np.abs(result.control))
        assert result.pmp_residual <= 10.0 * 1e-3 * max(1.0, u_inf)

    def test_clipped_nodes_sign_consistent(self, rubella_sweep_3000):
        # Minimization case split: dH/du >= 0 where u sits at the lower bound.
        result, _ = rubella_sweep_3000
        u = result.control[:, 0]
        dhdu = 2.0 * u - result.adjoints[:, 0] * result.states[:, 0]
        at_lower = u <= 1e-7 * 0.9
        assert np.all(dhdu[at_lower] >= -1e-6)

    def test_max_iter_reports_nonconvergence(self, rubella_pair):
        problem, callbacks = rubella_pair
        result = sweep_solve(problem, callbacks, SweepConfig(n_intervals=200, max_iter=2))
        assert not result.converged
        assert result.iterations == 2

    def test_deterministic_bitwise(self, rubella_pair):
        problem, callbacks = rubella_pair
        cfg = SweepConfig(n_intervals=150)
        first = sweep_solve(problem, callbacks, cfg)
        second = sweep_solve(problem, callbacks, cfg)
        assert np.array_equal(first.control, second.control)
        assert np.array_equal(first.states, second.states)
        assert np.array_equal(first.adjoints, second.adjoints)
        assert first.objective == second.objective
        assert first.iterations == second.iterations
        assert first.pmp_residual == second.pmp_residual

    def test_max_form_matches_min_form(self, rubella_pair):
        problem, callbacks = rubella_pair
        cfg = SweepConfig(n_intervals=500)
        min_result = sweep_solve(problem, callbacks, cfg)
        max_result = sweep_solve(negate_sense(problem), negate_callbacks(callbacks), cfg)
        np.testing.assert_allclose(max_result.control, min_result.control, atol=1e-10, rtol=0)
        assert max_result.objective == pytest.approx(-min_result.objective, abs=1e-12)

    def test_initial_control_clipped_into_box(self):
        problem, callbacks = quadratic_control_problem(u_min=0.1, u_max=1.0)
        result = sweep_solve(problem, callbacks, SweepConfig(n_intervals=40, initial_control=-5.0))
        assert result.converged
        assert np.all(result.control >= 0.1)

    def test_quadratic_fixture(self):
        problem, callbacks = quadratic_control_problem()
        result = sweep_solve(problem, callbacks, SweepConfig(n_intervals=100))
        assert result.converged
        assert np.all(result.control == 0.0)
        assert result.objective == 0.0
        assert np.all(result.adjoints == 0.0)

    def test_quadratic_fixture_active_lower_bound(self):
        problem, callbacks = quadratic_control_problem(u_min=0.1, u_max=1.0)
        result = sweep_solve(problem, callbacks, SweepConfig(n_intervals=100))
        assert result.converged
        np.testing.assert_allclose(result.control, 0.1, atol=1e-12, rtol=0)
        assert result.objective == pytest.approx(0.01, abs=1e-12)


class TestSweepConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            SweepConfig(tol=0.0)
        with pytest.raises(ValueError):
            SweepConfig(relaxation=0.0)
        with pytest.raises(ValueError):
            SweepConfig(relaxation=1.5)
        with pytest.raises(ValueError):
            SweepConfig(max_iter=0)
