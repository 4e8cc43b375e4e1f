"""Shared fixtures: the expensive N=3000 rubella solves run once per session."""

import time

import pytest

from ocsolve import DirectConfig, SweepConfig, rubella_problem, solve_direct, sweep_solve


@pytest.fixture(scope="session")
def rubella_pair():
    return rubella_problem()


@pytest.fixture(scope="session")
def rubella_sweep_3000(rubella_pair):
    """(SweepResult, wall seconds) for the benchmark sweep run."""
    problem, callbacks = rubella_pair
    start = time.perf_counter()
    result = sweep_solve(problem, callbacks, SweepConfig(n_intervals=3000, tol=1e-3, relaxation=0.5, max_iter=500))
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def rubella_direct_3000(rubella_pair):
    """(DirectResult, wall seconds) for the benchmark direct run."""
    problem, _ = rubella_pair
    start = time.perf_counter()
    result = solve_direct(problem, DirectConfig(n_intervals=3000))
    return result, time.perf_counter() - start
