"""Reference equilibrium solvers cross-checked against each other."""

import numpy as np
import pytest

from cpdnes.errors import ConvergenceError
from cpdnes.game import EnergyGameParams, energy_game
from cpdnes.oracle import natural_residual, ne_fixed_point, ne_linear

KNOWN_NE = np.array([45.8749, 30.2651, 33.1919, 49.7773, 40.0212])


def test_linear_solve_reproduces_known_equilibrium():
    sol = ne_linear()
    assert sol.method == "linear"
    assert sol.iterations == 0
    assert np.all(np.abs(sol.x_star.ravel() - KNOWN_NE) <= 1e-3)
    assert sol.residual < 1e-8


def test_fixed_point_agrees_with_linear_solve():
    game = energy_game()
    fp = ne_fixed_point(game)
    lin = ne_linear()
    assert fp.method == "fixed-point"
    assert fp.iterations > 0
    assert np.allclose(fp.x_star, lin.x_star, atol=1e-6)


def test_natural_residual_vanishes_at_equilibrium():
    game = energy_game()
    x_star = ne_linear().x_star
    assert natural_residual(game, x_star) < 1e-9
    assert natural_residual(game, game.midpoint_profile()) > 0.1


def test_linear_solve_satisfies_stationarity():
    # (2 + p0) x_i + p0 sum_j x_j = 2 s_i - h at the interior solution
    params = EnergyGameParams()
    x = ne_linear(params).x_star.ravel()
    lhs = (2.0 + params.price_slope) * x + params.price_slope * x.sum()
    rhs = 2.0 * np.asarray(params.demand) - params.price_base
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_boundary_equilibrium_falls_back_to_fixed_point():
    # demand high enough to pin every player at its upper limit
    sol = ne_linear(EnergyGameParams(demand=(70.0,) * 5))
    assert sol.method == "fixed-point"
    assert np.allclose(sol.x_star, 50.0)
    assert sol.residual < 1e-9


def test_fixed_point_honors_custom_start():
    game = energy_game()
    x0 = np.full((5, 1), 31.0)
    sol = ne_fixed_point(game, x0=x0)
    assert np.allclose(sol.x_star.ravel(), KNOWN_NE, atol=1e-3)


def test_fixed_point_raises_when_budget_exhausted():
    game = energy_game()
    with pytest.raises(ConvergenceError) as err:
        ne_fixed_point(game, tol=1e-30, max_iters=5)
    assert err.value.iterations == 5
    assert err.value.residual > 0
