"""Reference Nash equilibrium solvers used to validate the iterative engines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .game import AggregativeGame, EnergyGameParams, energy_game

_INTERIOR_MARGIN = 1e-9


@dataclass(frozen=True)
class NeSolution:
    """Equilibrium profile with the natural-map residual at the solution.

    method records how the answer was obtained ("linear" for the closed-form
    solve, "fixed-point" for the projected iteration), so a fallback is never
    silent.
    """

    x_star: np.ndarray
    residual: float
    method: str
    iterations: int = 0


def natural_residual(game: AggregativeGame, x: np.ndarray, eta: float | None = None) -> float:
    """max_i ||x_i - P_i(x_i - eta * phi_i(x))||; zero exactly at a Nash equilibrium."""
    if eta is None:
        eta = game.bounds.m / game.bounds.lipschitz_phi**2
    moved = game.project(x - eta * game.phi(x))
    return float(np.abs(x - moved).max())


def ne_fixed_point(
    game: AggregativeGame,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    x0: np.ndarray | None = None,
) -> NeSolution:
    """Projected fixed-point iteration x <- P(x - eta Phi(x)), eta = m / L^2.

    The step makes the map a contraction for strongly monotone Phi.  Raises
    ConvergenceError with the last residual if the budget runs out.
    """
    eta = game.bounds.m / game.bounds.lipschitz_phi**2
    x = game.midpoint_profile() if x0 is None else np.array(x0, dtype=float)
    residual = np.inf
    for it in range(1, max_iters + 1):
        moved = game.project(x - eta * game.phi(x))
        residual = float(np.abs(moved - x).max())
        x = moved
        if residual <= tol:
            return NeSolution(x_star=x, residual=natural_residual(game, x, eta), method="fixed-point", iterations=it)
    raise ConvergenceError(residual=residual, iterations=max_iters)


def ne_linear(params: EnergyGameParams | None = None) -> NeSolution:
    """Closed-form equilibrium of the energy game.

    Interior stationarity of player i reads
        (2 + p0) x_i + p0 * sum_j x_j = 2 s_i - h,
    a dense linear system solved directly.  If any component lands on or
    outside its box the boxed problem is not interior and the projected
    fixed-point solver is used instead (reported via method).
    """
    params = params or EnergyGameParams()
    s = np.asarray(params.demand, dtype=float)
    p0 = params.price_slope
    n = params.n_players
    lo, hi = params.box
    matrix = (2.0 + p0) * np.eye(n) + p0 * np.ones((n, n))
    rhs = 2.0 * s - params.price_base
    x = np.linalg.solve(matrix, rhs)
    game = energy_game(params)
    if np.all(x > lo + _INTERIOR_MARGIN) and np.all(x < hi - _INTERIOR_MARGIN):
        profile = x[:, None]
        return NeSolution(
            x_star=profile,
            residual=natural_residual(game, profile),
            method="linear",
        )
    return ne_fixed_point(game)
