"""Differential-privacy accounting for quantized broadcast messages.

An eavesdropper sees every grid point a player transmits.  Changing one
player's objective perturbs its estimate trajectory by at most
||Delta y_k||_1 <= 2 C sqrt(n) sum_{s<k} alpha_s beta_s, and a perturbation d
moves the per-coordinate output distribution of the dithered quantizer by at
most |d|/theta in total variation.  The (0, delta_k) budget of round k is
therefore min(1, sensitivity_k / theta); with a hyperbolic step product
alpha_k beta_k = c4/(c5 k + 1) the cumulative sensitivity telescopes into the
logarithmic closed form used for published coefficient tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .game import AggregativeGame, EnergyGameParams, energy_game
from .schedule import StepSchedule, dp_product_check


def delta_closed_form(k, c4: float, c5: float, C: float, n: int, theta: float):
    """delta_k = min(1, (2 C c4 sqrt(n))/(c5 theta) * ln(c5 k + 1)).

    Valid when the step product is exactly c4/(c5 k + 1); accepts scalar or
    array k.
    """
    _validate(C, n, theta)
    if c4 <= 0 or c5 <= 0:
        raise ValueError("c4 and c5 must be positive")
    k = np.asarray(k, dtype=float)
    coeff = 2.0 * C * c4 * math.sqrt(n) / (c5 * theta)
    return np.minimum(1.0, coeff * np.log(c5 * k + 1.0))


def delta_partial_sum(schedule: StepSchedule, k: int, C: float, n: int, theta: float) -> float:
    """delta_k = min(1, (2 C sqrt(n)/theta) * sum_{s<k} alpha_s beta_s).

    Exact cumulative-sensitivity evaluation for any schedule shape.
    """
    _validate(C, n, theta)
    if k < 0:
        raise ValueError("k must be nonnegative")
    partial = float(schedule.product(np.arange(k)).sum()) if k > 0 else 0.0
    return min(1.0, 2.0 * C * math.sqrt(n) / theta * partial)


def single_step_gap(y, y_prime, theta: float) -> float:
    """Worst-case one-round observation gap between two estimate vectors.

    Per coordinate the dithered quantizer's output distributions differ by at
    most min(1, |y_j - y'_j| / theta); coordinates are independent, so the
    gaps add, clipped to one overall.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    y_prime = np.atleast_1d(np.asarray(y_prime, dtype=float))
    if y.shape != y_prime.shape:
        raise ValueError(f"adjacent estimates differ in shape: {y.shape} vs {y_prime.shape}")
    per_coord = np.minimum(1.0, np.abs(y - y_prime) / theta)
    return float(min(1.0, per_coord.sum()))


def dsc_budget(k, r_base: float, schedule: StepSchedule, C: float, n: int, theta: float):
    """Privacy budget of dynamic-scaling compression at round k.

    The effective grid at round k is r_base^k * theta, so the budget
    min(1, (2 C sqrt(n) / (r_base^k theta)) * sum_{s<k} alpha_s beta_s)
    inflates exponentially while the sensitivity shrinks only polynomially.
    Accepts scalar or array k.
    """
    _validate(C, n, theta)
    if not 0 < r_base < 1:
        raise ValueError("r_base must lie in (0, 1)")
    k_arr = np.atleast_1d(np.asarray(k, dtype=int))
    horizon = int(k_arr.max()) if k_arr.size else 0
    sums = schedule.product_partial_sums(horizon)
    # r_base^k underflows at large k; the resulting inf collapses to the cap.
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        scale = 2.0 * C * math.sqrt(n) / (r_base ** k_arr.astype(float) * theta)
        out = np.minimum(1.0, scale * sums[k_arr])
    return float(out[0]) if np.isscalar(k) or np.asarray(k).ndim == 0 else out


@dataclass(frozen=True)
class AdjacentPair:
    """Two games differing in exactly one player's objective.

    This is the unit of adjacency for the privacy guarantee: an observer of
    the broadcast stream should not be able to tell which of the two games
    produced it.
    """

    game_a: AggregativeGame
    game_b: AggregativeGame
    changed_player: int

    def __post_init__(self):
        if self.game_a.n_players != self.game_b.n_players:
            raise ValueError("adjacent games must have the same player count")
        if self.game_a.dim != self.game_b.dim:
            raise ValueError("adjacent games must share the decision dimension")
        if not 0 <= self.changed_player < self.game_a.n_players:
            raise ValueError("changed_player out of range")


def adjacent_energy_pair(
    params: EnergyGameParams, player: int, new_demand: float
) -> AdjacentPair:
    """Energy-game pair where only one player's demand parameter differs."""
    if not 0 <= player < params.n_players:
        raise ValueError("player out of range")
    if new_demand == params.demand[player]:
        raise ValueError("adjacent games must actually differ")
    demand = list(params.demand)
    demand[player] = float(new_demand)
    return AdjacentPair(
        game_a=energy_game(params),
        game_b=energy_game(replace(params, demand=tuple(demand))),
        changed_player=player,
    )


@dataclass(frozen=True)
class PrivacyLedger:
    """Per-round (0, delta_k) budgets with the sensitivities behind them.

    mode is "closed-form" when the schedule's step product is exactly
    hyperbolic and "partial-sum" otherwise; delta_series[k] = min(1,
    sensitivity_series[k] / theta) always holds.
    """

    mode: str
    theta: float
    delta_series: np.ndarray
    sensitivity_series: np.ndarray

    def __post_init__(self):
        if self.delta_series.shape != self.sensitivity_series.shape:
            raise ValueError("series length mismatch")

    def saturation_iteration(self) -> int | None:
        """First round with delta_k = 1, or None if never saturated."""
        hit = np.nonzero(self.delta_series >= 1.0)[0]
        return int(hit[0]) if hit.size else None


def build_ledger(
    schedule: StepSchedule,
    theta: float,
    horizon: int,
    C: float = 15.0,
    n: int = 1,
    mode: str = "auto",
    r_base: float | None = None,
) -> PrivacyLedger:
    """Budgets for rounds 0..horizon.

    mode "auto" picks the closed form when valid, else the partial sum.
    Passing r_base accounts for dynamic scaling: the sensitivity is measured
    against the shrunken grid r_base^k * theta.
    """
    _validate(C, n, theta)
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    k = np.arange(horizon + 1)
    base = 2.0 * C * math.sqrt(n)
    if r_base is not None:
        if not 0 < r_base < 1:
            raise ValueError("r_base must lie in (0, 1)")
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            sens = base * schedule.product_partial_sums(horizon) / r_base ** k.astype(float)
        picked = "partial-sum"
    else:
        product = dp_product_check(schedule)
        if mode == "auto":
            picked = "closed-form" if product is not None else "partial-sum"
        elif mode in ("closed-form", "partial-sum"):
            picked = mode
        else:
            raise ValueError(f"unknown ledger mode: {mode!r}")
        if picked == "closed-form":
            if product is None:
                raise ValueError("closed-form ledger requires omega1 + omega2 = 1")
            c4, c5 = product
            sens = base * c4 / c5 * np.log(c5 * k.astype(float) + 1.0)
        else:
            sens = base * schedule.product_partial_sums(horizon)
    return PrivacyLedger(
        mode=picked,
        theta=theta,
        delta_series=np.minimum(1.0, sens / theta),
        sensitivity_series=sens,
    )


def _validate(C: float, n: int, theta: float) -> None:
    if C <= 0:
        raise ValueError("gradient bound C must be positive")
    if n < 1:
        raise ValueError("dimension n must be at least 1")
    if theta <= 0:
        raise ValueError("theta must be positive")
