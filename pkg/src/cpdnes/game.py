"""Aggregative games on box constraints.

Each player i chooses x_i in a box X_i and pays a cost f_i(x_i, v) that
depends on the other players only through the population average
v = mean_j x_j.  The pseudo-gradient used by all algorithms in this package
evaluates the aggregate at a supplied estimate z_i instead of the true mean:

    g_i(x_i, z_i) = d f_i / d x_i + (1/N) * d f_i / d v, both at v = z_i

so that g_i(x_i, mean(x)) equals the gradient of f_i along player i's own
decision (the classic aggregative-game identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class BoxConstraint:
    """Axis-aligned box [lo, hi] in R^n; lo < hi componentwise."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError(f"box bounds differ in shape: {lo.shape} vs {hi.shape}")
        if not np.all(lo < hi):
            raise ValueError("box requires lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class DecisionProfile:
    """Stacked decisions of all players, shape (N, n)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"profile must be 2-D (N, n), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile contains non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def n_players(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        """Column-stacked vector of length N*n."""
        return self.values.reshape(-1)


@dataclass(frozen=True)
class GameBounds:
    """Regularity constants of the game map.

    m: strong monotonicity of the stacked map Phi.
    lipschitz_phi: Lipschitz constant of Phi.
    lipschitz_g: Lipschitz constant of g_i in its aggregate argument.
    gradient_bound: configured bound C on pseudo-gradient norms (used by the
    privacy accounting; not derived from the game here).
    """

    m: float
    lipschitz_phi: float
    lipschitz_g: float
    gradient_bound: float


def _as_profile_array(profile, n_players: int, dim: int) -> np.ndarray:
    """Validate a profile of shape (N, n), allowing leading batch dimensions."""
    values = profile.values if isinstance(profile, DecisionProfile) else np.asarray(profile, dtype=float)
    if values.ndim < 2 or values.shape[-2:] != (n_players, dim):
        raise ValueError(
            f"profile shape {values.shape} does not match game ({n_players}, {dim})"
        )
    return values


def aggregate(profile) -> np.ndarray:
    """Population average h(x) = (1/N) sum_i x_i, shape (n,)."""
    values = profile.values if isinstance(profile, DecisionProfile) else np.asarray(profile, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"profile must be 2-D (N, n), got shape {values.shape}")
    return values.mean(axis=0)


class AggregativeGame:
    """An N-player aggregative game assembled from per-player cost partials.

    cost, cost_grad_x, cost_grad_v are callables (i, x_i, v) -> float / (n,).
    Exposing the two partials separately lets the pseudo-gradient be assembled
    generically; factories may install a vectorized closed form via
    `stacked_pseudo_gradient` which the simulation engines use directly.
    """

    def __init__(
        self,
        constraints: Sequence[BoxConstraint],
        cost: Callable[[int, np.ndarray, np.ndarray], float],
        cost_grad_x: Callable[[int, np.ndarray, np.ndarray], np.ndarray],
        cost_grad_v: Callable[[int, np.ndarray, np.ndarray], np.ndarray],
        bounds: GameBounds,
        stacked_pseudo_gradient: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    ):
        constraints = tuple(constraints)
        if not constraints:
            raise ValueError("game requires at least one player")
        dims = {c.dim for c in constraints}
        if len(dims) != 1:
            raise ValueError(f"players disagree on decision dimension: {sorted(dims)}")
        self.constraints = constraints
        self.n_players = len(constraints)
        self.dim = dims.pop()
        self.cost = cost
        self.cost_grad_x = cost_grad_x
        self.cost_grad_v = cost_grad_v
        self.bounds = bounds
        self._stacked = stacked_pseudo_gradient

    def pseudo_gradient(self, i: int, x_i: np.ndarray, z_i: np.ndarray) -> np.ndarray:
        """g_i(x_i, z_i) with the aggregate evaluated at the estimate z_i."""
        x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
        z_i = np.atleast_1d(np.asarray(z_i, dtype=float))
        gx = np.atleast_1d(np.asarray(self.cost_grad_x(i, x_i, z_i), dtype=float))
        gv = np.atleast_1d(np.asarray(self.cost_grad_v(i, x_i, z_i), dtype=float))
        return gx + gv / self.n_players

    def pseudo_gradient_stacked(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Rows g_i(x_i, z_i) for all players.

        x and z have shape (N, n); leading batch dimensions are allowed and
        broadcast through (closed-form games vectorize, others fall back to a
        per-player loop).
        """
        x = _as_profile_array(x, self.n_players, self.dim)
        z = _as_profile_array(z, self.n_players, self.dim)
        if self._stacked is not None:
            return self._stacked(x, z)
        flat_x = x.reshape(-1, self.n_players, self.dim)
        flat_z = z.reshape(-1, self.n_players, self.dim)
        out = np.stack([
            np.stack([self.pseudo_gradient(i, xb[i], zb[i]) for i in range(self.n_players)])
            for xb, zb in zip(flat_x, flat_z)
        ])
        return out.reshape(x.shape)

    def phi(self, profile) -> np.ndarray:
        """Game map Phi(x): rows g_i(x_i, h(x)), shape (N, n)."""
        x = _as_profile_array(profile, self.n_players, self.dim)
        v = x.mean(axis=-2, keepdims=True)
        return self.pseudo_gradient_stacked(x, np.broadcast_to(v, x.shape))

    def project(self, profile) -> np.ndarray:
        """Componentwise projection of each row onto its player's box."""
        x = _as_profile_array(profile, self.n_players, self.dim)
        lo = np.stack([c.lo for c in self.constraints])
        hi = np.stack([c.hi for c in self.constraints])
        return np.clip(x, lo, hi)

    def midpoint_profile(self) -> np.ndarray:
        return np.stack([c.midpoint for c in self.constraints])


def game_map(game: AggregativeGame, x, z) -> np.ndarray:
    """Stacked pseudo-gradients g_i(x_i, z_i); with z_i = h(x) this is Phi(x)."""
    return game.pseudo_gradient_stacked(
        _as_profile_array(x, game.n_players, game.dim),
        _as_profile_array(z, game.n_players, game.dim),
    )


def project(x: np.ndarray, box: BoxConstraint) -> np.ndarray:
    """Euclidean projection onto a box (exact: componentwise clip)."""
    return box.project(np.asarray(x, dtype=float))


def with_clipped_gradients(game: AggregativeGame, cap: float) -> AggregativeGame:
    """Wrap a game so every pseudo-gradient is norm-clipped to `cap`.

    Off by default everywhere; useful when a configured gradient bound must
    hold by construction rather than by assumption.
    """
    if cap <= 0:
        raise ValueError("clip cap must be positive")

    def clip_rows(g: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(g, axis=-1, keepdims=True)
        scale = np.minimum(1.0, cap / np.maximum(norms, 1e-300))
        return g * scale

    inner = game.pseudo_gradient_stacked

    clipped = AggregativeGame(
        game.constraints,
        game.cost,
        game.cost_grad_x,
        game.cost_grad_v,
        game.bounds,
        stacked_pseudo_gradient=lambda x, z: clip_rows(inner(x, z)),
    )
    return clipped


@dataclass(frozen=True)
class EnergyGameParams:
    """Energy consumption game: player i pays (x_i - s_i)^2 + price * x_i
    where the unit price is price_slope * (total consumption) + price_base.

    demand: nominal consumptions s_i, one scalar per player.
    box: shared consumption limits (lo, hi).
    gradient_bound: configured constant C for privacy accounting.
    """

    demand: tuple = (56.0, 40.0, 43.0, 60.0, 50.0)
    price_slope: float = 0.05
    price_base: float = 8.0
    box: tuple = (30.0, 50.0)
    gradient_bound: float = 15.0

    def __post_init__(self):
        if len(self.demand) < 2:
            raise ValueError("energy game requires at least two players")
        if self.price_slope <= 0:
            raise ValueError("price_slope must be positive")
        lo, hi = self.box
        if not lo < hi:
            raise ValueError("box requires lo < hi")

    @property
    def n_players(self) -> int:
        return len(self.demand)


def energy_game_bounds(params: EnergyGameParams, gradient_bound: float | None = None) -> GameBounds:
    """Closed-form regularity constants of the energy game.

    The stacked map is linear with Jacobian (2 + p0) I + p0 11^T, so the
    monotonicity constant is 2 + p0 and the Lipschitz constant 2 + p0 + N p0;
    the aggregate sensitivity is N p0.  The gradient bound is configured, not
    derived.
    """
    p0 = params.price_slope
    n = params.n_players
    cap = params.gradient_bound if gradient_bound is None else gradient_bound
    return GameBounds(
        m=2.0 + p0,
        lipschitz_phi=2.0 + p0 + n * p0,
        lipschitz_g=n * p0,
        gradient_bound=cap,
    )


def energy_game(params: EnergyGameParams | None = None) -> AggregativeGame:
    """Build the energy consumption game with a vectorized pseudo-gradient.

    Closed form: g_i(x_i, z_i) = 2 (x_i - s_i) + N p0 z_i + h + p0 x_i.
    """
    params = params or EnergyGameParams()
    s = np.asarray(params.demand, dtype=float)
    p0 = params.price_slope
    h = params.price_base
    n = params.n_players
    lo, hi = params.box
    box = BoxConstraint(np.array([lo]), np.array([hi]))

    def cost(i, x_i, v):
        # f_i(x_i, v) with total consumption written as N * v
        x_i = float(np.asarray(x_i).reshape(()))
        v = float(np.asarray(v).reshape(()))
        return (x_i - s[i]) ** 2 + (p0 * n * v + h) * x_i

    def cost_grad_x(i, x_i, v):
        return 2.0 * (np.asarray(x_i, dtype=float) - s[i]) + p0 * n * np.asarray(v, dtype=float) + h

    def cost_grad_v(i, x_i, v):
        return p0 * n * np.asarray(x_i, dtype=float)

    def stacked(x, z):
        return 2.0 * (x - s[:, None]) + n * p0 * z + h + p0 * x

    return AggregativeGame(
        constraints=[box] * n,
        cost=cost,
        cost_grad_x=cost_grad_x,
        cost_grad_v=cost_grad_v,
        bounds=energy_game_bounds(params),
        stacked_pseudo_gradient=stacked,
    )
