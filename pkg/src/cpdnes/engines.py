"""Distributed Nash-seeking dynamics over a communication graph.

All variants share one skeleton.  Every player holds a decision x_i and a
dynamic-average estimate y_i of the population mean, initialized y_i = x_i.
Each round, with step sizes (alpha_k, beta_k),

    x_{i,k+1} = P_i[ x_{i,k} - alpha_k beta_k g_i(x_{i,k}, y_{i,k}) ]
    y_{i,k+1} = y_{i,k} + beta_k sum_j w_ij (m_j - m_i) + x_{i,k+1} - x_{i,k}

where m_j is what player j broadcast this round.  The variants differ only in
the broadcast and its bit cost:

    cp-dnes       m_j = C(y_j), an unbiased compressor, n * b bits
    conventional  m_j = y_j verbatim, n * 32 bits
    np-dnes       m_j = y_j + zeta_j, Gaussian noise of variance rho^k,
                  n * 32 bits; receivers use m_j but each player keeps its
                  own y_i exact, so the noise does not cancel and leaves a
                  persistent offset (an approximate equilibrium)
    dsc-dnes      m_j = r_k C(y_j / r_k) with r_k = r^k on a fixed b-bit
                  grid; the shrinking range eventually cannot represent
                  y_j / r_k, which is a reported fault, not a clipped one

Because the disagreement term has zero column sums, the player average of y
tracks the player average of x exactly (up to roundoff) for cp-dnes,
conventional, and dsc-dnes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .compress import FLOAT_BITS, QuantizerParams, _stochastic_round
from .errors import NumericFault
from .game import AggregativeGame
from .network import Topology, laplacian
from .schedule import StepSchedule

VARIANT_CP = "cp-dnes"
VARIANT_CONVENTIONAL = "conventional"
VARIANT_NP = "np-dnes"
VARIANT_DSC = "dsc-dnes"
VARIANTS = (VARIANT_CP, VARIANT_CONVENTIONAL, VARIANT_NP, VARIANT_DSC)


@dataclass
class PlayerState:
    """One player's decision x and aggregate estimate y, both shape (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if self.x.shape != self.y.shape:
            raise ValueError(f"x and y differ in shape: {self.x.shape} vs {self.y.shape}")


@dataclass(frozen=True)
class EngineConfig:
    """Everything one variant needs to run.

    eta: conventional-only; None uses the matched step alpha_k * beta_k,
         a float uses that constant step.
    consensus: conventional-only; "beta" weights the disagreement term by
         beta_k, "unit" applies it unweighted (requires mixing-stable edge
         weights, i.e. spectral radius of I - L at most one).
    truncate_on_fault: stop and keep the partial record instead of raising
         when a round faults (used to compare against divergent baselines).
    """

    game: AggregativeGame
    topology: Topology
    schedule: StepSchedule
    variant: str = VARIANT_CP
    compressor: object | None = None
    iterations: int = 5000
    init: object = "midpoint"
    x_star: np.ndarray | None = None
    eta: float | None = None
    consensus: str = "beta"
    noise_decay: float = 0.91
    r_base: float = 0.87
    dsc_bits: int = 8
    ymax: float = 90.0
    truncate_on_fault: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.topology.n_players != self.game.n_players:
            raise ValueError(
                f"topology has {self.topology.n_players} players, game has {self.game.n_players}"
            )
        if self.variant == VARIANT_CP and self.compressor is None:
            raise ValueError("cp-dnes requires a compressor")
        if self.consensus not in ("beta", "unit"):
            raise ValueError(f"consensus must be 'beta' or 'unit', got {self.consensus!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not 0 < self.noise_decay <= 1:
            raise ValueError("noise_decay must lie in (0, 1]")
        if not 0 < self.r_base < 1:
            raise ValueError("r_base must lie in (0, 1)")

    def initial_profile(self) -> np.ndarray:
        if isinstance(self.init, str):
            if self.init != "midpoint":
                raise ValueError(f"unknown init rule {self.init!r}")
            return self.game.midpoint_profile()
        x0 = np.asarray(self.init, dtype=float)
        if x0.shape != (self.game.n_players, self.game.dim):
            raise ValueError(
                f"init profile shape {x0.shape} does not match game "
                f"({self.game.n_players}, {self.game.dim})"
            )
        return x0.copy()

    def bits_per_player_round(self) -> int:
        n = self.game.dim
        if self.variant == VARIANT_CP:
            return self.compressor.bits_per_player(n)
        if self.variant == VARIANT_DSC:
            return n * self.dsc_bits
        return n * FLOAT_BITS

    def dsc_quantizer_params(self) -> QuantizerParams:
        """Fixed b-bit grid spanning the envelope: theta = ymax / 2^b."""
        return QuantizerParams(theta=self.ymax / 2.0**self.dsc_bits, bits=self.dsc_bits, ymax=self.ymax)


@dataclass
class RunRecord:
    """Per-iteration trace of one trial.

    err_sq[k] = ||x_k - x_star||^2 when a reference is supplied, otherwise
    profiles[k] snapshots the full decision profile.  bits_cum[k] counts bits
    transmitted network-wide before iterate k existed; avg_residual[k] is
    ||mean_i y - mean_i x||_inf.  iterations is the number of completed
    rounds, which is smaller than requested only for a truncated (faulted)
    run; fault then carries the exception.
    """

    seed: int
    iterations: int
    bits_cum: np.ndarray
    avg_residual: np.ndarray
    err_sq: np.ndarray | None = None
    profiles: np.ndarray | None = None
    fault: NumericFault | None = None


def _states_to_arrays(states: Sequence[PlayerState]) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([s.x for s in states])
    y = np.stack([s.y for s in states])
    return x, y


def _arrays_to_states(x: np.ndarray, y: np.ndarray) -> list[PlayerState]:
    return [PlayerState(x=x[i].copy(), y=y[i].copy()) for i in range(x.shape[0])]


class _Stepper:
    """Precomputed per-run quantities plus the one-round transition.

    Operates on stacked arrays with an optional leading trial axis, so a
    hundred Monte-Carlo trials advance in the same vectorized calls.
    """

    def __init__(self, cfg: EngineConfig):
        self.cfg = cfg
        self.lap = laplacian(cfg.topology).matrix
        self.weights = cfg.topology.weights
        self.lo = np.stack([c.lo for c in cfg.game.constraints])
        self.hi = np.stack([c.hi for c in cfg.game.constraints])
        k = np.arange(max(cfg.iterations, 1))
        self.alpha = cfg.schedule.alpha(k)
        self.beta = cfg.schedule.beta(k)
        if cfg.variant == VARIANT_CONVENTIONAL and cfg.eta is not None:
            self.step = np.full_like(self.alpha, float(cfg.eta))
        else:
            self.step = self.alpha * self.beta
        if cfg.variant == VARIANT_NP:
            self.noise_std = np.sqrt(cfg.noise_decay ** k.astype(float))
        if cfg.variant == VARIANT_DSC:
            self.dsc_params = cfg.dsc_quantizer_params()
            with np.errstate(under="ignore"):
                self.r = cfg.r_base ** k.astype(float)

    def draws_per_round(self) -> str | None:
        """Random-draw kind consumed each round: 'uniform', 'normal', or None."""
        cfg = self.cfg
        if cfg.variant == VARIANT_CP:
            return "uniform" if cfg.compressor.stochastic else None
        if cfg.variant == VARIANT_NP:
            return "normal"
        if cfg.variant == VARIANT_DSC:
            return "uniform"
        return None

    def advance(self, x: np.ndarray, y: np.ndarray, k: int, draw: np.ndarray | None):
        """One round; returns (x_new, y_new).  Raises NumericFault on overflow."""
        cfg = self.cfg
        beta_k = self.beta[k]
        g = cfg.game.pseudo_gradient_stacked(x, y)
        x_new = np.clip(x - self.step[k] * g, self.lo, self.hi)
        delta = x_new - x

        if cfg.variant == VARIANT_CP:
            comp = cfg.compressor
            if comp.range_limit is not None:
                self._check_range(y, comp.range_limit, k, "estimate")
            q = comp.encode(y, draw)
            y_new = y - beta_k * (self.lap @ q) + delta
        elif cfg.variant == VARIANT_CONVENTIONAL:
            weight = beta_k if cfg.consensus == "beta" else 1.0
            y_new = y - weight * (self.lap @ y) + delta
        elif cfg.variant == VARIANT_NP:
            noisy = self.noise_std[k] * draw
            y_new = y - beta_k * (self.lap @ y) + beta_k * (self.weights @ noisy) + delta
        else:  # dsc-dnes
            scaled = y / self.r[k]
            self._check_range(scaled, self.dsc_params.range_limit, k, "scaled estimate")
            q = self.r[k] * _stochastic_round(scaled, self.dsc_params.theta, draw)
            y_new = y - beta_k * (self.lap @ q) + delta

        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(y_new))):
            raise NumericFault(k, f"{cfg.variant}: non-finite state")
        return x_new, y_new

    def _check_range(self, values: np.ndarray, limit: float, k: int, what: str) -> None:
        finite = np.isfinite(values)
        bad = ~finite | (np.abs(values) >= limit)
        if bad.any():
            idx = tuple(int(v) for v in np.argwhere(bad)[0])
            player = idx[-2] if len(idx) >= 2 else idx[0]
            trial = f"trial {idx[0]}, " if len(idx) >= 3 else ""
            raise NumericFault(
                k,
                f"{self.cfg.variant}: {what} out of representable range at {trial}"
                f"player {player} (|{values[idx]:.6g}| >= {limit:.6g})",
            )


def _one_round(states: Sequence[PlayerState], k: int, cfg: EngineConfig, rng) -> list[PlayerState]:
    stepper = _Stepper(replace(cfg, iterations=max(cfg.iterations, k + 1)))
    x, y = _states_to_arrays(states)
    kind = stepper.draws_per_round()
    if kind == "uniform":
        draw = rng.random(x.shape)
    elif kind == "normal":
        draw = rng.standard_normal(x.shape)
    else:
        draw = None
    x_new, y_new = stepper.advance(x, y, k, draw)
    return _arrays_to_states(x_new, y_new)


def cpdnes_step(states, k, cfg: EngineConfig, rng) -> list[PlayerState]:
    """One round of the compressed variant; one compression draw per player."""
    return _one_round(states, k, _as_variant(cfg, VARIANT_CP), rng)


def conventional_step(states, k, cfg: EngineConfig, rng=None) -> list[PlayerState]:
    """One round of the uncompressed variant (deterministic)."""
    return _one_round(states, k, _as_variant(cfg, VARIANT_CONVENTIONAL), rng)


def npdnes_step(states, k, cfg: EngineConfig, rng) -> list[PlayerState]:
    """One round of the noise-perturbed variant (fresh Gaussian per player)."""
    return _one_round(states, k, _as_variant(cfg, VARIANT_NP), rng)


def dscdnes_step(states, k, cfg: EngineConfig, rng) -> list[PlayerState]:
    """One round of the dynamic-scaling variant."""
    return _one_round(states, k, _as_variant(cfg, VARIANT_DSC), rng)


def _as_variant(cfg: EngineConfig, variant: str) -> EngineConfig:
    return cfg if cfg.variant == variant else replace(cfg, variant=variant)


def initial_states(cfg: EngineConfig) -> list[PlayerState]:
    """Fresh states with y_i = x_i (exact average agreement at k = 0)."""
    x0 = cfg.initial_profile()
    return _arrays_to_states(x0, x0)


def _trial_generator(seed: int) -> np.random.Generator:
    # counter-based stream: (seed, player, iteration) -> draw is order-independent
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def run(cfg: EngineConfig, seed: int) -> RunRecord:
    """Simulate one trial; bit-identical for identical (cfg, seed)."""
    return run_batch(cfg, [seed])[0]


def run_batch(cfg: EngineConfig, seeds: Sequence[int]) -> list[RunRecord]:
    """Simulate independent trials in lockstep.

    Each trial owns its own counter-based stream keyed by its seed and
    consumes one fixed-shape block per round, so results match running the
    trials one at a time, in any order.
    """
    seeds = [int(s) for s in seeds]
    n_trials = len(seeds)
    if n_trials == 0:
        return []
    stepper = _Stepper(cfg)
    game = cfg.game
    n_players, dim = game.n_players, game.dim
    t_max = cfg.iterations

    x0 = cfg.initial_profile()
    x = np.broadcast_to(x0, (n_trials, n_players, dim)).copy()
    y = x.copy()

    kind = stepper.draws_per_round()
    if kind is None:
        draws = None
    else:
        gens = [_trial_generator(s) for s in seeds]
        shape = (t_max, n_players, dim)
        if kind == "uniform":
            draws = np.stack([g.random(shape) for g in gens])
        else:
            draws = np.stack([g.standard_normal(shape) for g in gens])

    track_err = cfg.x_star is not None
    if track_err:
        x_star = np.asarray(cfg.x_star, dtype=float).reshape(n_players, dim)
        err_sq = np.empty((n_trials, t_max + 1))
        err_sq[:, 0] = ((x - x_star) ** 2).sum(axis=(1, 2))
        profiles = None
    else:
        profiles = np.empty((n_trials, t_max + 1, n_players, dim))
        profiles[:, 0] = x
    residual = np.empty((n_trials, t_max + 1))
    residual[:, 0] = np.abs(y.mean(axis=1) - x.mean(axis=1)).max(axis=-1)

    fault: NumericFault | None = None
    completed = t_max
    for k in range(t_max):
        try:
            x, y = stepper.advance(x, y, k, draws[:, k] if draws is not None else None)
        except NumericFault as exc:
            if not cfg.truncate_on_fault:
                raise
            fault = exc
            completed = k
            break
        idx = k + 1
        if track_err:
            err_sq[:, idx] = ((x - x_star) ** 2).sum(axis=(1, 2))
        else:
            profiles[:, idx] = x
        residual[:, idx] = np.abs(y.mean(axis=1) - x.mean(axis=1)).max(axis=-1)

    n_rec = completed + 1
    bits = np.arange(n_rec, dtype=np.int64) * (n_players * cfg.bits_per_player_round())
    records = []
    for t, seed in enumerate(seeds):
        records.append(
            RunRecord(
                seed=seed,
                iterations=completed,
                bits_cum=bits.copy(),
                avg_residual=residual[t, :n_rec].copy(),
                err_sq=err_sq[t, :n_rec].copy() if track_err else None,
                profiles=profiles[t, :n_rec].copy() if not track_err else None,
                fault=fault,
            )
        )
    return records
