"""Monte-Carlo experiment driver with delimited, bit-reproducible output.

Trials use seeds base_seed + trial index, and aggregation always reduces in
trial order, so a given (config, seed) produces byte-identical CSVs no matter
how trials are scheduled, including across process-level parallelism.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .compress import StochasticQuantizer
from .config import ExperimentConfig, Threshold, parse_config
from .engines import VARIANT_CP, VARIANT_DSC, EngineConfig, run_batch
from .errors import ConfigError, NumericFault
from .oracle import ne_linear
from .privacy import build_ledger
from .schedule import StepSchedule

CSV_HEADER = "k,variant,mse_mean,mse_std,norm_mean,bits_cum,delta_k"


@dataclass
class AggregateSeries:
    """Trial-aggregated trace of one variant.

    mse_mean/mse_std aggregate ||x_k - x_star||^2 across trials (population
    std); norm_mean averages ||x_k - x_star||.  delta[k] is the privacy
    budget of round k where the variant has one (quantized broadcasts), NaN
    otherwise.  fault records why a truncated variant stopped early.
    """

    variant: str
    k: np.ndarray
    mse_mean: np.ndarray
    mse_std: np.ndarray
    norm_mean: np.ndarray
    bits_cum: np.ndarray
    delta: np.ndarray
    n_trials: int = 0
    fault: str | None = None

    @property
    def iterations(self) -> int:
        return len(self.k) - 1


def resolve_reference(config: ExperimentConfig) -> np.ndarray:
    """The x_star used for error metrics; 'oracle' solves the game directly."""
    if isinstance(config.reference, str):
        return ne_linear(config.game_params).x_star
    return np.asarray(config.reference, dtype=float)


def _delta_column(engine_cfg: EngineConfig, schedule: StepSchedule, horizon: int) -> np.ndarray:
    gb = engine_cfg.game.bounds.gradient_bound
    dim = engine_cfg.game.dim
    if engine_cfg.variant == VARIANT_CP and isinstance(engine_cfg.compressor, StochasticQuantizer):
        ledger = build_ledger(schedule, engine_cfg.compressor.params.theta, horizon, C=gb, n=dim)
        return ledger.delta_series
    if engine_cfg.variant == VARIANT_DSC:
        ledger = build_ledger(
            schedule,
            engine_cfg.dsc_quantizer_params().theta,
            horizon,
            C=gb,
            n=dim,
            r_base=engine_cfg.r_base,
        )
        return ledger.delta_series
    return np.full(horizon + 1, np.nan)


def _aggregate(records, engine_cfg: EngineConfig, schedule: StepSchedule, name: str) -> AggregateSeries:
    err_sq = np.stack([r.err_sq for r in records])
    horizon = records[0].iterations
    fault = records[0].fault
    return AggregateSeries(
        variant=name,
        k=np.arange(horizon + 1),
        mse_mean=err_sq.mean(axis=0),
        mse_std=err_sq.std(axis=0),
        norm_mean=np.sqrt(err_sq).mean(axis=0),
        bits_cum=records[0].bits_cum.copy(),
        delta=_delta_column(engine_cfg, schedule, horizon),
        n_trials=len(records),
        fault=str(fault) if fault is not None else None,
    )


def _worker_chunk(raw_json: str, variant_name: str, seeds: list[int]):
    """Process-pool entry: rebuild everything from the document and run a chunk."""
    config = parse_config(json.loads(raw_json))
    x_star = resolve_reference(config)
    spec = next(s for s in config.variants if s.name == variant_name)
    engine_cfg = spec.build(
        config.game(), config.topology, config.schedule, config.iterations, config.init, x_star
    )
    records = run_batch(engine_cfg, seeds)
    err_sq = np.stack([r.err_sq for r in records])
    fault = records[0].fault
    return err_sq, records[0].iterations, (fault.iteration, fault.message) if fault else None


def run_experiment(config: ExperimentConfig, parallelism: int | None = None) -> dict[str, AggregateSeries]:
    """Run every variant for the configured trials; returns name -> series.

    A faulting trial aborts its variant at the fault iteration: the variant
    either raises (default) or, when its truncate_on_fault flag is set, keeps
    the partial series so it can still be compared against healthy variants.
    """
    if not config.variants:
        raise ConfigError("variants: experiment requires at least one variant")
    parallelism = config.parallelism if parallelism is None else parallelism
    x_star = resolve_reference(config)
    game = config.game()
    seeds = [config.seed + t for t in range(config.trials)]

    results: dict[str, AggregateSeries] = {}
    for spec in config.variants:
        engine_cfg = spec.build(
            game, config.topology, config.schedule, config.iterations, config.init, x_star
        )
        if parallelism > 1 and config.trials > 1:
            results[spec.name] = _run_parallel(config, spec.name, engine_cfg, seeds, parallelism)
        else:
            records = run_batch(engine_cfg, seeds)
            results[spec.name] = _aggregate(records, engine_cfg, config.schedule, spec.name)
    return results


def _run_parallel(
    config: ExperimentConfig,
    variant_name: str,
    engine_cfg: EngineConfig,
    seeds: list[int],
    parallelism: int,
) -> AggregateSeries:
    if config.raw is None:
        raise ConfigError("parallelism: parallel runs require a document-built config")
    raw_json = json.dumps(config.raw)
    chunk = max(1, -(-len(seeds) // parallelism))
    chunks = [seeds[i : i + chunk] for i in range(0, len(seeds), chunk)]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(_worker_chunk, raw_json, variant_name, c) for c in chunks]
        parts = [f.result() for f in futures]  # submission order = trial order

    completed = min(p[1] for p in parts)
    fault = next((p[2] for p in parts if p[2] is not None and p[1] == completed), None)
    err_sq = np.concatenate([p[0][:, : completed + 1] for p in parts], axis=0)
    bits = np.arange(completed + 1, dtype=np.int64) * (
        engine_cfg.game.n_players * engine_cfg.bits_per_player_round()
    )
    return AggregateSeries(
        variant=variant_name,
        k=np.arange(completed + 1),
        mse_mean=err_sq.mean(axis=0),
        mse_std=err_sq.std(axis=0),
        norm_mean=np.sqrt(err_sq).mean(axis=0),
        bits_cum=bits,
        delta=_delta_column(engine_cfg, config.schedule, completed),
        n_trials=len(seeds),
        fault=str(NumericFault(*fault)) if fault else None,
    )


def bits_to_threshold(series: AggregateSeries, metric: str, level: float) -> int | None:
    """Cumulative bits at the first iterate whose trial-mean metric is <= level.

    metric is "mse" (mean squared distance) or "rmse-norm" (mean distance).
    None when the series never reaches the level.
    """
    if metric == "mse":
        values = series.mse_mean
    elif metric in ("rmse-norm", "norm"):
        values = series.norm_mean
    else:
        raise ValueError(f"unknown metric {metric!r}; expected 'mse' or 'rmse-norm'")
    hit = np.nonzero(values <= level)[0]
    if hit.size == 0:
        return None
    return int(series.bits_cum[hit[0]])


def threshold_report(results: dict[str, AggregateSeries], thresholds: list[Threshold]) -> list[tuple]:
    """(metric, level, variant, bits or None) rows in variant order."""
    rows = []
    for th in thresholds:
        for name, series in results.items():
            rows.append((th.metric, th.level, name, bits_to_threshold(series, th.metric, th.level)))
    return rows


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def emit_csv(results: dict[str, AggregateSeries], path) -> None:
    """Write the aggregate series of every variant, newline-terminated.

    Floats carry 10 significant digits, enough to make re-reading the file
    reproduce the series exactly at printed precision.
    """
    lines = [CSV_HEADER]
    for name, s in results.items():
        for i in range(len(s.k)):
            lines.append(
                f"{s.k[i]},{name},{_fmt(s.mse_mean[i])},{_fmt(s.mse_std[i])},"
                f"{_fmt(s.norm_mean[i])},{s.bits_cum[i]},{_fmt(s.delta[i])}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> dict[str, AggregateSeries]:
    """Parse a file written by emit_csv back into series keyed by variant."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        rows: dict[str, list[tuple]] = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k, variant, mse_mean, mse_std, norm_mean, bits, delta = line.split(",")
            rows.setdefault(variant, []).append(
                (int(k), float(mse_mean), float(mse_std), float(norm_mean), int(bits), float(delta))
            )
    out = {}
    for variant, data in rows.items():
        arr = np.array(data, dtype=float)
        out[variant] = AggregateSeries(
            variant=variant,
            k=arr[:, 0].astype(int),
            mse_mean=arr[:, 1],
            mse_std=arr[:, 2],
            norm_mean=arr[:, 3],
            bits_cum=arr[:, 4].astype(np.int64),
            delta=arr[:, 5],
        )
    return out


def weighted_running_average(schedule: StepSchedule, values: np.ndarray) -> np.ndarray:
    """W[k] = sum_{s<=k} alpha_s beta_s values[s] / sum_{s<=k} alpha_s beta_s."""
    values = np.asarray(values, dtype=float)
    w = schedule.product(np.arange(len(values)))
    return np.cumsum(w * values) / np.cumsum(w)


def fit_decay_exponent(values: np.ndarray, start: int, stop: int | None = None) -> float:
    """Least-squares slope of log(values) on log(1 + k) over [start, stop).

    Returns the positive decay exponent omega for values ~ (1 + k)^(-omega).
    """
    values = np.asarray(values, dtype=float)
    stop = len(values) if stop is None else stop
    k = np.arange(start, stop)
    v = values[start:stop]
    if np.any(v <= 0):
        raise ValueError("values must be positive for a log-log fit")
    slope = np.polyfit(np.log1p(k), np.log(v), 1)[0]
    return float(-slope)
