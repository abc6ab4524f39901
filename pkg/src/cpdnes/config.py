"""JSON experiment documents and their translation into runnable objects.

One document describes a whole experiment: the game, the communication
topology, the step schedule, and a list of algorithm variants to compare.
Schema errors always name the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compress import IdentityCompressor, RelativeCompressor, StochasticQuantizer
from .engines import (
    VARIANT_CONVENTIONAL,
    VARIANT_CP,
    VARIANT_DSC,
    VARIANT_NP,
    VARIANTS,
    EngineConfig,
)
from .errors import ConfigError
from .game import AggregativeGame, EnergyGameParams, energy_game
from .network import Topology, ring
from .schedule import StepSchedule

DEFAULT_SEED = 20240601
DEFAULT_TRIALS = 100
DEFAULT_ITERATIONS = 5000


def _require(cond: bool, field_name: str, message: str):
    if not cond:
        raise ConfigError(f"{field_name}: {message}")


def _get(doc: dict, key: str, default, kind, field_name: str):
    value = doc.get(key, default)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    _require(isinstance(value, kind), field_name, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def parse_game(doc: dict | None) -> EnergyGameParams:
    doc = doc or {}
    _require(isinstance(doc, dict), "game", "expected an object")
    kind = doc.get("type", "energy")
    _require(kind == "energy", "game.type", f"unknown game type {kind!r}")
    defaults = EnergyGameParams()
    demand = doc.get("demand", list(defaults.demand))
    _require(
        isinstance(demand, list) and all(isinstance(v, (int, float)) for v in demand),
        "game.demand",
        "expected a list of numbers",
    )
    box = doc.get("box", list(defaults.box))
    _require(isinstance(box, list) and len(box) == 2, "game.box", "expected [lo, hi]")
    try:
        return EnergyGameParams(
            demand=tuple(float(v) for v in demand),
            price_slope=_get(doc, "price_slope", defaults.price_slope, float, "game.price_slope"),
            price_base=_get(doc, "price_base", defaults.price_base, float, "game.price_base"),
            box=(float(box[0]), float(box[1])),
            gradient_bound=_get(doc, "gradient_bound", defaults.gradient_bound, float, "game.gradient_bound"),
        )
    except ValueError as exc:
        raise ConfigError(f"game: {exc}") from exc


def parse_topology(doc: dict | None, n_players: int) -> Topology:
    doc = doc or {"type": "ring", "n": n_players}
    _require(isinstance(doc, dict), "topology", "expected an object")
    kind = doc.get("type")
    if kind == "ring":
        n = _get(doc, "n", n_players, int, "topology.n")
        weight = _get(doc, "weight", 1.0, float, "topology.weight")
        try:
            topo = ring(n, weight)
        except ValueError as exc:
            raise ConfigError(f"topology: {exc}") from exc
    elif kind == "custom":
        weights = doc.get("weights")
        _require(isinstance(weights, list), "topology.weights", "expected a nested list")
        try:
            topo = Topology(np.asarray(weights, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"topology.weights: {exc}") from exc
    else:
        raise ConfigError(f"topology.type: unknown type {kind!r}")
    _require(
        topo.n_players == n_players,
        "topology",
        f"has {topo.n_players} players but the game has {n_players}",
    )
    return topo


def parse_schedule(doc: dict | None) -> StepSchedule:
    doc = doc or {}
    _require(isinstance(doc, dict), "schedule", "expected an object")
    alpha = doc.get("alpha", {"c": 0.4, "omega": 0.3})
    beta = doc.get("beta", {"c": 0.4, "omega": 0.6})
    _require(isinstance(alpha, dict), "schedule.alpha", "expected an object")
    _require(isinstance(beta, dict), "schedule.beta", "expected an object")
    try:
        return StepSchedule(
            c1=_get(alpha, "c", 0.4, float, "schedule.alpha.c"),
            omega1=_get(alpha, "omega", 0.3, float, "schedule.alpha.omega"),
            c3=_get(beta, "c", 0.4, float, "schedule.beta.c"),
            omega2=_get(beta, "omega", 0.6, float, "schedule.beta.omega"),
            c2=_get(doc, "c2", 1.0, float, "schedule.c2"),
        )
    except ValueError as exc:
        raise ConfigError(f"schedule: {exc}") from exc


def parse_compressor(doc: dict | None, field_name: str = "compressor"):
    _require(isinstance(doc, dict), field_name, "expected an object")
    kind = doc.get("type")
    try:
        if kind == "stochastic-quantizer":
            theta = _get(doc, "theta", None, float, f"{field_name}.theta")
            ymax = _get(doc, "ymax", 90.0, float, f"{field_name}.ymax")
            bits = doc.get("bits")
            if bits is not None:
                _require(isinstance(bits, int), f"{field_name}.bits", "expected an integer")
            return StochasticQuantizer(theta=theta, ymax=ymax, bits=bits)
        if kind == "identity":
            return IdentityCompressor()
        if kind == "relative":
            return RelativeCompressor(phi=_get(doc, "phi", None, float, f"{field_name}.phi"))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{field_name}: {exc}") from exc
    raise ConfigError(f"{field_name}.type: unknown compressor {kind!r}")


@dataclass(frozen=True)
class Threshold:
    metric: str
    level: float


@dataclass(frozen=True)
class VariantSpec:
    """One algorithm entry from the document's variants list."""

    name: str
    engine: str
    compressor_doc: dict | None = None
    eta: float | None = None
    consensus: str = "beta"
    noise_decay: float = 0.91
    r_base: float = 0.87
    dsc_bits: int = 8
    ymax: float = 90.0
    truncate_on_fault: bool = False

    def build(
        self,
        game: AggregativeGame,
        topology: Topology,
        schedule: StepSchedule,
        iterations: int,
        init,
        x_star: np.ndarray | None,
    ) -> EngineConfig:
        compressor = (
            parse_compressor(self.compressor_doc, f"variants[{self.name}].compressor")
            if self.compressor_doc is not None
            else None
        )
        return EngineConfig(
            game=game,
            topology=topology,
            schedule=schedule,
            variant=self.engine,
            compressor=compressor,
            iterations=iterations,
            init=init,
            x_star=x_star,
            eta=self.eta,
            consensus=self.consensus,
            noise_decay=self.noise_decay,
            r_base=self.r_base,
            dsc_bits=self.dsc_bits,
            ymax=self.ymax,
            truncate_on_fault=self.truncate_on_fault,
        )


def _default_variant_name(engine: str, compressor_doc: dict | None) -> str:
    if engine != VARIANT_CP or compressor_doc is None:
        return engine
    kind = compressor_doc.get("type")
    if kind == "stochastic-quantizer":
        return f"cp-dnes-theta{compressor_doc.get('theta'):g}"
    if kind == "relative":
        return f"cp-dnes-relative{compressor_doc.get('phi'):g}"
    return f"cp-dnes-{kind}"


def parse_variant(doc: dict, index: int) -> VariantSpec:
    where = f"variants[{index}]"
    _require(isinstance(doc, dict), where, "expected an object")
    engine = doc.get("engine")
    _require(engine in VARIANTS, f"{where}.engine", f"expected one of {list(VARIANTS)}, got {engine!r}")
    compressor_doc = doc.get("compressor")
    if engine == VARIANT_CP:
        _require(compressor_doc is not None, f"{where}.compressor", "cp-dnes requires a compressor")
        parse_compressor(compressor_doc, f"{where}.compressor")  # validate early
    eta = doc.get("eta")
    if eta is not None:
        _require(isinstance(eta, (int, float)), f"{where}.eta", "expected a number")
        eta = float(eta)
    spec = VariantSpec(
        name=str(doc.get("name", _default_variant_name(engine, compressor_doc))),
        engine=engine,
        compressor_doc=compressor_doc,
        eta=eta,
        consensus=_get(doc, "consensus", "beta", str, f"{where}.consensus"),
        noise_decay=_get(doc, "noise_decay", 0.91, float, f"{where}.noise_decay"),
        r_base=_get(doc, "r_base", 0.87, float, f"{where}.r_base"),
        dsc_bits=_get(doc, "bits", 8, int, f"{where}.bits"),
        ymax=_get(doc, "ymax", 90.0, float, f"{where}.ymax"),
        truncate_on_fault=_get(doc, "truncate_on_fault", False, bool, f"{where}.truncate_on_fault"),
    )
    _require(spec.consensus in ("beta", "unit"), f"{where}.consensus", "expected 'beta' or 'unit'")
    return spec


@dataclass
class ExperimentConfig:
    """Parsed experiment document; raw keeps the original for process fan-out."""

    game_params: EnergyGameParams
    topology: Topology
    schedule: StepSchedule
    variants: list[VariantSpec]
    iterations: int = DEFAULT_ITERATIONS
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    init: object = "midpoint"
    reference: object = "oracle"
    thresholds: list[Threshold] = field(default_factory=list)
    parallelism: int = 1
    raw: dict | None = None

    def game(self) -> AggregativeGame:
        return energy_game(self.game_params)


def parse_config(doc: dict) -> ExperimentConfig:
    _require(isinstance(doc, dict), "config", "expected a JSON object")
    game_params = parse_game(doc.get("game"))
    topology = parse_topology(doc.get("topology"), game_params.n_players)
    schedule = parse_schedule(doc.get("schedule"))

    variants_doc = doc.get("variants", [])
    _require(isinstance(variants_doc, list), "variants", "expected a list")
    variants = [parse_variant(v, i) for i, v in enumerate(variants_doc)]
    names = [v.name for v in variants]
    _require(len(set(names)) == len(names), "variants", f"duplicate names: {sorted(names)}")

    init = doc.get("init", "midpoint")
    if not isinstance(init, str):
        _require(isinstance(init, list), "init", "expected 'midpoint' or a list of decisions")
        init = np.asarray(init, dtype=float).reshape(game_params.n_players, -1)

    reference = doc.get("reference", "oracle")
    if not isinstance(reference, str):
        _require(isinstance(reference, list), "reference", "expected 'oracle' or a list")
        reference = np.asarray(reference, dtype=float).reshape(game_params.n_players, -1)
    else:
        _require(reference == "oracle", "reference", f"unknown reference {reference!r}")

    thresholds_doc = doc.get("thresholds", [])
    _require(isinstance(thresholds_doc, list), "thresholds", "expected a list")
    thresholds = []
    for i, t in enumerate(thresholds_doc):
        _require(isinstance(t, dict), f"thresholds[{i}]", "expected an object")
        metric = t.get("metric", "mse")
        _require(metric in ("mse", "rmse-norm"), f"thresholds[{i}].metric", f"unknown metric {metric!r}")
        thresholds.append(Threshold(metric=metric, level=_get(t, "level", None, float, f"thresholds[{i}].level")))

    trials = _get(doc, "trials", DEFAULT_TRIALS, int, "trials")
    _require(trials >= 1, "trials", "must be at least 1")
    iterations = _get(doc, "iterations", DEFAULT_ITERATIONS, int, "iterations")
    _require(iterations >= 0, "iterations", "must be nonnegative")
    parallelism = _get(doc, "parallelism", 1, int, "parallelism")
    _require(parallelism >= 1, "parallelism", "must be at least 1")

    return ExperimentConfig(
        game_params=game_params,
        topology=topology,
        schedule=schedule,
        variants=variants,
        iterations=iterations,
        trials=trials,
        seed=_get(doc, "seed", DEFAULT_SEED, int, "seed"),
        init=init,
        reference=reference,
        thresholds=thresholds,
        parallelism=parallelism,
        raw=doc,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return parse_config(doc)
