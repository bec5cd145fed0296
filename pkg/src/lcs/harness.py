"""Seeded experiment runner, learning-curve metrics and config handling."""

from __future__ import annotations

import csv
import dataclasses
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import ConfigurationError, GaOperatorParams, RandomStream
from .envs import (
    ClusterEnv,
    ClusterGenerator,
    ConstantRewardEnv,
    DatasetEnv,
    FunctionEnv,
    FunctionTask,
    MazeWorld,
    MultiplexerEnv,
    load_points,
)
from .persist import load_population, save_population
from .ucs import UCS, UcsParams
from .xcs import XCS, XcsParams
from .xcsc import XCSC, XcscParams
from .xcsf import XCSF, XcsfParams
from .zcs import ZCS, ZcsParams

METRICS_HEADER = ("trial", "performance", "system_error", "population_size", "mean_specificity")

ENGINE_PARAMS = {"zcs": ZcsParams, "xcs": XcsParams, "ucs": UcsParams,
                 "xcsc": XcscParams, "xcsf": XcsfParams}
GA_KEYS = tuple(f.name for f in dataclasses.fields(GaOperatorParams))
ENVS = ("mux6", "mux11", "mux", "maze", "sine", "rms", "clusters", "dataset", "neutral")
ENV_KEYS = {"k": int, "map": str, "max_steps": int, "r_food": float, "reward": float,
            "n": int, "d": int, "data": str, "sigma": float, "length": int}
GENERAL_KEYS = {"engine": str, "env": str, "trials": int, "seed": int, "window": int,
                "out": str, "pop_out": str, "explore": str, "stop_at": float,
                "exploit_greedy": bool, "init_pop": str}
DEFAULT_CLUSTER_MEANS = ((0.2, 0.2), (0.5, 0.8), (0.8, 0.3))


@dataclass
class MetricsRecord:
    trial: int
    performance: float
    system_error: float
    population_size: int
    mean_specificity: float

    def row(self) -> list[str]:
        return [str(self.trial), repr(float(self.performance)), repr(float(self.system_error)),
                str(self.population_size), repr(float(self.mean_specificity))]

    @classmethod
    def from_row(cls, row) -> "MetricsRecord":
        t, perf, err, size, spec = row
        return cls(int(t), float(perf), float(err), int(size), float(spec))


def moving_performance(history, W: int) -> Optional[float]:
    """Mean of the last ``min(W, len(history))`` entries; ``None`` when empty."""
    if W < 1:
        raise ConfigurationError("window must be at least 1", "window")
    tail = list(history)[-W:]
    if not tail:
        return None
    return sum(tail) / len(tail)


class _Window:
    """Running mean over a fixed-size window."""

    def __init__(self, size: int):
        self.buf = deque(maxlen=size)
        self.total = 0.0

    def push(self, v: float) -> float:
        if len(self.buf) == self.buf.maxlen:
            self.total -= self.buf[0]
        self.buf.append(v)
        self.total += v
        return self.total / len(self.buf)

    @property
    def full(self) -> bool:
        return len(self.buf) == self.buf.maxlen


# --------------------------------------------------------------------------
# configuration


def _coerce(value, annotation: str, key: str):
    if not isinstance(value, str):
        return value
    text = value.strip()
    ann = annotation.replace("typing.", "")
    if ann.startswith("Optional[") and text.lower() in ("none", ""):
        return None
    ann = ann.removeprefix("Optional[").removesuffix("]")
    try:
        if ann == "bool" or ann is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if ann == "int":
            return int(text)
        if ann == "float":
            return float(text)
    except ValueError:
        raise ConfigurationError(f"cannot parse {key} = {value!r} as {ann}", key) from None
    return text


def engine_param_keys(engine: str) -> dict[str, str]:
    cls = ENGINE_PARAMS[engine]
    keys = {f.name: f.type for f in dataclasses.fields(cls) if f.name != "ga"}
    if any(f.name == "ga" for f in dataclasses.fields(cls)):
        for f in dataclasses.fields(GaOperatorParams):
            keys[f.name] = f.type
    return keys


def make_engine_params(engine: str, values: dict):
    cls = ENGINE_PARAMS[engine]
    own = {f.name for f in dataclasses.fields(cls)}
    kwargs = {k: v for k, v in values.items() if k in own}
    ga_kwargs = {k: v for k, v in values.items() if k in GA_KEYS and k not in own}
    if "ga" in own:
        default_ga = cls().ga
        kwargs["ga"] = dataclasses.replace(default_ga, **ga_kwargs)
    params = cls(**kwargs)
    params.validate()
    return params


@dataclass
class ExperimentConfig:
    engine: str = "xcs"
    env: str = "mux6"
    trials: int = 1000
    seed: int = 0
    window: int = 50
    out: Optional[str] = None
    pop_out: Optional[str] = None
    # 'alternate' (strict) or 'coin' (explore with probability p_explore)
    explore: str = "alternate"
    stop_at: Optional[float] = None
    exploit_greedy: bool = False
    init_pop: Optional[str] = None
    env_params: dict = field(default_factory=dict)
    engine_params: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        mapping = dict(mapping)
        engine = str(mapping.get("engine", "xcs")).strip()
        if engine not in ENGINE_PARAMS:
            raise ConfigurationError(f"unknown engine {engine!r}", "engine")
        eng_keys = engine_param_keys(engine)
        general, env_params, engine_params = {}, {}, {}
        for key, value in mapping.items():
            if key in GENERAL_KEYS:
                typ = GENERAL_KEYS[key]
                general[key] = _coerce(value, typ.__name__, key) if isinstance(value, str) else value
            elif key in ENV_KEYS:
                typ = ENV_KEYS[key]
                env_params[key] = _coerce(value, typ.__name__, key) if isinstance(value, str) else value
            elif key in eng_keys:
                engine_params[key] = _coerce(value, eng_keys[key], key)
            else:
                raise ConfigurationError(f"unknown configuration key {key!r}", key)
        general["engine"] = engine
        cfg = cls(env_params=env_params, engine_params=engine_params, **general)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.env not in ENVS:
            raise ConfigurationError(f"unknown environment {self.env!r}", "env")
        if self.trials < 0:
            raise ConfigurationError("trials must be non-negative", "trials")
        if self.window < 1:
            raise ConfigurationError("window must be at least 1", "window")
        if self.explore not in ("alternate", "coin"):
            raise ConfigurationError("explore must be 'alternate' or 'coin'", "explore")
        try:
            make_engine_params(self.engine, self._engine_values())
        except ConfigurationError:
            raise
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc
        build_engine(self, build_env(self), RandomStream(0))

    def _engine_values(self) -> dict:
        values = dict(self.engine_params)
        if self.engine == "xcsf":
            values.setdefault("n", self.env_params.get("n", 1000 if self.env == "sine" else 100))
        return values


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"config line {lineno}: expected key = value")
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


# --------------------------------------------------------------------------
# wiring


def build_env(cfg: ExperimentConfig):
    p = cfg.env_params
    env = cfg.env
    if env in ("mux6", "mux11", "mux"):
        k = {"mux6": 2, "mux11": 3}.get(env, p.get("k", 2))
        if env != "mux" and "k" in p and p["k"] != k:
            raise ConfigurationError(f"{env} fixes k = {k}", "k")
        return MultiplexerEnv(k, p.get("reward", 1000.0))
    if env == "maze":
        kw = {"r_food": p.get("r_food", 1000.0), "max_steps": p.get("max_steps", 100)}
        if "map" in p:
            return MazeWorld.from_file(p["map"], **kw)
        return MazeWorld.default(**kw)
    if env in ("sine", "rms"):
        n = p.get("n", 1000 if env == "sine" else 100)
        d = p.get("d", 1 if env == "sine" else 2)
        return FunctionEnv(FunctionTask(env, n, d, p.get("reward", 1.0)))
    if env == "clusters":
        if "data" in p:
            return ClusterEnv(points=load_points(p["data"]))
        return ClusterEnv(ClusterGenerator.isotropic(DEFAULT_CLUSTER_MEANS, p.get("sigma", 0.05)))
    if env == "dataset":
        if "data" not in p:
            raise ConfigurationError("the dataset environment needs data = <csv>", "data")
        return DatasetEnv.from_csv(p["data"], p.get("reward", 1000.0))
    return ConstantRewardEnv(p.get("length", 20), p.get("reward", 0.0))


def build_engine(cfg: ExperimentConfig, env, rng, population=None):
    params = make_engine_params(cfg.engine, cfg._engine_values())
    e = cfg.engine
    if e in ("zcs", "xcs", "ucs") and isinstance(env, (ClusterEnv, FunctionEnv)):
        raise ConfigurationError(f"{e} needs a binary environment, got {cfg.env}", "env")
    if e == "xcsc" and not isinstance(env, ClusterEnv):
        raise ConfigurationError("xcsc runs on the clusters environment", "env")
    if e == "xcsf" and not isinstance(env, FunctionEnv):
        raise ConfigurationError("xcsf runs on a function environment (sine, rms)", "env")
    if e == "ucs" and env.multistep:
        raise ConfigurationError("ucs needs a supervised (single-step) environment", "env")
    if e == "zcs":
        return ZCS(params, env.n_actions, env.input_length, rng, population,
                   exploit_greedy=cfg.exploit_greedy)
    if e == "xcs":
        return XCS(params, env.n_actions, env.input_length, rng, population)
    if e == "ucs":
        return UCS(params, env.n_actions, env.input_length, rng, population)
    if e == "xcsc":
        return XCSC(params, env.d, rng, population)
    return XCSF(params, env.task.d, rng, population)


def mean_specificity(engine) -> float:
    rules = engine.pop.rules
    if not rules:
        return 0.0
    if engine.name in ("zcs", "xcs", "ucs"):
        return sum(r.cond.spec for r in rules) / len(rules)
    # 1 - mean effective width, normalised per dimension
    scale = engine.d if engine.name == "xcsc" else engine.d * (engine.params.n - 1)
    return 1.0 - sum(r.cond.width for r in rules) / (scale * len(rules))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    engine: object = field(repr=False)
    env: object = field(repr=False)

    def first_reach(self, threshold: float, higher_is_better: bool = True) -> Optional[int]:
        return first_reach(self.records, threshold, self.config.window, higher_is_better)


def first_reach(records, threshold: float, window: int, higher_is_better: bool = True) -> Optional[int]:
    """First exploit trial with a full window whose moving performance meets ``threshold``."""
    for rec in records:
        if rec.trial < window:
            continue
        if (rec.performance >= threshold) if higher_is_better else (rec.performance <= threshold):
            return rec.trial
    return None


def _outcome(engine, env, out) -> tuple[float, float]:
    """(performance sample, system-error sample) for one exploit trial/episode."""
    name = engine.name
    if name in ("xcsc", "xcsf"):
        return out["error"], out["error"]
    if env.multistep:
        if name == "xcs":
            return out["steps"], out["error"]
        return out["steps"], float(out["timed_out"])
    correct = float(out["correct"])
    if name == "xcs":
        return correct, abs(out["prediction"] - out["reward"])
    return correct, 1.0 - correct


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    rng = RandomStream(cfg.seed)
    coin = rng.spawn(2)
    env = build_env(cfg)
    population = None
    if cfg.init_pop:
        params = make_engine_params(cfg.engine, cfg._engine_values())
        population = load_population(cfg.init_pop, cfg.engine, params.N)
        population.capacity = params.N
    engine = build_engine(cfg, env, rng, population)
    run = engine.run_episode if env.multistep else engine.run_trial
    p_explore = getattr(engine.params, "p_explore", 0.5)
    perf_w, err_w = _Window(cfg.window), _Window(cfg.window)
    records = []
    exploits = 0
    while exploits < cfg.trials:
        if cfg.explore == "alternate":
            run(env, True)
        elif coin.random() < p_explore:
            run(env, True)
            continue
        out = run(env, False)
        exploits += 1
        perf_s, err_s = _outcome(engine, env, out)
        perf = perf_w.push(perf_s)
        err = err_w.push(err_s)
        records.append(MetricsRecord(exploits, perf, err, len(engine.pop), mean_specificity(engine)))
        if cfg.stop_at is not None and perf_w.full and perf >= cfg.stop_at and not env.multistep \
                and engine.name not in ("xcsc", "xcsf"):
            break
    if cfg.out:
        write_metrics(cfg.out, records)
        pop_path = cfg.pop_out or str(Path(cfg.out).with_suffix(".pop"))
        save_population(engine.pop, pop_path, engine.name, engine.input_length)
    elif cfg.pop_out:
        save_population(engine.pop, cfg.pop_out, engine.name, engine.input_length)
    return ExperimentResult(cfg, records, engine, env)


def write_metrics(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for r in records:
            w.writerow(r.row())


def read_metrics(path) -> list[MetricsRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != METRICS_HEADER:
            raise ConfigurationError(f"{path}: unexpected metrics header {header!r}")
        records = [MetricsRecord.from_row(row) for row in reader]
    for r in records:
        if not all(math.isfinite(v) for v in (r.performance, r.system_error, r.mean_specificity)):
            raise ConfigurationError(f"{path}: non-finite metrics at trial {r.trial}")
    return records


def _run_quiet(cfg: ExperimentConfig) -> list:
    return run_experiment(cfg).records


def run_replicas(base: ExperimentConfig, seeds, workers: int = 1) -> list[list]:
    """Run one replica per seed; results come back in seed order.

    Per-replica output files get the seed appended to their stem.
    """
    configs = []
    for s in seeds:
        cfg = dataclasses.replace(base, seed=s)
        if base.out:
            p = Path(base.out)
            cfg.out = str(p.with_name(f"{p.stem}_seed{s}{p.suffix}"))
            cfg.pop_out = None
        configs.append(cfg)
    if workers <= 1:
        return [_run_quiet(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_quiet, configs))
