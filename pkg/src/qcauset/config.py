"""Experiment configuration: YAML text in, validated frozen config out."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import yaml

from .action import DEFAULT_EPSILON
from .causet import MAX_CARDINALITY
from .errors import ConfigError
from .proposals import KINDS, ProposalStrategy

EXPERIMENTS = (
    "enumerate",
    "action",
    "sample",
    "spectral-gap",
    "sweep-N",
    "sweep-T",
    "exactbd-verify",
)
DEFAULT_TEMPERATURE = 0.004
RULE_NAMES = ("uniform", "metropolis")
STOCHASTIC = ("sample", "spectral-gap", "sweep-N", "sweep-T")

TOP_KEYS = {
    "experiment", "n", "temperature", "rule", "dimension", "epsilon", "strategies",
    "steps", "burn_in", "thin", "seed", "max_cardinality", "lambda", "input", "output",
    "action_kind", "initial",
}
STRATEGY_KEYS = {
    "kind", "label", "r_tc", "r_bd", "t", "penalty", "mix_weight", "samples",
    "tc_scale", "bd_scale",
}


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = "quantum"
    label: str | None = None
    r_tc: tuple[float, float] = (0.7, 0.9)
    r_bd: tuple[float, float] | None = None  # None: (0, 0) uniform, (0.02, 0.05) weighted
    t: tuple[int, int] = (3, 10)
    penalty: float = 1.0
    mix_weight: float = 0.5
    samples: int = 10
    tc_scale: float | None = None
    bd_scale: float | None = None

    @property
    def name(self) -> str:
        return self.label or self.kind

    def to_strategy(self, epsilon: float, dimension: int, weighted: bool) -> ProposalStrategy:
        r_bd = self.r_bd if self.r_bd is not None else ((0.02, 0.05) if weighted else (0.0, 0.0))
        return ProposalStrategy(
            kind=self.kind,
            r_tc_range=self.r_tc,
            r_bd_range=r_bd,
            t_range=self.t,
            epsilon=epsilon,
            dimension=dimension,
            penalty=self.penalty,
            mix_weight=self.mix_weight,
            n_param_samples=self.samples,
            tc_scale=self.tc_scale,
            bd_scale=self.bd_scale,
        )


DEFAULT_STRATEGIES = tuple(StrategyConfig(kind=k) for k in ("quantum", "relation", "link", "classical-mixed"))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    cardinalities: tuple[int, ...] = (4,)
    temperatures: tuple[float, ...] = (DEFAULT_TEMPERATURE,)
    rule: str = "uniform"
    dimension: int = 4
    epsilon: float = DEFAULT_EPSILON
    action_kind: str = "smeared"
    strategies: tuple[StrategyConfig, ...] = field(default=DEFAULT_STRATEGIES)
    steps: int = 10_000
    burn_in: int | None = None
    thin: int = 1
    seed: int | None = None
    max_cardinality: int = MAX_CARDINALITY
    lam: float | None = None
    input: str | None = None
    initial: str | None = None
    output: str | None = None

    @property
    def weighted(self) -> bool:
        return self.rule == "metropolis"

    def proposal_strategies(self) -> list[tuple[str, ProposalStrategy]]:
        return [
            (s.name, s.to_strategy(self.epsilon, self.dimension, self.weighted))
            for s in self.strategies
        ]

    def canonical(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("output")
        return d

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, default=list)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


class _Where:
    """Line lookup for keys of the raw document (1-based lines)."""

    def __init__(self, text: str):
        self.lines: dict[tuple, int] = {}
        try:
            node = yaml.compose(text)
        except yaml.YAMLError:
            node = None
        if isinstance(node, yaml.MappingNode):
            self._walk(node, ())

    def _walk(self, node: yaml.Node, path: tuple) -> None:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = path + (k.value,)
                self.lines[key] = k.start_mark.line + 1
                self._walk(v, key)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self.lines[path + (i,)] = v.start_mark.line + 1
                self._walk(v, path + (i,))

    def error(self, path: tuple, message: str) -> ConfigError:
        line = self.lines.get(path)
        key = ".".join(str(p) for p in path)
        where = f"line {line}: " if line else ""
        return ConfigError(f"{where}key '{key}': {message}")


def _number(where: _Where, path: tuple, value: Any, kind=float, positive=False, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise where.error(path, f"expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise where.error(path, f"expected an integer, got {value!r}")
    value = kind(value)
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise where.error(path, f"must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value


def _pair(where: _Where, path: tuple, value: Any, kind=float) -> tuple:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value, value]
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise where.error(path, f"expected a [low, high] pair, got {value!r}")
    lo, hi = (_number(where, path, v, kind) for v in value)
    return (lo, hi) if lo <= hi else (hi, lo)


def _cardinalities(where: _Where, value: Any) -> tuple[int, ...]:
    path = ("n",)
    if isinstance(value, dict):
        extra = set(value) - {"min", "max"}
        if extra or len(value) != 2:
            raise where.error(path, "a range needs exactly 'min' and 'max'")
        lo = _number(where, path, value["min"], int)
        hi = _number(where, path, value["max"], int)
        ns = tuple(range(lo, hi + 1))
    elif isinstance(value, (list, tuple)):
        ns = tuple(_number(where, path, v, int) for v in value)
    else:
        ns = (_number(where, path, value, int),)
    if not ns:
        raise where.error(path, "empty cardinality range")
    if min(ns) < 1:
        raise where.error(path, "cardinalities must be at least 1")
    return ns


def _strategy(where: _Where, path: tuple, raw: Any) -> StrategyConfig:
    if raw is None:
        raw = {}
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, dict):
        raise where.error(path, "a strategy is a mapping or a kind name")
    unknown = set(raw) - STRATEGY_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise where.error(path + (key,), "unknown strategy key")
    kw: dict[str, Any] = {}
    kind = raw.get("kind", "quantum")
    if kind not in KINDS:
        raise where.error(path + ("kind",), f"expected one of {KINDS}, got {kind!r}")
    kw["kind"] = kind
    if "label" in raw:
        kw["label"] = str(raw["label"])
    for key in ("r_tc", "r_bd"):
        if key in raw:
            lo, hi = _pair(where, path + (key,), raw[key])
            if lo < 0 or hi > 1:
                raise where.error(path + (key,), "ratios must lie in [0, 1]")
            kw[key] = (lo, hi)
    if "t" in raw:
        t = _pair(where, path + ("t",), raw["t"], int)
        if t[0] < 0:
            raise where.error(path + ("t",), "step counts must be non-negative")
        kw["t"] = t
    if "penalty" in raw:
        kw["penalty"] = _number(where, path + ("penalty",), raw["penalty"], positive=True)
    if "mix_weight" in raw:
        w = _number(where, path + ("mix_weight",), raw["mix_weight"])
        if not 0 <= w <= 1:
            raise where.error(path + ("mix_weight",), "must lie in [0, 1]")
        kw["mix_weight"] = w
    if "samples" in raw:
        kw["samples"] = _number(where, path + ("samples",), raw["samples"], int, positive=True)
    for key in ("tc_scale", "bd_scale"):
        if raw.get(key) is not None:
            kw[key] = _number(where, path + (key,), raw[key], positive=True)
    return StrategyConfig(**kw)


def check(cfg: ExperimentConfig) -> ExperimentConfig:
    """Cross-field checks shared by file parsing and flag overrides."""
    where = _Where("")
    if cfg.experiment not in EXPERIMENTS:
        raise where.error(("experiment",), f"expected one of {EXPERIMENTS}")
    if cfg.rule not in RULE_NAMES:
        raise where.error(("rule",), f"expected one of {RULE_NAMES}")
    if any(t <= 0 for t in cfg.temperatures):
        raise where.error(("temperature",), "temperatures must be positive")
    if cfg.epsilon <= 0 or cfg.epsilon > 1:
        raise where.error(("epsilon",), "epsilon must lie in (0, 1]")
    if cfg.steps < 1:
        raise where.error(("steps",), "must be positive")
    if cfg.burn_in is not None and not 0 <= cfg.burn_in < cfg.steps:
        raise where.error(("burn_in",), "must lie in [0, steps)")
    if cfg.thin < 1:
        raise where.error(("thin",), "must be positive")
    if cfg.lam is not None and cfg.lam <= 0:
        raise where.error(("lambda",), "must be positive")
    if cfg.experiment in STOCHASTIC and cfg.seed is None:
        if cfg.experiment == "sample" or any(s.kind == "quantum" for s in cfg.strategies):
            raise where.error(("seed",), f"a seed is required for '{cfg.experiment}'")
    if cfg.experiment in ("sweep-N",) and len(cfg.cardinalities) < 3:
        raise where.error(("n",), "sweep-N needs at least three cardinalities")
    if cfg.experiment == "action" and cfg.dimension not in (2, 4):
        raise where.error(("dimension",), "supported dimensions are 2 and 4")
    return cfg


def validate_config(text: str, experiment: str | None = None, **overrides) -> ExperimentConfig:
    """Parse YAML config text, fill defaults and range-check every field.

    ``experiment`` supplies the kind when the text omits it (the CLI
    subcommand); a conflicting value in the text is an error. Non-None
    ``overrides`` replace config fields before the checks run.
    """
    try:
        raw = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f"line {mark.line + 1}: " if mark else ""
        raise ConfigError(f"{line}malformed YAML: {getattr(exc, 'problem', exc)}") from None
    raw = raw or {}
    where = _Where(text)
    if not isinstance(raw, dict):
        raise ConfigError("the config must be a mapping at top level")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise where.error((key,), "unknown key")
    exp = raw.get("experiment", experiment)
    if exp is None:
        raise ConfigError("key 'experiment': missing")
    if experiment is not None and exp != experiment:
        raise where.error(("experiment",), f"config says {exp!r} but {experiment!r} was requested")
    if exp not in EXPERIMENTS:
        raise where.error(("experiment",), f"expected one of {EXPERIMENTS}, got {exp!r}")
    kw: dict[str, Any] = {"experiment": exp}
    if "n" in raw:
        kw["cardinalities"] = _cardinalities(where, raw["n"])
    if "temperature" in raw:
        t = raw["temperature"]
        ts = t if isinstance(t, (list, tuple)) else [t]
        temps = tuple(_number(where, ("temperature",), v) for v in ts)
        if not temps or any(v <= 0 for v in temps):
            raise where.error(("temperature",), "temperatures must be positive")
        kw["temperatures"] = temps
    if "rule" in raw:
        if raw["rule"] not in RULE_NAMES:
            raise where.error(("rule",), f"expected one of {RULE_NAMES}, got {raw['rule']!r}")
        kw["rule"] = raw["rule"]
    if "dimension" in raw:
        kw["dimension"] = _number(where, ("dimension",), raw["dimension"], int, positive=True)
    if "epsilon" in raw:
        eps = _number(where, ("epsilon",), raw["epsilon"], positive=True)
        if eps > 1:
            raise where.error(("epsilon",), "must lie in (0, 1]")
        kw["epsilon"] = eps
    if "action_kind" in raw:
        kw["action_kind"] = str(raw["action_kind"])
    if "strategies" in raw:
        items = raw["strategies"]
        if isinstance(items, (dict, str)) or items is None:
            items = [items]
        if not isinstance(items, list) or not items:
            raise where.error(("strategies",), "expected a non-empty list")
        kw["strategies"] = tuple(_strategy(where, ("strategies", i), s) for i, s in enumerate(items))
    for key in ("steps", "thin", "seed", "max_cardinality"):
        if raw.get(key) is not None:
            kw[key] = _number(where, (key,), raw[key], int, positive=True, allow_zero=key == "seed")
    if raw.get("burn_in") is not None:
        kw["burn_in"] = _number(where, ("burn_in",), raw["burn_in"], int, positive=True, allow_zero=True)
    if raw.get("lambda") is not None:
        kw["lam"] = _number(where, ("lambda",), raw["lambda"], positive=True)
    for key in ("input", "output", "initial"):
        if raw.get(key) is not None:
            kw[key] = str(raw[key])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig(**kw)
    try:
        return check(cfg)
    except ConfigError as exc:
        # Re-attach a line number when the offending key is in the text.
        msg = str(exc)
        key = msg.split("'")[1] if "'" in msg else None
        if key and (key,) in where.lines and not msg.startswith("line"):
            raise ConfigError(f"line {where.lines[(key,)]}: {msg}") from None
        raise
