"""Run configuration: one declarative tree of sections with centralized
defaults, loadable from TOML or JSON (including a run manifest's
``resolved_config``), overridable via dotted paths, and hashed for the run
store. Validation collects every problem at once, reported with its path.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .backends import BackendConfig
from .engine import AblationFlags, ScenarioEvent
from .market import (AdjustmentParams, ProductionParams, TaxSchedule,
                     TaylorParams)


class ConfigError(ValueError):
    """One or more configuration problems; ``errors`` lists them all."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("\n".join(errors))


@dataclass
class SentimentConfig:
    decay_lambda: float = 0.9
    work_gain: float = 0.5
    consume_gain: float = 1.3
    confidence_threshold: float = 0.5
    adjust_mode: str = "logit"


@dataclass
class MemoryConfig:
    capacity: int = 256
    short_term_size: int = 3
    retrieval_k: int = 5
    embed_dim: int = 256


@dataclass
class InitConfig:
    pareto_scale: float = 7.25   # U.S. federal minimum hourly wage
    pareto_shape: float = 5.0
    initial_capital: float = 1000.0
    savings_months: float = 1.0  # starting savings in months of gross pay
    investment_rate: float = 0.1


@dataclass
class RunConfig:
    n_agents: int = 100
    n_months: int = 240
    master_seed: int = 1
    production: ProductionParams = field(default_factory=ProductionParams)
    adjustment: AdjustmentParams = field(default_factory=AdjustmentParams)
    taxes: TaxSchedule = field(default_factory=TaxSchedule)
    taylor: TaylorParams = field(default_factory=TaylorParams)
    sentiment: SentimentConfig = field(default_factory=SentimentConfig)
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    init: InitConfig = field(default_factory=InitConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    scenario: list[ScenarioEvent] = field(default_factory=list)
    ablation: AblationFlags = field(default_factory=AblationFlags)
    defaulted_paths: list[str] = field(default_factory=list, compare=False)

    def validate(self, check_api_key: bool = True) -> None:
        errors: list[str] = []

        def check(path: str, fn) -> None:
            try:
                fn()
            except (ValueError, TypeError) as exc:
                errors.append(f"{path}: {exc}")

        if self.n_agents < 2:
            errors.append(f"n_agents: must be >= 2, got {self.n_agents}")
        if self.n_months < 12:
            errors.append(f"n_months: must be >= 12, got {self.n_months}")
        if self.master_seed < 0:
            errors.append(f"master_seed: must be >= 0, got {self.master_seed}")
        check("production", self.production.validate)
        check("adjustment", self.adjustment.validate)
        check("taxes", self.taxes.validate)
        check("taylor", self.taylor.validate)
        check("sentiment", lambda: _validate_sentiment(self.sentiment))
        check("memory", lambda: _validate_memory(self.memory))
        check("init", lambda: _validate_init(self.init))
        check("backend", self.backend.validate)
        if (check_api_key and self.backend.kind == "llm-http"
                and not os.environ.get(self.backend.api_key_env)):
            errors.append(
                f"backend.api_key_env: environment variable "
                f"{self.backend.api_key_env!r} is not set")
        for i, event in enumerate(self.scenario):
            check(f"scenario[{i}]", event.validate)
        for i, a in enumerate(self.scenario):
            for b in self.scenario[i + 1:]:
                if a.text == b.text and a.overlaps(b):
                    errors.append("scenario: overlapping identical events "
                                  f"{a.text!r}")
        if errors:
            raise ConfigError(errors)


def _validate_sentiment(s: SentimentConfig) -> None:
    from .cognition import SentimentState
    SentimentState(esi=0.0, decay_lambda=s.decay_lambda, work_gain=s.work_gain,
                   consume_gain=s.consume_gain,
                   confidence_threshold=s.confidence_threshold,
                   adjust_mode=s.adjust_mode).validate()


def _validate_memory(m: MemoryConfig) -> None:
    if m.capacity < 1:
        raise ValueError(f"capacity must be >= 1, got {m.capacity}")
    if m.short_term_size < 0:
        raise ValueError("short_term_size must be >= 0")
    if m.retrieval_k < 0:
        raise ValueError("retrieval_k must be >= 0")
    if m.embed_dim < 8:
        raise ValueError("embed_dim must be >= 8")


def _validate_init(i: InitConfig) -> None:
    if i.pareto_scale <= 0 or i.pareto_shape <= 0:
        raise ValueError("Pareto scale and shape must be > 0")
    if i.initial_capital < 0:
        raise ValueError("initial_capital must be >= 0")
    if i.savings_months < 0:
        raise ValueError("savings_months must be >= 0")
    if i.investment_rate < 0:
        raise ValueError("investment_rate must be >= 0")


def resolved_dict(config: RunConfig) -> dict:
    """The full config as a JSON-able tree with every default materialized."""
    return {
        "n_agents": config.n_agents,
        "n_months": config.n_months,
        "master_seed": config.master_seed,
        "production": {
            "productivity": config.production.productivity,
            "beta1": config.production.beta1,
            "beta2": config.production.beta2,
            "lambda_k": config.production.lambda_k,
            "depreciation": config.production.depreciation,
            "inefficiency": config.production.inefficiency,
            "hours_per_month": config.production.hours_per_month,
        },
        "adjustment": {
            "kappa": config.adjustment.kappa,
            "beta_w": config.adjustment.beta_w,
            "beta_p": config.adjustment.beta_p,
        },
        "taxes": {
            "brackets": [[lo, rate] for lo, rate in config.taxes.brackets],
            "redistribution_mode": config.taxes.redistribution_mode,
        },
        "taylor": {
            "natural_rate": config.taylor.natural_rate,
            "target_inflation": config.taylor.target_inflation,
            "natural_unemployment": config.taylor.natural_unemployment,
            "alpha_pi": config.taylor.alpha_pi,
            "alpha_u": config.taylor.alpha_u,
        },
        "sentiment": {
            "decay_lambda": config.sentiment.decay_lambda,
            "work_gain": config.sentiment.work_gain,
            "consume_gain": config.sentiment.consume_gain,
            "confidence_threshold": config.sentiment.confidence_threshold,
            "adjust_mode": config.sentiment.adjust_mode,
        },
        "memory": {
            "capacity": config.memory.capacity,
            "short_term_size": config.memory.short_term_size,
            "retrieval_k": config.memory.retrieval_k,
            "embed_dim": config.memory.embed_dim,
        },
        "init": {
            "pareto_scale": config.init.pareto_scale,
            "pareto_shape": config.init.pareto_shape,
            "initial_capital": config.init.initial_capital,
            "savings_months": config.init.savings_months,
            "investment_rate": config.init.investment_rate,
        },
        "backend": {
            "kind": config.backend.kind,
            "endpoint_url": config.backend.endpoint_url,
            "model_name": config.backend.model_name,
            "api_key_env": config.backend.api_key_env,
            "request_timeout": config.backend.request_timeout,
            "max_retries": config.backend.max_retries,
            "max_parallel_requests": config.backend.max_parallel_requests,
            "temperature": config.backend.temperature,
            "sampling_seed": config.backend.sampling_seed,
            "retry_base_delay": config.backend.retry_base_delay,
            "dump_traffic": config.backend.dump_traffic,
        },
        "scenario": [
            {"start_month": e.start_month, "end_month": e.end_month,
             "text": e.text, "esi_shock": e.esi_shock}
            for e in config.scenario
        ],
        "ablation": {
            "no_history_memory": config.ablation.no_history_memory,
            "no_sentiment_index": config.ablation.no_sentiment_index,
            "no_belief_factor": config.ablation.no_belief_factor,
            "no_investment_impact": config.ablation.no_investment_impact,
        },
    }


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(resolved_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _leaf_paths(tree: dict, prefix: str = "") -> list[str]:
    paths = []
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            paths.extend(_leaf_paths(value, path + "."))
        else:
            paths.append(path)
    return paths


def _deep_merge(base: dict, overlay: dict, prefix: str,
                errors: list[str]) -> dict:
    merged = dict(base)
    for key, value in overlay.items():
        path = f"{prefix}{key}"
        if key not in base and prefix:  # unknown section member
            errors.append(f"{path}: unknown configuration key")
            continue
        if key not in base:
            errors.append(f"{path}: unknown configuration key")
            continue
        if isinstance(base[key], dict) and isinstance(value, dict):
            merged[key] = _deep_merge(base[key], value, path + ".", errors)
        else:
            merged[key] = value
    return merged


def from_dict(user: dict) -> RunConfig:
    """Build a validated RunConfig from a plain tree, recording which
    leaves fell back to defaults."""
    errors: list[str] = []
    defaults = resolved_dict(RunConfig())
    merged = _deep_merge(defaults, user, "", errors)

    user_paths = set(_leaf_paths(user)) if user else set()
    defaulted = [p for p in _leaf_paths(defaults)
                 if p not in user_paths and not p.startswith("scenario")]

    def number(tree: dict, path: str, cast=float):
        value = tree
        for part in path.split("."):
            value = value[part]
        try:
            return cast(value)
        except (TypeError, ValueError):
            errors.append(f"{path}: expected {cast.__name__}, got {value!r}")
            return cast(0)

    try:
        scenario = [
            ScenarioEvent(
                start_month=int(e["start_month"]),
                end_month=None if e.get("end_month") is None else int(e["end_month"]),
                text=str(e.get("text", "")),
                esi_shock=float(e.get("esi_shock", 0.0)),
            )
            for e in merged.get("scenario", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"scenario: malformed event list ({exc})")
        scenario = []

    try:
        brackets = [(float(lo), float(rate))
                    for lo, rate in merged["taxes"]["brackets"]]
    except (TypeError, ValueError) as exc:
        errors.append(f"taxes.brackets: malformed bracket list ({exc})")
        brackets = list(TaxSchedule().brackets)

    config = RunConfig(
        n_agents=number(merged, "n_agents", int),
        n_months=number(merged, "n_months", int),
        master_seed=number(merged, "master_seed", int),
        production=ProductionParams(
            productivity=number(merged, "production.productivity"),
            beta1=number(merged, "production.beta1"),
            beta2=number(merged, "production.beta2"),
            lambda_k=number(merged, "production.lambda_k"),
            depreciation=number(merged, "production.depreciation"),
            inefficiency=number(merged, "production.inefficiency"),
            hours_per_month=number(merged, "production.hours_per_month", int),
        ),
        adjustment=AdjustmentParams(
            kappa=number(merged, "adjustment.kappa"),
            beta_w=number(merged, "adjustment.beta_w"),
            beta_p=number(merged, "adjustment.beta_p"),
        ),
        taxes=TaxSchedule(
            brackets=brackets,
            redistribution_mode=str(merged["taxes"]["redistribution_mode"]),
        ),
        taylor=TaylorParams(
            natural_rate=number(merged, "taylor.natural_rate"),
            target_inflation=number(merged, "taylor.target_inflation"),
            natural_unemployment=number(merged, "taylor.natural_unemployment"),
            alpha_pi=number(merged, "taylor.alpha_pi"),
            alpha_u=number(merged, "taylor.alpha_u"),
        ),
        sentiment=SentimentConfig(
            decay_lambda=number(merged, "sentiment.decay_lambda"),
            work_gain=number(merged, "sentiment.work_gain"),
            consume_gain=number(merged, "sentiment.consume_gain"),
            confidence_threshold=number(merged, "sentiment.confidence_threshold"),
            adjust_mode=str(merged["sentiment"]["adjust_mode"]),
        ),
        memory=MemoryConfig(
            capacity=number(merged, "memory.capacity", int),
            short_term_size=number(merged, "memory.short_term_size", int),
            retrieval_k=number(merged, "memory.retrieval_k", int),
            embed_dim=number(merged, "memory.embed_dim", int),
        ),
        init=InitConfig(
            pareto_scale=number(merged, "init.pareto_scale"),
            pareto_shape=number(merged, "init.pareto_shape"),
            initial_capital=number(merged, "init.initial_capital"),
            savings_months=number(merged, "init.savings_months"),
            investment_rate=number(merged, "init.investment_rate"),
        ),
        backend=BackendConfig(
            kind=str(merged["backend"]["kind"]).lower(),
            endpoint_url=str(merged["backend"]["endpoint_url"]),
            model_name=str(merged["backend"]["model_name"]),
            api_key_env=str(merged["backend"]["api_key_env"]),
            request_timeout=number(merged, "backend.request_timeout"),
            max_retries=number(merged, "backend.max_retries", int),
            max_parallel_requests=number(merged, "backend.max_parallel_requests", int),
            temperature=number(merged, "backend.temperature"),
            sampling_seed=number(merged, "backend.sampling_seed", int),
            retry_base_delay=number(merged, "backend.retry_base_delay"),
            dump_traffic=bool(merged["backend"]["dump_traffic"]),
        ),
        scenario=scenario,
        ablation=AblationFlags(
            no_history_memory=bool(merged["ablation"]["no_history_memory"]),
            no_sentiment_index=bool(merged["ablation"]["no_sentiment_index"]),
            no_belief_factor=bool(merged["ablation"]["no_belief_factor"]),
            no_investment_impact=bool(merged["ablation"]["no_investment_impact"]),
        ),
        defaulted_paths=defaulted,
    )
    if errors:
        raise ConfigError(errors)
    return config


def load_config(path: str | Path | None) -> RunConfig:
    """Load a TOML config, a JSON config, or a run manifest (JSON with a
    ``resolved_config`` key). A missing path yields pure defaults."""
    if path is None:
        return from_dict({})
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    if path.suffix == ".toml":
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    else:
        tree = json.loads(path.read_text())
    if isinstance(tree, dict) and "resolved_config" in tree:
        tree = tree["resolved_config"]
    if not isinstance(tree, dict):
        raise ConfigError([f"config root must be a table/object: {path}"])
    return from_dict(tree)


def parse_override_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(config: RunConfig, overrides: dict[str, object]) -> RunConfig:
    """Re-build the config with dotted-path overrides applied."""
    if not overrides:
        return config
    tree = resolved_dict(config)
    errors = []
    for dotted, value in overrides.items():
        node = tree
        parts = dotted.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                errors.append(f"{dotted}: unknown configuration key")
                break
            node = node[part]
        else:
            if parts[-1] not in node:
                errors.append(f"{dotted}: unknown configuration key")
            else:
                node[parts[-1]] = value
    if errors:
        raise ConfigError(errors)
    rebuilt = from_dict(tree)
    return replace(rebuilt, defaulted_paths=[
        p for p in config.defaulted_paths if p not in overrides])
