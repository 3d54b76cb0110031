"""Experiment configuration: JSON schema, validation, round-trip serialization.

A config names the environment (a corpus file or synthesis parameters plus
tag embeddings), the task, the strategies to run, and the loop/train/
acquisition parameters.  Validation errors carry the offending field path.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

from seafarer.acquisition import AcquisitionConfig
from seafarer.classifier import TrainConfig
from seafarer.corpus import DEFAULT_POLICIES
from seafarer.retrieval import STRATEGIES, RetrievalConfig

DEFAULT_SEEDS = [0, 1, 2, 3, 4]


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.field_path = path


@dataclass
class TaskSpec:
    kind: str = "tag"
    tag: str = ""
    tau: float = 0.8
    test_fraction: float = 0.2

    def validate(self, path: str = "task") -> None:
        if self.kind not in ("tag", "similarity"):
            raise ConfigError(f"{path}.kind", f"must be 'tag' or 'similarity', got {self.kind!r}")
        if not self.tag:
            raise ConfigError(f"{path}.tag", "must be a non-empty tag")
        if not 0 < self.tau <= 1:
            raise ConfigError(f"{path}.tau", f"must be in (0, 1], got {self.tau}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError(f"{path}.test_fraction", f"must be in (0, 1), got {self.test_fraction}")


@dataclass
class SynthSpec:
    n_items: int = 1000
    n_tags: int = 20
    d: int = 16
    k: int = 8
    seed: int = 7
    cluster_spread: float = 0.5

    def validate(self, path: str = "synth") -> None:
        if self.n_items < 2:
            raise ConfigError(f"{path}.n_items", f"must be >= 2, got {self.n_items}")
        if self.n_tags < 1:
            raise ConfigError(f"{path}.n_tags", f"must be >= 1, got {self.n_tags}")


@dataclass
class SourceSpec:
    kind: str = "memory"
    endpoint: str = ""
    timeout: float = 10.0

    def validate(self, path: str = "source") -> None:
        if self.kind not in ("memory", "remote"):
            raise ConfigError(f"{path}.kind", f"must be 'memory' or 'remote', got {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigError(f"{path}.endpoint", "remote source needs an endpoint URL")


@dataclass
class ExperimentConfig:
    corpus_path: str | None = None
    synth: SynthSpec | None = None
    embeddings_path: str | None = None
    default_embedding_policy: str = "zero_vector"
    task: TaskSpec = field(default_factory=TaskSpec)
    strategies: list[str] = field(default_factory=lambda: list(STRATEGIES))
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    budget: int = 100
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    source: SourceSpec = field(default_factory=SourceSpec)
    oracle: str = "simulated"
    out_dir: str = "runs"

    def validate(self) -> None:
        if (self.corpus_path is None) == (self.synth is None):
            raise ConfigError("corpus_path", "exactly one of corpus_path or synth must be set")
        if self.corpus_path is not None and not os.path.exists(self.corpus_path):
            raise ConfigError("corpus_path", f"no such file: {self.corpus_path}")
        if self.embeddings_path is not None and not os.path.exists(self.embeddings_path):
            raise ConfigError("embeddings_path", f"no such file: {self.embeddings_path}")
        if self.default_embedding_policy not in DEFAULT_POLICIES:
            raise ConfigError(
                "default_embedding_policy",
                f"must be one of {DEFAULT_POLICIES}, got {self.default_embedding_policy!r}",
            )
        if self.synth is not None:
            self.synth.validate()
        self.task.validate()
        if not self.strategies:
            raise ConfigError("strategies", "must name at least one strategy")
        for idx, strategy in enumerate(self.strategies):
            if strategy not in STRATEGIES:
                raise ConfigError(f"strategies[{idx}]", f"unknown strategy {strategy!r}")
        if self.budget < 1:
            raise ConfigError("budget", f"must be >= 1, got {self.budget}")
        if not self.seeds:
            raise ConfigError("seeds", "must name at least one seed")
        self.source.validate()
        if self.oracle not in ("simulated", "human"):
            raise ConfigError("oracle", f"must be 'simulated' or 'human', got {self.oracle!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        # 'lambda' is the documented JSON key for the ridge prior
        d["retrieval"]["lambda"] = d["retrieval"].pop("ridge")
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("", "config must be a JSON object")
        known = dict(obj)

        def sub(name: str, klass, path: str):
            raw = known.pop(name, None)
            if raw is None:
                return None
            if not isinstance(raw, dict):
                raise ConfigError(path, "must be an object")
            if klass is RetrievalConfig and "lambda" in raw:
                raw = dict(raw)
                raw["ridge"] = raw.pop("lambda")
            try:
                return klass(**raw)
            except TypeError as exc:
                raise ConfigError(path, f"unknown or missing field ({exc})") from None
            except ValueError as exc:
                raise ConfigError(path, str(exc)) from None

        kwargs: dict = {}
        for name, klass in [
            ("synth", SynthSpec),
            ("task", TaskSpec),
            ("retrieval", RetrievalConfig),
            ("train", TrainConfig),
            ("acquisition", AcquisitionConfig),
            ("source", SourceSpec),
        ]:
            value = sub(name, klass, name)
            if value is not None:
                kwargs[name] = value
        for name in (
            "corpus_path",
            "embeddings_path",
            "default_embedding_policy",
            "strategies",
            "budget",
            "seeds",
            "oracle",
            "out_dir",
        ):
            if name in known:
                kwargs[name] = known.pop(name)
        if known:
            raise ConfigError(sorted(known)[0], "unknown config field")
        try:
            cfg = cls(**kwargs)
        except ValueError as exc:
            raise ConfigError("", str(exc)) from None
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"{path} is not valid JSON: {exc.msg}") from exc
    cfg = ExperimentConfig.from_dict(obj)
    cfg.validate()
    return cfg


def save_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json())
