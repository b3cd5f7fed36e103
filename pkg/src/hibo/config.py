"""Run configuration: JSON in, fully resolved JSON echoed back out."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any

from .local_optimizer import TrustRegionConfig, default_n_candidates
from .navigator import NavigatorConfig
from .objective_io import ExternalObjectiveSpec
from .surrogate import GpConfig


class AlgorithmKind(str, Enum):
    HIBO = "hibo"
    HIBO_GP = "hibo-gp"
    TURBO = "turbo"
    GP_BO = "gp-bo"
    RANDOM = "random"
    RESTRICTED = "restricted-tree"

    @property
    def uses_tree(self) -> bool:
        return self in (AlgorithmKind.HIBO, AlgorithmKind.HIBO_GP, AlgorithmKind.RESTRICTED)

    @property
    def uses_trust_region(self) -> bool:
        return self in (AlgorithmKind.HIBO, AlgorithmKind.TURBO, AlgorithmKind.RESTRICTED)


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid config: " + "; ".join(problems))


@dataclass(frozen=True)
class RunConfig:
    algorithm: AlgorithmKind = AlgorithmKind.HIBO
    benchmark: str | None = "levy"
    total_dim: int = 20
    effective_dim: int | None = None
    permute_seed: int | None = None
    budget: int = 100
    init_samples: int = 20
    seed: int = 0
    n_candidates: int | None = None
    restart_resets_depth: bool = True
    restricted_retries: int = 5
    record_timing: bool = False
    penalty_seconds: float = 100.0
    baseline_value: float | None = None
    output_dir: str = "runs/out"
    surrogate: GpConfig = field(default_factory=GpConfig)
    trust_region: TrustRegionConfig = field(default_factory=TrustRegionConfig)
    navigator: NavigatorConfig = field(default_factory=NavigatorConfig)
    external: ExternalObjectiveSpec | None = None

    @property
    def dim(self) -> int:
        return len(self.external.params) if self.external is not None else self.total_dim

    @property
    def resolved_n_candidates(self) -> int:
        return self.n_candidates if self.n_candidates is not None else default_n_candidates(self.dim)

    def validate(self) -> "RunConfig":
        problems = []
        if self.budget < 1:
            problems.append("budget: must be >= 1")
        if not 1 <= self.init_samples < self.budget:
            problems.append("init_samples: must satisfy 1 <= init_samples < budget")
        elif self.init_samples < 2 and self.algorithm is not AlgorithmKind.RANDOM:
            problems.append("init_samples: model-based kinds need at least 2")
        if self.external is None:
            if self.benchmark is None:
                problems.append("benchmark: required when no external objective is given")
            if self.total_dim < 1:
                problems.append("total_dim: must be >= 1")
            if self.effective_dim is not None and self.effective_dim > self.total_dim:
                problems.append("effective_dim: must not exceed total_dim")
        elif self.benchmark is not None:
            problems.append("benchmark: must be null when external is given")
        if self.n_candidates is not None and self.n_candidates < 1:
            problems.append("n_candidates: must be >= 1")
        nav = self.navigator
        if nav.initial_depth < 1 or nav.restart_depth < 1:
            problems.append("navigator.initial_depth/restart_depth: must be >= 1")
        if nav.tau <= 0:
            problems.append("navigator.tau: must be > 0")
        if nav.cp < 0:
            problems.append("navigator.cp: must be >= 0")
        if self.surrogate.n_restarts < 1:
            problems.append("surrogate.n_restarts: must be >= 1")
        if problems:
            raise ConfigError(problems)
        return self

    def to_dict(self) -> dict[str, Any]:
        """Resolved form: every default materialized, JSON-serializable."""
        out: dict[str, Any] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Enum):
                v = v.value
            elif isinstance(v, ExternalObjectiveSpec):
                v = v.to_dict()
            elif hasattr(v, "__dataclass_fields__"):
                v = {k: list(x) if isinstance(x, tuple) else x for k, x in asdict(v).items()}
            out[f.name] = v
        out["n_candidates"] = self.resolved_n_candidates
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"{k}: unknown key" for k in unknown])
        kw = dict(d)
        problems = []
        try:
            if "algorithm" in kw:
                kw["algorithm"] = AlgorithmKind(kw["algorithm"])
        except ValueError:
            problems.append(f"algorithm: unknown kind {d['algorithm']!r}")
        for name, typ in (("surrogate", GpConfig), ("trust_region", TrustRegionConfig),
                          ("navigator", NavigatorConfig)):
            if name in kw:
                sub = kw[name]
                allowed = {f.name for f in fields(typ)}
                bad = sorted(set(sub) - allowed)
                problems += [f"{name}.{k}: unknown key" for k in bad]
                sub = {k: tuple(v) if isinstance(v, list) else v
                       for k, v in sub.items() if k in allowed}
                kw[name] = typ(**sub)
        if kw.get("external") is not None:
            try:
                kw["external"] = ExternalObjectiveSpec.from_dict(kw["external"])
                if "benchmark" not in d:
                    kw["benchmark"] = None
            except (KeyError, TypeError, ValueError) as exc:
                problems.append(f"external: {exc}")
        if problems:
            raise ConfigError(problems)
        return cls(**kw).validate()


def load_config(path: str | Path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh))


def dump_config(config: RunConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
