"""Run configuration: a flat key=value file with CLI-flag overrides.

Every knob that can change results lives here (percentile rule, stop list,
seeds, betweenness mode, ...) so a run is reproducible from its persisted
``config.resolved`` alone.  Precedence: built-in defaults < config file <
command-line flags.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .ingest import STOP_WORDS, TokenizerConfig
from .netmetrics import MetricsConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # input
    input: str = ""
    schema: str = "coauthorship"  # coauthorship | qa
    out: str = ""
    strict: bool = False
    compact_snapshots: bool = True
    min_active_snapshots: int = 1
    min_instances: int = 1
    # tokenizer
    stemming: bool = True
    lowercase: bool = True
    min_token_length: int = 2
    stop_list: str = "default"  # "default" or a path to one word per line
    # relevance
    method: str = "iqr"  # iqr | modified-z
    percentile: str = "inclusive"  # inclusive | exclusive
    filter_trials: int = 0  # 0 = randomization filter off
    filter_alpha: float = 0.05
    seed: int = 0
    # metrics
    betweenness: str = "exact"  # exact | sampled:<pivots>
    betweenness_seed: int = 0
    pair_counting: str = "unordered"
    clustering: str = "paper-literal"
    pagerank_damping: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 200
    # validation
    alpha: float = 0.05
    buckets: str = "1,5,10,15"
    # execution
    workers: int = 0  # 0 = available parallelism

    def validate(self) -> None:
        if self.schema not in ("coauthorship", "qa"):
            raise ConfigError(f"schema must be coauthorship or qa, got {self.schema!r}")
        if self.method not in ("iqr", "modified-z"):
            raise ConfigError(f"method must be iqr or modified-z, got {self.method!r}")
        if self.percentile not in ("inclusive", "exclusive"):
            raise ConfigError(f"percentile must be inclusive or exclusive, got {self.percentile!r}")
        if self.filter_trials < 0:
            raise ConfigError("filter_trials must be >= 0")
        if not 0.0 < self.alpha < 1.0 or not 0.0 < self.filter_alpha < 1.0:
            raise ConfigError("alpha values must be in (0, 1)")
        try:
            self.bucket_bounds()
        except ValueError as err:
            raise ConfigError(str(err)) from None
        try:
            self.metrics_config()
        except ValueError as err:
            raise ConfigError(str(err)) from None

    def bucket_bounds(self) -> tuple[int, ...]:
        try:
            bounds = tuple(int(b) for b in self.buckets.split(","))
        except ValueError:
            raise ConfigError(f"buckets must be comma-separated integers: {self.buckets!r}") from None
        if list(bounds) != sorted(set(bounds)):
            raise ConfigError(f"buckets must be ascending and unique: {self.buckets!r}")
        return bounds

    def tokenizer_config(self) -> TokenizerConfig:
        if self.stop_list == "default":
            stop_words, source = STOP_WORDS, "english-1"
        else:
            path = Path(self.stop_list)
            try:
                words = path.read_text(encoding="utf-8").split()
            except OSError as err:
                raise ConfigError(f"cannot read stop list {path}: {err}") from None
            stop_words, source = frozenset(words), str(path)
        return TokenizerConfig(
            stop_words=stop_words,
            stop_source=source,
            stemming=self.stemming,
            lowercase=self.lowercase,
            min_token_length=self.min_token_length,
        )

    def metrics_config(self) -> MetricsConfig:
        mode, pivots = self.betweenness, 256
        if mode.startswith("sampled:"):
            try:
                pivots = int(mode.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad betweenness spec {mode!r} (want sampled:<pivots>)") from None
            mode = "sampled"
        elif mode == "sampled":
            pass
        elif mode != "exact":
            raise ConfigError(f"betweenness must be exact or sampled:<pivots>, got {mode!r}")
        return MetricsConfig(
            betweenness_mode=mode,
            betweenness_pivots=pivots,
            betweenness_seed=self.betweenness_seed,
            pair_counting=self.pair_counting,
            clustering_formula=self.clustering,
            pagerank_damping=self.pagerank_damping,
            pagerank_tol=self.pagerank_tol,
            pagerank_max_iter=self.pagerank_max_iter,
        )

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def to_text(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, text: str):
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {text!r}")
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected integer, got {text!r}") from None
    if kind == "float":
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected number, got {text!r}") from None
    return text


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Apply ``key = value`` lines over ``base`` (or fresh defaults)."""
    config = RunConfig(**vars(base)) if base is not None else RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        setattr(config, key, _coerce(key, value))
    return config


def load_config(path: Path, base: RunConfig | None = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config_text(text, base)
