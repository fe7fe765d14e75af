"""Flat key=value configuration shared by every CLI subcommand.

Example::

    # paths
    bank = data/question_bank.tsv
    train = data/train.tsv
    scorers = lexical,remote:http://localhost:8080
    bm25_k1 = 1.2
    turn_limit = 3
    metrics = mrr@100,recall@30

Command-line flags override config values; unknown keys are an error.  The
environment variable ``CLARION_SCORER_URL`` overrides the base URL of every
remote scorer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from clarion.errors import ConfigError
from clarion.scoring import ScorerHandle

SCORER_URL_ENV = "CLARION_SCORER_URL"


@dataclass
class Config:
    bank: str | None = None
    train: str | None = None
    qrels: str | None = None
    scores: str | None = None
    index: str | None = None
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    recall_bm25: int = 100
    recall_short: int = 100
    dataset_seed: int = 42
    dataset_neg_bm25: int = 200
    dataset_neg_random: int = 300
    scorers: str = "lexical"
    classifier_url: str | None = None
    classifier_fallback: bool = False
    turn_limit: int = 3
    metrics: str = "mrr,p@3,ndcg@3,ndcg@5,recall@30"
    k: int = 30

    def __post_init__(self):
        for name in ("recall_bm25", "recall_short", "dataset_neg_bm25", "dataset_neg_random"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("turn_limit", "dataset_seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not self.bm25_k1 > 0:
            raise ConfigError("bm25_k1 must be > 0")
        if not 0.0 <= self.bm25_b <= 1.0:
            raise ConfigError("bm25_b must be in [0, 1]")

    def scorer_handles(self) -> list[ScorerHandle]:
        return parse_scorers(self.scorers)

    def classifier_handle(self) -> ScorerHandle | None:
        if not self.classifier_url:
            return None
        return ScorerHandle(kind="remote", base_url=self.classifier_url)

    def metric_list(self) -> list[str]:
        return [m for m in self.metrics.split(",") if m.strip()]


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}

_KEY_TYPES: dict[str, type] = {
    "bank": str,
    "train": str,
    "qrels": str,
    "scores": str,
    "index": str,
    "bm25_k1": float,
    "bm25_b": float,
    "recall_bm25": int,
    "recall_short": int,
    "dataset_seed": int,
    "dataset_neg_bm25": int,
    "dataset_neg_random": int,
    "scorers": str,
    "classifier_url": str,
    "classifier_fallback": bool,
    "turn_limit": int,
    "metrics": str,
    "k": int,
}


def _coerce(name: str, raw: str, target_type: type):
    try:
        if target_type is bool:
            return _BOOL_VALUES[raw.lower()]
        return target_type(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {target_type.__name__}")


def load_config(path: str) -> Config:
    """Parse a key=value file; '#' starts a comment, blank lines are skipped."""
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw_line in enumerate(f, start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
            name, _, raw = line.partition("=")
            name, raw = name.strip(), raw.strip()
            if name not in _KEY_TYPES:
                raise ConfigError(f"{path}:{line_no}: unknown config key {name!r}")
            values[name] = _coerce(name, raw, _KEY_TYPES[name])
    return Config(**values)


def parse_scorers(spec: str) -> list[ScorerHandle]:
    """Parse ``lexical,precomputed:FILE,remote:URL`` into scorer handles.

    ``CLARION_SCORER_URL``, when set, replaces every remote scorer's URL.
    """
    env_url = os.environ.get(SCORER_URL_ENV)
    handles: list[ScorerHandle] = []
    for entry in spec.split(","):
        entry = entry.strip()
        if not entry:
            continue
        kind, _, setting = entry.partition(":")
        if kind == "lexical":
            handles.append(ScorerHandle(kind="lexical"))
        elif kind == "precomputed":
            if not setting:
                raise ConfigError("precomputed scorer needs a path: precomputed:FILE")
            handles.append(ScorerHandle(kind="precomputed", path=setting))
        elif kind == "remote":
            url = env_url or setting
            if not url:
                raise ConfigError("remote scorer needs a URL: remote:http://host:port")
            handles.append(ScorerHandle(kind="remote", base_url=url))
        else:
            raise ConfigError(f"unknown scorer kind {kind!r}")
    if not handles:
        raise ConfigError("at least one scorer must be configured")
    return handles
