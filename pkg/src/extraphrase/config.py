"""Toolkit configuration file (JSON).

Example::

    {
      "compression": {"functional_deprels": ["case", "det"], "depth_rounding": "ceil"},
      "roundtrip": {
        "forward":  {"type": "http", "endpoint": "http://mt:8080/translate", "model": "en-de"},
        "backward": {"type": "http", "endpoint": "http://mt:8080/translate", "model": "de-en"},
        "batch_size": 32, "cache_path": "rt-cache.jsonl"
      },
      "augment": {"doc_sentence_limit": 3},
      "io": {"strict": false},
      "seed": 13
    }

Every section is optional. Unknown keys are an error. ``EXTRAPHRASE_ENDPOINT``
overrides the endpoint of every ``http`` backend.
"""

import copy
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

from extraphrase.augment import AugmentConfig
from extraphrase.deptree import DEFAULT_FUNCTIONAL_DEPRELS, CompressionConfig
from extraphrase.errors import ConfigError
from extraphrase.paraphrase import (
    DictionaryBackend,
    IdentityBackend,
    RetryPolicy,
    RoundTripConfig,
    http_backend,
)

ENDPOINT_ENV = "EXTRAPHRASE_ENDPOINT"

DEFAULTS: Dict[str, Any] = {
    "compression": {
        "functional_deprels": sorted(DEFAULT_FUNCTIONAL_DEPRELS),
        "depth_rounding": "ceil",
        "keep_threshold_override": None,
    },
    "roundtrip": None,
    "augment": {
        "doc_sentence_limit": 3,
        "pseudo_tag": "<Pseudo>",
        "tag_enabled": True,
        "truncate_source": False,
    },
    "metrics": {"bleu_smoothing": False, "rouge_l_variant": "text"},
    "io": {"strict": False, "group_by": "sentence"},
    "seed": 0,
    "workers": None,
}

ROUNDTRIP_DEFAULTS = {
    "forward": None,
    "backward": None,
    "batch_size": 32,
    "cache_path": None,
    "max_in_flight": 4,
    "retry": {"attempts": 3, "base_delay": 0.5, "max_delay": 8.0},
}

BACKEND_KEYS = {
    "identity": {"type", "identifier"},
    "dictionary": {"type", "table", "identifier"},
    "http": {"type", "endpoint", "model", "timeout"},
}


def _merge(defaults, given, where):
    if not isinstance(given, dict):
        raise ConfigError(f"{where or 'config'} must be an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(defaults[key], dict) and value is not None:
            out[key] = _merge(defaults[key], value, f"{where}.{key}" if where else key)
        else:
            out[key] = value
    return out


def _check_backend(spec, where):
    if not isinstance(spec, dict) or spec.get("type") not in BACKEND_KEYS:
        raise ConfigError(f"{where} must be an object with type in {sorted(BACKEND_KEYS)}")
    unknown = sorted(set(spec) - BACKEND_KEYS[spec["type"]])
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    if spec["type"] == "http" and not ({"endpoint", "model"} <= set(spec)):
        raise ConfigError(f"{where}: http backend needs endpoint and model")
    if spec["type"] == "dictionary" and not isinstance(spec.get("table"), dict):
        raise ConfigError(f"{where}: dictionary backend needs a table object")


def normalize(raw: Optional[dict]) -> dict:
    """Fill defaults and reject unknown keys. The result is what gets hashed
    into run manifests."""
    cfg = _merge(DEFAULTS, raw or {}, "")
    if cfg["roundtrip"] is not None:
        cfg["roundtrip"] = _merge(ROUNDTRIP_DEFAULTS, cfg["roundtrip"], "roundtrip")
        for side in ("forward", "backward"):
            _check_backend(cfg["roundtrip"][side], f"roundtrip.{side}")
    if cfg["metrics"]["rouge_l_variant"] != "text":
        raise ConfigError("metrics.rouge_l_variant: only 'text' is implemented")
    if cfg["io"]["group_by"] not in ("sentence", "sent_id"):
        raise ConfigError("io.group_by must be 'sentence' or 'sent_id'")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def make_backend(spec: dict, retry: RetryPolicy):
    kind = spec["type"]
    if kind == "identity":
        return IdentityBackend(spec.get("identifier", "identity"))
    if kind == "dictionary":
        return DictionaryBackend(spec["table"], spec.get("identifier"))
    endpoint = os.environ.get(ENDPOINT_ENV) or spec["endpoint"]
    return http_backend(endpoint, spec["model"], timeout=spec.get("timeout", 60.0),
                        retry_policy=retry)


@dataclass
class MetricsOptions:
    bleu_smoothing: bool = False
    rouge_l_variant: str = "text"


@dataclass
class ToolkitConfig:
    compression: CompressionConfig
    roundtrip: Optional[RoundTripConfig]
    augment: AugmentConfig
    metrics: MetricsOptions
    strict: bool
    group_by: str
    seed: int
    workers: Optional[int]
    normalized: dict

    @property
    def hash(self) -> str:
        return config_hash(self.normalized)

    @classmethod
    def from_dict(cls, raw: Optional[dict]) -> "ToolkitConfig":
        cfg = normalize(raw)
        try:
            comp = cfg["compression"]
            compression = CompressionConfig(
                functional_deprels=frozenset(comp["functional_deprels"]),
                depth_rounding=comp["depth_rounding"],
                keep_threshold_override=comp["keep_threshold_override"],
            )
            roundtrip = None
            rt = cfg["roundtrip"]
            if rt is not None:
                retry = RetryPolicy(**rt["retry"])
                in_flight = rt["max_in_flight"]
                if cfg["workers"]:
                    in_flight = min(in_flight, cfg["workers"])
                roundtrip = RoundTripConfig(
                    forward=make_backend(rt["forward"], retry),
                    backward=make_backend(rt["backward"], retry),
                    batch_size=rt["batch_size"],
                    cache_path=rt["cache_path"],
                    max_in_flight=in_flight,
                )
            aug = cfg["augment"]
            augment = AugmentConfig(compression=compression, roundtrip=roundtrip, **aug)
            metrics = MetricsOptions(**cfg["metrics"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(compression=compression, roundtrip=roundtrip, augment=augment,
                   metrics=metrics, strict=bool(cfg["io"]["strict"]),
                   group_by=cfg["io"]["group_by"], seed=int(cfg["seed"]),
                   workers=cfg["workers"], normalized=cfg)


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ToolkitConfig:
    """Read ``path`` (if any) and apply ``overrides``, a dict of the same
    shape whose leaves win over the file."""
    raw: dict = {}
    if path:
        try:
            with open(path, encoding="utf-8") as f:
                raw = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    cfg = normalize(raw)
    if overrides:
        cfg = _apply(cfg, overrides)
    return ToolkitConfig.from_dict(cfg)


def _apply(cfg, overrides):
    out = copy.deepcopy(cfg)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _apply(out[key], value)
        else:
            out[key] = value
    return out
