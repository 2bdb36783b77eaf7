"""Service configuration: TOML-style sections of key = value pairs.

Supported value syntax: quoted strings, integers, floats, booleans, and
bare words (kept as strings). Registry-keyed thresholds use dotted keys,
e.g. ``download_threshold.npm = 5000``. Every built-in default can be
overridden; unknown keys are rejected so typos surface early.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .registry import RegistryId
from .search import SearchThresholds
from .trust import TrustPolicy


def parse_config_text(text: str) -> dict[str, dict[str, Any]]:
    sections: dict[str, dict[str, Any]] = {}
    current: Optional[str] = None
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        if current is None:
            raise ValueError(f"config line {lineno}: key outside a [section]")
        key, _, value = line.partition("=")
        sections[current][key.strip()] = _parse_value(value.strip(), lineno)
    return sections


def _parse_value(text: str, lineno: int) -> Any:
    if not text:
        raise ValueError(f"config line {lineno}: empty value")
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


@dataclass
class JudgeConfig:
    mode: str = "heuristic"  # heuristic | external
    endpoint: str = ""
    model: str = "judge"
    timeout: float = 30.0
    parallelism: int = 4


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8817
    static_dir: str = ""


@dataclass
class Config:
    workspace: Path = field(default_factory=lambda: Path("workspace"))
    trust: TrustPolicy = field(default_factory=TrustPolicy)
    thresholds: SearchThresholds = field(default_factory=SearchThresholds)
    judge: JudgeConfig = field(default_factory=JudgeConfig)
    weights_path: Optional[Path] = None
    server: ServerConfig = field(default_factory=ServerConfig)

    # Workspace file layout.
    @property
    def store_path(self) -> Path:
        return self.workspace / "store.jsonl"

    @property
    def alerts_path(self) -> Path:
        return self.workspace / "alerts.jsonl"

    @property
    def model_path(self) -> Path:
        return self.workspace / "model.bin"

    def index_path(self, registry: RegistryId) -> Path:
        return self.workspace / f"index-{registry.value}.bin"


def load_config(path: Optional[str | Path] = None) -> Config:
    config = Config()
    if path is None:
        return config
    sections = parse_config_text(Path(path).read_text(encoding="utf-8"))
    for section, values in sections.items():
        if section == "storage":
            for key, value in values.items():
                if key == "workspace":
                    config.workspace = Path(str(value))
                else:
                    raise ValueError(f"unknown [storage] key: {key}")
        elif section == "trust":
            _apply_trust(config.trust, values)
        elif section == "thresholds":
            _apply_thresholds(config.thresholds, values)
        elif section == "judge":
            for key, value in values.items():
                if not hasattr(config.judge, key):
                    raise ValueError(f"unknown [judge] key: {key}")
                setattr(config.judge, key, value)
        elif section == "weights":
            for key, value in values.items():
                if key == "path":
                    config.weights_path = Path(str(value))
                else:
                    raise ValueError(f"unknown [weights] key: {key}")
        elif section == "server":
            for key, value in values.items():
                if not hasattr(config.server, key):
                    raise ValueError(f"unknown [server] key: {key}")
                setattr(config.server, key, value)
        else:
            raise ValueError(f"unknown config section: [{section}]")
    return config


def _apply_trust(policy: TrustPolicy, values: dict[str, Any]) -> None:
    for key, value in values.items():
        if key.startswith("download_threshold."):
            registry = RegistryId.parse(key.split(".", 1)[1])
            policy.download_threshold[registry] = int(value)
        elif key.startswith("ranking_threshold."):
            registry = RegistryId.parse(key.split(".", 1)[1])
            policy.ranking_threshold[registry] = float(value)
        elif key == "download_dominance":
            policy.download_dominance = float(value)
        elif key == "ranking_dominance":
            policy.ranking_dominance = float(value)
        else:
            raise ValueError(f"unknown [trust] key: {key}")


def _apply_thresholds(thresholds: SearchThresholds, values: dict[str, Any]) -> None:
    for key, value in values.items():
        if not hasattr(thresholds, key):
            raise ValueError(f"unknown [thresholds] key: {key}")
        if key in ("levenshtein_max", "top_k", "ann_neighbors", "ef_search"):
            setattr(thresholds, key, int(value))
        else:
            setattr(thresholds, key, float(value))
    thresholds.__post_init__()
