"""Flat ``key=value`` rule configuration shared by engine, views, messenger and controllers."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RuleConfig:
    lives: int = 3
    pill_score: int = 10
    power_pill_score: int = 50
    edible_time: int = 200
    edible_decay: float = 0.9
    lair_time: int = 40
    exit_ticks: tuple[int, int, int, int] = (0, 10, 20, 30)
    level_tick_limit: int = 4000
    max_levels: int = 16

    po_model: str = "los"
    po_range: int = 0  # 0 selects longest corridor + 1 per maze
    po_metric: str = "euclidean"
    po_d: float = 10.0

    msg_delta_c: int = 1
    msg_delta_x: int = 1
    msg_delta_m_pacman_seen: int = 0
    msg_delta_m_i_am: int = 0
    msg_delta_m_i_am_heading: int = 0

    ctrl_limit: int = 20
    ctrl_ppill_proximity: int = 15
    ctrl_chase_probability: float = 0.9
    pogc_threshold: int = 50

    def __post_init__(self) -> None:
        problems = []
        if self.lives < 1:
            problems.append("lives must be >= 1")
        for name in ("pill_score", "power_pill_score", "edible_time", "lair_time", "ctrl_limit",
                     "ctrl_ppill_proximity", "pogc_threshold", "po_range"):
            if getattr(self, name) < 0:
                problems.append(f"{_to_key(name)} must be >= 0")
        if self.lair_time < 1:
            problems.append("lair_time must be >= 1")
        if self.level_tick_limit < 1 or self.max_levels < 1:
            problems.append("level_tick_limit and max_levels must be >= 1")
        if not 0 < self.edible_decay <= 1:
            problems.append("edible_decay must be in (0, 1]")
        if len(self.exit_ticks) != 4 or min(self.exit_ticks) < 0:
            problems.append("exit_ticks needs four non-negative values")
        if self.po_model not in ("full", "los", "forward_los", "radius"):
            problems.append(f"unknown po.model {self.po_model!r}")
        if self.po_metric not in ("euclidean", "manhattan"):
            problems.append(f"unknown po.metric {self.po_metric!r}")
        if self.po_d <= 0:
            problems.append("po.d must be > 0")
        for name in ("msg_delta_c", "msg_delta_x", "msg_delta_m_pacman_seen", "msg_delta_m_i_am",
                     "msg_delta_m_i_am_heading"):
            if getattr(self, name) < 0:
                problems.append(f"{_to_key(name)} must be >= 0")
        if not 0 <= self.ctrl_chase_probability <= 1:
            problems.append("ctrl.chase_probability must be in [0, 1]")
        if problems:
            raise ConfigError("; ".join(problems))

    def with_overrides(self, overrides: Mapping[str, Any]) -> "RuleConfig":
        """Return a copy with ``key=value`` style overrides applied (keys as in config files)."""
        changes = {}
        for key, value in overrides.items():
            attr = _to_attr(key)
            changes[attr] = _coerce(attr, value)
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{_to_key(f.name)}={value}")
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    def edible_ticks(self, level: int) -> int:
        return int(self.edible_time * self.edible_decay ** (level - 1) + 1e-9)


_FIELDS = {f.name: f for f in dataclasses.fields(RuleConfig)}
_PREFIXES = ("po_", "msg_delta_m_", "msg_", "ctrl_", "pogc_")


def _to_key(attr: str) -> str:
    for prefix in _PREFIXES:
        if attr.startswith(prefix):
            return prefix.rstrip("_").replace("_", ".").replace("delta.m", "delta_m") + "." + attr[len(prefix):]
    return attr


def _to_attr(key: str) -> str:
    attr = key.strip().replace(".", "_")
    if attr not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    return attr


def _coerce(attr: str, value: Any) -> Any:
    default = _FIELDS[attr].default
    try:
        if isinstance(default, tuple):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return tuple(int(v) for v in value)
        if isinstance(default, bool):
            return str(value).lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value).strip()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value {value!r} for {_to_key(attr)}") from exc


def parse_config_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        _to_attr(key)
        entries[key.strip()] = value.strip()
    return entries


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RuleConfig:
    config = RuleConfig()
    if path is not None:
        config = config.with_overrides(parse_config_text(Path(path).read_text()))
    if overrides:
        config = config.with_overrides(overrides)
    return config
