"""Runtime budgets, loaded from JSON (path in $WEILFORM_CONFIG) or defaults."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields

from .errors import ValidationError


@dataclass(frozen=True)
class Config:
    max_module_order: int = 10_000
    max_rep_dim: int = 20_000
    default_trunc: int = 8
    # exact relation checks on representations of at most this dimension
    verify_dim: int = 128
    iso_search_max: int = 100

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: int(v) for k, v in data.items()})

    def to_dict(self) -> dict:
        return asdict(self)


_current: Config | None = None


def load_config(path: str | None = None) -> Config:
    path = path or os.environ.get("WEILFORM_CONFIG")
    if not path:
        return Config()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    return Config.from_dict(data)


def get_config() -> Config:
    global _current
    if _current is None:
        _current = load_config()
    return _current


def set_config(cfg: Config | None) -> None:
    global _current
    _current = cfg
