"""Service configuration: one JSON file, overridable via environment."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from importlib import resources
from typing import Mapping

ENV_PREFIX = "TABLETALK_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8037
    data_dir: str | None = "./tabletalk-data"
    cooldown_s: float = 6 * 3600.0
    radius_m: float = 2000.0
    tau: float = 0.5
    context_k: int = 10
    intents_path: str | None = None  # None: packaged default set
    calendar_path: str | None = None  # None: packaged food-day calendar
    auth_tokens: tuple[str, ...] = ("dev-token",)

    @classmethod
    def load(cls, path: str | None = None, env: Mapping[str, str] | None = None) -> "ServiceConfig":
        """Defaults <- config file <- TABLETALK_* environment variables."""
        values: dict = {}
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            unknown = set(data) - {f.name for f in fields(cls)}
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
            values.update(data)
        env = os.environ if env is None else env
        for f in fields(cls):
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if f.name == "auth_tokens":
                values[f.name] = [t for t in raw.split(",") if t]
            elif f.name in ("port", "context_k"):
                values[f.name] = int(raw)
            elif f.name in ("cooldown_s", "radius_m", "tau"):
                values[f.name] = float(raw)
            else:
                values[f.name] = raw
        if "auth_tokens" in values:
            values["auth_tokens"] = tuple(values["auth_tokens"])
        return cls(**values)


def packaged_intents_text() -> str:
    return resources.files("tabletalk").joinpath("data/intents.json").read_text(encoding="utf-8")


def packaged_calendar_text() -> str:
    return resources.files("tabletalk").joinpath("data/food_days.json").read_text(encoding="utf-8")
