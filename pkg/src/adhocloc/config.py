"""Scenario configuration: defaults, validation and the flat key=value file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

PROTOCOLS = ("forwarder_proactive", "forwarder_reactive", "centralized", "zoned")
CODE_BANDS = ("low", "medium", "high")
NODE_MOB_LABELS = ("low", "medium", "high", "custom")

#: node speed [min, max] m/s presets calibrated so the measured network
#: mobility lands in its band on the paper-scale area (see README, calibration)
NODE_SPEED_PRESETS = {
    "low": (2.0, 4.5),
    "medium": (8.0, 15.0),
    "high": (18.0, 30.0),
}

#: nominal Mob target per band, echoed into result rows
MOB_TARGETS = {"low": 1.5, "medium": 5.0, "high": 10.0}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    area: tuple[float, float] = (1000.0, 500.0)
    n_nodes: int = 25
    range: float = 250.0
    protocol: str = "forwarder_reactive"
    n_zones: int = 2
    lam: float = 0.25                       # config key: lambda (requests/second)
    node_mob: str = "medium"                # low | medium | high | custom
    node_speed: Optional[tuple[float, float]] = None
    code_band: str = "medium"
    duration: float = 200.0
    seed: int = 1
    mother: int = 0
    pause_time: float = 0.0
    metric_dt: float = 1.0
    per_hop_latency: float = 0.01
    ack_timeout: float = 0.03               # silence before a link is declared broken
    repair_ttl: int = 3
    chain_check_period: float = 1.0
    proactive_wait_ticks: int = 3
    report_period: float = 2.0              # registry update cadence (zoned)
    central_report_period: float = 1.0      # diffusion report cadence (centralized)
    reelection_period: float = 5.0
    handoff_threshold: float = 50.0
    server_service_time: float = 0.036
    max_retries: int = 3
    warmup: float = 10.0
    partition_grace: float = 30.0
    jump_rate_low: float = 0.1              # jumps/second per code band
    jump_rate_medium: float = 0.5
    jump_rate_high: float = 2.0

    def validated(self) -> "ScenarioConfig":
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}, expected one of {PROTOCOLS}")
        if self.code_band not in CODE_BANDS:
            raise ConfigError(f"unknown code_band {self.code_band!r}")
        if self.node_mob not in NODE_MOB_LABELS:
            raise ConfigError(f"unknown node_mob {self.node_mob!r}")
        if self.node_speed is None:
            if self.node_mob == "custom":
                raise ConfigError("node_mob=custom requires an explicit node_speed")
            self.node_speed = NODE_SPEED_PRESETS[self.node_mob]
        smin, smax = self.node_speed
        if not (0 < smin <= smax):
            raise ConfigError("node_speed must satisfy 0 < min <= max")
        w, h = self.area
        if w <= 0 or h <= 0:
            raise ConfigError("area dimensions must be positive")
        if self.n_nodes < 2:
            raise ConfigError("need at least two nodes")
        if not 0 <= self.mother < self.n_nodes:
            raise ConfigError("mother must name a node id")
        if self.range <= 0:
            raise ConfigError("radio range must be positive")
        if self.protocol == "zoned" and self.n_zones < 2:
            raise ConfigError("zoned protocol needs n_zones >= 2")
        if self.n_zones < 1:
            raise ConfigError("n_zones must be >= 1")
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if self.duration < 0:
            raise ConfigError("duration must be >= 0")
        if self.metric_dt <= 0:
            raise ConfigError("metric_dt must be positive")
        if self.duration > 0 and self.metric_dt >= self.duration:
            raise ConfigError("metric_dt must be smaller than duration")
        if self.per_hop_latency < 0 or self.pause_time < 0 or self.ack_timeout < 0:
            raise ConfigError("latency, pause_time and ack_timeout must be >= 0")
        if self.repair_ttl < 1:
            raise ConfigError("repair_ttl must be >= 1")
        if (self.chain_check_period <= 0 or self.report_period <= 0
                or self.central_report_period <= 0 or self.reelection_period <= 0):
            raise ConfigError("periods must be positive")
        if self.proactive_wait_ticks < 1:
            raise ConfigError("proactive_wait_ticks must be >= 1")
        if self.handoff_threshold < 0 or self.server_service_time < 0:
            raise ConfigError("handoff_threshold and server_service_time must be >= 0")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.warmup < 0 or self.partition_grace <= 0:
            raise ConfigError("warmup must be >= 0 and partition_grace > 0")
        for rate in (self.jump_rate_low, self.jump_rate_medium, self.jump_rate_high):
            if rate <= 0:
                raise ConfigError("jump rates must be positive")
        return self

    @property
    def jump_rate(self) -> float:
        return {"low": self.jump_rate_low,
                "medium": self.jump_rate_medium,
                "high": self.jump_rate_high}[self.code_band]

    @property
    def mob_target(self) -> Optional[float]:
        return MOB_TARGETS.get(self.node_mob)

    def replace(self, **updates) -> "ScenarioConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(updates)
        return ScenarioConfig(**data).validated()


#: file key -> dataclass field, where they differ
KEY_ALIASES = {"lambda": "lam"}

_INT_FIELDS = {"n_nodes", "n_zones", "seed", "mother", "repair_ttl",
               "proactive_wait_ticks", "max_retries"}
_STR_FIELDS = {"protocol", "node_mob", "code_band"}


def _parse_value(key: str, raw: str):
    if key == "area":
        parts = raw.lower().replace("x", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"area must look like 1000x500, got {raw!r}")
        return (float(parts[0]), float(parts[1]))
    if key == "node_speed":
        parts = [p for p in raw.replace(",", " ").split() if p]
        if len(parts) != 2:
            raise ConfigError(f"node_speed must be 'min,max', got {raw!r}")
        return (float(parts[0]), float(parts[1]))
    if key in _STR_FIELDS:
        return raw.strip()
    if key in _INT_FIELDS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {raw!r}") from None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {raw!r}") from None


def parse_config_text(text: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Parse the flat `key = value` format; unknown keys are rejected."""
    cfg = base if base is not None else ScenarioConfig()
    known = {f.name for f in fields(ScenarioConfig)}
    explicit_mob = False
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        attr = KEY_ALIASES.get(key, key)
        if attr not in known:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if attr == "node_mob":
            explicit_mob = True
        updates[attr] = _parse_value(attr, raw)
    if "node_speed" in updates and not explicit_mob and "node_mob" not in updates:
        updates.setdefault("node_mob", "custom")
    merged = {f.name: getattr(cfg, f.name) for f in fields(ScenarioConfig)}
    merged.update(updates)
    return ScenarioConfig(**merged).validated()


def load_config_file(path: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)
