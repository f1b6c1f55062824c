"""Simulation configuration: sectioned ``key = value`` files plus overrides.

Sections are ``[sim]``, ``[sampler]``, ``[reconstructor]`` and ``[eval]``.
Every key is optional; unknown sections and keys are errors, reported with
the offending line number.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .baselines import MODES
from .errors import ConfigError
from .reconstructor import ReconParams
from .sampler import SamplerParams


@dataclass
class SimConfig:
    width: int = 128
    height: int = 128
    budget: float = 400_000.0
    refresh_hz: float = 60.0
    duration: float = 4.0
    seed: int = 0
    modes: tuple[str, ...] = MODES
    scene: str = "orbit"
    camera_path: str = "orbit"
    out_dir: str = "out"
    ss: int = 4
    dump_every: int = 0
    t: float = 0.0
    sampler: SamplerParams = field(default_factory=SamplerParams)
    recon: ReconParams = field(default_factory=ReconParams)

    def validate(self) -> "SimConfig":
        if self.width < 8 or self.height < 8:
            raise ConfigError("width and height must be at least 8")
        if not self.duration > 0:
            raise ConfigError("duration must be positive")
        if not self.refresh_hz > 0 or self.budget < self.refresh_hz:
            raise ConfigError("need refresh_hz > 0 and budget >= refresh_hz")
        if self.ss < 1:
            raise ConfigError("ss must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        bad = [m for m in self.modes if m not in MODES]
        if bad or not self.modes:
            raise ConfigError(f"unknown mode(s) {bad}; expected from {', '.join(MODES)}")
        return self

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["modes"] = ",".join(self.modes)
        return d


# [sim] key -> SimConfig attribute; "mode" reads as a comma list
_SIM_KEYS = {
    "width": "width", "height": "height", "budget": "budget", "refresh_hz": "refresh_hz",
    "duration": "duration", "seed": "seed", "mode": "modes", "scene": "scene",
    "camera_path": "camera_path", "out_dir": "out_dir",
}
_EVAL_KEYS = {"ss": "ss", "dump_every": "dump_every", "t": "t"}


def _convert(raw: str, like, where: str):
    try:
        if isinstance(like, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(like, int):
            return int(raw)
        if isinstance(like, float):
            return float(raw)
        if isinstance(like, tuple):
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(like).__name__}") from None


def parse_config_text(text: str, source: str = "<config>", overrides: dict | None = None) -> SimConfig:
    cfg = SimConfig()
    sampler = dataclasses.asdict(cfg.sampler)
    recon = dataclasses.asdict(cfg.recon)
    sim: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        where = f"{source}:{lineno}"
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in ("sim", "sampler", "reconstructor", "eval"):
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"{where}: expected key = value, got {line!r}")
        if section is None:
            raise ConfigError(f"{where}: key {key!r} outside any section")
        if section == "sampler":
            if key not in sampler:
                raise ConfigError(f"{where}: unknown key {key!r} in [sampler]")
            sampler[key] = _convert(val, sampler[key], where)
        elif section == "reconstructor":
            if key not in recon:
                raise ConfigError(f"{where}: unknown key {key!r} in [reconstructor]")
            recon[key] = _convert(val, recon[key], where)
        else:
            keys = _SIM_KEYS if section == "sim" else _EVAL_KEYS
            if key not in keys:
                raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
            attr = keys[key]
            sim[attr] = _convert(val, getattr(cfg, attr), where)
    for attr, val in (overrides or {}).items():
        if val is None:
            continue
        if not hasattr(cfg, attr):
            raise ConfigError(f"unknown override {attr!r}")
        like = getattr(cfg, attr)
        if isinstance(val, str) or (isinstance(like, float) and isinstance(val, int)):
            val = _convert(str(val), like, f"override {attr}")
        sim[attr] = val
    try:
        cfg = dataclasses.replace(cfg, sampler=SamplerParams(**sampler),
                                  recon=ReconParams(**recon), **sim)
    except ValueError as e:
        raise ConfigError(f"{source}: {e}") from None
    return cfg.validate()


def parse_config(path: str | Path | None, overrides: dict | None = None) -> SimConfig:
    """Read ``path`` (or defaults when None) and apply non-None overrides on top."""
    if path is None:
        return parse_config_text("", "<defaults>", overrides)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"), str(p), overrides)
