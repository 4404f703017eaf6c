"""Run configuration: TOML/JSON parsing, per-experiment defaults, validation."""

from __future__ import annotations

import dataclasses
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, ParseError

EXPERIMENTS = ("fw_weight_reg", "spike_robustness", "lemma_mc", "noise_analysis", "momentum_audit")
SPIKE_METHODS = ("vanilla", "global_clip", "spectral_clip", "sgdm", "sgdm_preclip")
ETA0_GRID = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001]

# experiment -> defaults for fields left unset
_DEFAULTS = {
    "fw_weight_reg": dict(
        d=10, n=80, n_test=200, sigma_noise=5.0, b_list=[0.0, 0.1, 1.0], d2_list=[0.2, 1.0, 5.0],
        steps=1000, batch_size=20, modes=["deterministic", "stochastic"],
    ),
    "spike_robustness": dict(
        d=50, n=100, n_test=0, sigma_noise=5.0, ell_list=[10.0, 100.0, 1000.0], r=1, c=15.0,
        steps=300, eta0_grid=ETA0_GRID, methods=list(SPIKE_METHODS), momentum_beta=0.1,
    ),
    "lemma_mc": dict(d=60, r=1, ell_list=[20.0], c=2.0, g_norm=1.0, g_rank=1, draws=100_000),
    "noise_analysis": dict(
        d=20, n=200, n_test=0, sigma_noise=5.0, ell_list=[50.0], r=5, samples=50,
    ),
    "momentum_audit": dict(steps=1_000_000),
}


@dataclass
class RunConfig:
    """One experiment invocation. Unset (``None``) fields take experiment defaults."""

    experiment: str
    seed: int
    seeds: int = 1
    d: Optional[int] = None
    n: Optional[int] = None
    n_test: Optional[int] = None
    sigma_noise: Optional[float] = None
    ell_list: Optional[list] = None
    r: Optional[int] = None
    b_list: Optional[list] = None
    d2_list: Optional[list] = None
    lam: Optional[float] = None
    c: Optional[float] = None
    steps: Optional[int] = None
    batch_size: Optional[int] = None
    modes: Optional[list] = None
    eta0_grid: Optional[list] = None
    methods: Optional[list] = None
    momentum_beta: Optional[float] = None
    g_norm: Optional[float] = None
    g_rank: Optional[int] = None
    draws: Optional[int] = None
    samples: Optional[int] = None
    sample_noise: bool = True
    output_path: str = "results"
    extra: dict = field(default_factory=dict)

    def resolved(self) -> "RunConfig":
        """Copy with every unset field filled from the experiment defaults."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        updates = {k: v for k, v in _DEFAULTS[self.experiment].items() if getattr(self, k) is None}
        cfg = dataclasses.replace(self, **updates)
        validate(cfg)
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _positive(cfg, *names, allow_zero=False):
    for name in names:
        value = getattr(cfg, name)
        if value is None:
            continue
        if value < 0 or (value == 0 and not allow_zero):
            raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")


def validate(cfg: RunConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    _positive(cfg, "seeds", "d", "n", "r", "c", "steps", "batch_size", "g_rank", "draws", "samples", "lam")
    _positive(cfg, "n_test", "sigma_noise", "g_norm", allow_zero=True)
    if cfg.experiment == "momentum_audit" and cfg.steps is not None and cfg.steps < 1:
        raise ConfigError("momentum_audit needs steps >= 1")
    for name in ("ell_list", "b_list"):
        values = getattr(cfg, name)
        if values is not None and any(v < 0 for v in values):
            raise ConfigError(f"{name} entries must be non-negative")
    for name in ("d2_list", "eta0_grid"):
        values = getattr(cfg, name)
        if values is not None and (not values or any(v <= 0 for v in values)):
            raise ConfigError(f"{name} entries must be positive")
    if cfg.modes is not None and not set(cfg.modes) <= {"deterministic", "stochastic"}:
        raise ConfigError(f"unknown mode in {cfg.modes}")
    if cfg.methods is not None and not set(cfg.methods) <= set(SPIKE_METHODS):
        raise ConfigError(f"unknown method in {cfg.methods}; expected a subset of {SPIKE_METHODS}")
    if cfg.momentum_beta is not None and not 0 < cfg.momentum_beta <= 1:
        raise ConfigError("momentum_beta must lie in (0, 1]")
    if cfg.batch_size is not None and cfg.n is not None and cfg.batch_size > cfg.n:
        raise ConfigError("batch_size exceeds n")
    if cfg.r is not None and cfg.d is not None and cfg.r > cfg.d:
        raise ConfigError("r exceeds d")


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _line_of(text: str, key: str) -> Optional[int]:
    pattern = re.compile(rf'^\s*"?{re.escape(key)}"?\s*[=:]', re.MULTILINE)
    match = pattern.search(text)
    return None if match is None else text.count("\n", 0, match.start()) + 1


def config_from_dict(data: dict, text: str = "") -> RunConfig:
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ParseError(f"unknown key {unknown[0]!r}", field=unknown[0], line=_line_of(text, unknown[0]))
    for required in ("experiment", "seed"):
        if required not in data:
            raise ParseError(f"missing required field {required!r}", field=required)
    try:
        return RunConfig(**data).resolved()
    except ConfigError as exc:
        bad = re.match(r"(\w+) ", str(exc))
        name = bad.group(1) if bad and bad.group(1) in _FIELDS else None
        raise ParseError(str(exc), field=name, line=_line_of(text, name) if name else None) from exc


def parse_config_text(text: str, fmt: str) -> RunConfig:
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    elif fmt == "toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            found = re.search(r"line (\d+)", str(exc))
            raise ParseError(f"invalid TOML: {exc}", line=int(found.group(1)) if found else None) from exc
    else:
        raise ParseError(f"unsupported config format {fmt!r}")
    if not isinstance(data, dict):
        raise ParseError("config must be a table/object")
    return config_from_dict(data, text)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    fmt = "json" if path.suffix.lower() == ".json" else "toml"
    return parse_config_text(text, fmt)


def dump_config(cfg: RunConfig, path) -> None:
    """Write ``cfg`` as JSON; ``parse_config`` reads it back unchanged."""
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
