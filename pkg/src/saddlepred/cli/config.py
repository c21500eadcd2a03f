"""Flat ``key = value`` experiment configuration with strict, typed parsing.

Lines are ``key = value``; ``#`` starts a comment. Lists are comma
separated, matrices use ``;`` between rows (``K = 1, 2; 3, 4``).
Unknown keys and malformed values raise :class:`ConfigError` with the line
number.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from typing import Optional, Tuple

EXPERIMENTS = ("bilinear_orbit", "spectral", "ode_tracking", "theorem_rate", "toygan")
METHODS = ("plain", "predict", "both")


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "bilinear_orbit"
    method: str = "both"
    seeds: Tuple[int, ...] = (0,)
    output_dir: str = "runs"
    n_steps: int = 2000
    record_every: int = 1
    # saddle problems
    K: Tuple[Tuple[float, ...], ...] = ((1.0,),)
    mu: float = 1.0
    noise_std: float = 0.0
    alpha: float = 0.1
    beta: float = 0.1
    schedule: str = "constant"
    updater: str = "sgd"
    momentum: float = 0.9
    u0: Optional[Tuple[float, ...]] = None
    v0: Optional[Tuple[float, ...]] = None
    horizon: float = 10.0
    n_points: int = 60
    # toy GAN
    n_modes: int = 8
    radius: float = 1.0
    sigma: float = 0.01
    batch_size: int = 512
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    objective: str = "saturating"
    hidden: int = 128
    eval_every: int = 500
    probe_size: int = 10000
    sample_dump: int = 2000

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}", key="experiment")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}", key="method")
        if not self.seeds:
            raise ConfigError("seeds must not be empty", key="seeds")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be nonnegative", key="seeds")
        if self.n_steps < 0 or (self.n_steps == 0 and self.experiment != "toygan"):
            raise ConfigError("n_steps must be positive", key="n_steps")
        for key in ("record_every", "batch_size", "hidden", "eval_every", "probe_size", "n_points"):
            if getattr(self, key) < 1:
                raise ConfigError("must be >= 1", key=key)
        if self.schedule not in ("constant", "inverse_sqrt"):
            raise ConfigError("schedule must be constant or inverse_sqrt", key="schedule")
        if self.updater not in ("sgd", "momentum_sgd", "adam"):
            raise ConfigError("updater must be sgd, momentum_sgd or adam", key="updater")
        if self.objective not in ("saturating", "non_saturating"):
            raise ConfigError("objective must be saturating or non_saturating", key="objective")
        if len({len(r) for r in self.K}) != 1 or not self.K or not self.K[0]:
            raise ConfigError("K must be a nonempty rectangular matrix", key="K")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0", key="noise_std")
        if not (self.alpha > 0 and self.beta > 0):
            raise ConfigError("alpha and beta must be positive", key="alpha")
        return self

    @property
    def methods(self):
        return ("plain", "predict") if self.method == "both" else (self.method,)

    def config_hash(self):
        return hashlib.sha256(serialize(self).encode()).hexdigest()


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _kind(name):
    t = str(_FIELDS[name].type)
    if "Tuple[Tuple" in t:
        return "matrix"
    if "Tuple[int" in t:
        return "ints"
    if "Tuple[float" in t:
        return "floats"
    return {"int": "int", "float": "float", "str": "str"}[t]


def _parse_value(kind, text):
    text = text.strip()
    if kind == "str":
        if not text:
            raise ValueError("empty string")
        return text
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind in ("ints", "floats"):
        if text.lower() == "none":
            return None
        conv = int if kind == "ints" else float
        return tuple(conv(x) for x in text.split(",") if x.strip() != "") if text else ()
    rows = [r for r in text.split(";")]
    return tuple(tuple(float(x) for x in r.split(",")) for r in rows)


def _format_value(kind, value):
    if value is None:
        return "none"
    if kind in ("str", "int"):
        return str(value)
    if kind == "float":
        return repr(float(value))
    if kind in ("ints", "floats"):
        return ", ".join(repr(x) for x in value)
    return "; ".join(", ".join(repr(float(x)) for x in row) for row in value)


def parse(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in values:
            raise ConfigError("duplicate key", line=lineno, key=key)
        try:
            values[key] = _parse_value(_kind(key), value)
        except ValueError as err:
            raise ConfigError(f"bad value {value!r} ({err})", line=lineno, key=key) from None
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as err:
        raise ConfigError(str(err)) from None
    return cfg.validate()


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def serialize(cfg: ExperimentConfig) -> str:
    return "".join(f"{f.name} = {_format_value(_kind(f.name), getattr(cfg, f.name))}\n"
                   for f in fields(cfg))


def replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(cfg, **changes).validate()
