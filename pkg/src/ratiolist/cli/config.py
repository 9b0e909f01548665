"""Experiment configuration: flags, key-value config files and spec-string parsing.

A config file holds one ``key = value`` per line, with ``#`` starting a
comment line. Keys are the long flag names with or without the leading
dashes (``rate-bits`` and ``rate_bits`` are the same key). A JSON record
line written by ``--format records`` is also accepted, in which case its
``config`` object is used. Flags given on the command line override the file.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..channel import Channel, bec, bsc, load_channel, noiseless, useless
from ..codes import MAX_CODEBOOK_SIZE, RatioFunction
from ..decoding import TIE_POLICIES, Metric, load_metric_table
from ..analysis.core import DECODER_KINDS

LN2 = math.log(2.0)
COMMANDS = ("capacity", "exact", "simulate", "bounds", "sweep", "idbound")
FORMATS = ("text", "csv", "records")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    command: str
    channel: str | None = None
    metric: str = "matched"
    code: str = "random"
    M: int | None = None
    n: int | None = None
    ratio: str | None = None
    rate_bits: float | None = None
    theta_bits: float = 0.0
    list_size: int | None = None
    decoder: str = "top_l"
    tie_policy: str = "lowest_index"
    tau: float = -math.inf
    trials: int = 10_000
    seed: int = 0
    out: str | None = None
    format: str = "text"
    workers: int = 1
    spectrum: bool = False
    n_grid: list = field(default_factory=list)
    rate_grid_bits: list = field(default_factory=list)
    theta_grid_bits: list = field(default_factory=list)
    capacity_bits: float | None = None
    eps: float | None = None
    delta: float | None = None
    max_M: int = 2**22

    def echo(self) -> dict:
        """Every setting except the output destination, for the run record."""
        d = asdict(self)
        d.pop("out")
        d.pop("format")
        return d


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_INT_KEYS = {"M", "n", "list_size", "trials", "seed", "workers", "max_M"}
_FLOAT_KEYS = {"rate_bits", "theta_bits", "tau", "capacity_bits", "eps", "delta"}
_LIST_INT = {"n_grid"}
_LIST_FLOAT = {"rate_grid_bits", "theta_grid_bits"}


def _norm_key(k: str) -> str:
    k = k.strip().lstrip("-").replace("-", "_")
    return "M" if k.lower() == "m" else ("max_M" if k.lower() == "max_m" else k)


def _parse_grid(text, conv) -> list:
    if isinstance(text, (list, tuple)):
        return [conv(v) for v in text]
    text = str(text).strip()
    if not text:
        return []
    return [conv(v) for v in text.replace(",", " ").split()]


def _float(v) -> float:
    if isinstance(v, str) and v.strip().lower() in ("-inf", "-infinity"):
        return -math.inf
    return float(v)


def coerce(key: str, value):
    """Convert a raw string (or JSON value) for ``key`` to its configured type."""
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if key in _FLOAT_KEYS:
            return _float(value)
        if key in _LIST_INT:
            return _parse_grid(value, int)
        if key in _LIST_FLOAT:
            return _parse_grid(value, float)
        if key == "spectrum":
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return str(value)


def load_config_file(path: str, command: str | None = None) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        rec = json.loads(stripped.splitlines()[0])
        raw = dict(rec.get("config", rec))
        recorded = raw.pop("command", None)
        if command is not None and recorded not in (None, command):
            raise ConfigError(f"{path} records a {recorded!r} run, not {command!r}")
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            raw[k] = v.strip()
    out = {}
    for k, v in raw.items():
        key = _norm_key(k)
        if key not in _FIELD_TYPES or key == "command":
            raise ConfigError(f"unknown config key {k!r}")
        out[key] = coerce(key, v)
    return out


def build_config(command: str, file_values: dict, flag_values: dict) -> ExperimentConfig:
    """Merge defaults, file values and flags (in increasing priority), then validate."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    cfg = ExperimentConfig(command=command, **merged)
    validate(cfg)
    return cfg


def parse_channel(spec: str) -> Channel:
    """``bsc:p``, ``bec:e``, ``noiseless:k``, ``useless:AxB`` or a channel file path."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "bsc":
            return bsc(float(arg))
        if kind == "bec":
            return bec(float(arg))
        if kind == "noiseless":
            return noiseless(int(arg))
        if kind == "useless":
            a, _, b = arg.lower().partition("x")
            return useless(int(a), int(b))
    except ValueError as exc:
        raise ConfigError(f"bad channel spec {spec!r}: {exc}") from None
    if not Path(spec).is_file():
        raise ConfigError(f"channel file not found: {spec}")
    try:
        return load_channel(spec)
    except ValueError as exc:
        raise ConfigError(f"invalid channel file {spec}: {exc}") from None


def parse_metric(spec: str, ch: Channel) -> Metric:
    """``matched``, ``matched:<channel spec>``, ``hamming``, ``erasures`` or ``table:path``."""
    kind, _, arg = spec.partition(":")
    if kind == "matched":
        ref = parse_channel(arg) if arg else ch
        metric = Metric.matched(ref)
    elif kind == "hamming":
        metric = Metric.hamming(ch.input_size, ch.output_size)
    elif kind in ("erasures", "erasures_only"):
        metric = Metric.erasures_only(ch)
    elif kind == "table":
        if not Path(arg).is_file():
            raise ConfigError(f"metric table not found: {arg}")
        try:
            metric = load_metric_table(arg)
        except ValueError as exc:
            raise ConfigError(f"invalid metric table {arg}: {exc}") from None
    else:
        raise ConfigError(f"unknown metric spec {spec!r}")
    if metric.input_size != ch.input_size or metric.output_size != ch.output_size:
        raise ConfigError("metric alphabet does not match the channel")
    return metric


def parse_ratio(spec: str, theta_bits: float = 0.0) -> RatioFunction:
    """``full``, ``list:L``, ``exponent`` (uses theta), ``exponent:bits``, ``iterated_log`` or ``power:alpha``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "full":
            return RatioFunction.full()
        if kind in ("list", "constant_list"):
            return RatioFunction.constant_list(int(arg))
        if kind == "exponent":
            return RatioFunction.exponent((float(arg) if arg else theta_bits) * LN2)
        if kind in ("iterated_log", "log"):
            return RatioFunction.iterated_log()
        if kind == "power":
            return RatioFunction.power(float(arg))
    except ValueError as exc:
        raise ConfigError(f"bad ratio spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown ratio spec {spec!r}")


def validate(cfg: ExperimentConfig) -> None:
    """Range and existence checks; raises :class:`ConfigError` before any computation."""
    if cfg.format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.format!r}")
    if cfg.decoder not in DECODER_KINDS:
        raise ConfigError(f"unknown decoder {cfg.decoder!r}")
    if cfg.tie_policy not in TIE_POLICIES:
        raise ConfigError(f"unknown tie policy {cfg.tie_policy!r}")
    if cfg.trials < 1:
        raise ConfigError("trials must be positive")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if cfg.workers < 1:
        raise ConfigError("workers must be positive")
    if cfg.theta_bits < 0:
        raise ConfigError("theta must be nonnegative")
    if cfg.n is not None and cfg.n < 1:
        raise ConfigError("n must be positive")
    if cfg.M is not None and not 1 <= cfg.M <= MAX_CODEBOOK_SIZE:
        raise ConfigError(f"M must lie in [1, {MAX_CODEBOOK_SIZE}]")
    if cfg.list_size is not None and cfg.list_size < 1:
        raise ConfigError("list size must be positive")
    if cfg.rate_bits is not None and cfg.rate_bits <= 0:
        raise ConfigError("rate must be positive")
    if math.isnan(cfg.tau) or cfg.tau == math.inf:
        raise ConfigError("tau must be a real number or -inf")
    if cfg.command != "idbound" or cfg.capacity_bits is None:
        if cfg.channel is None:
            raise ConfigError(f"{cfg.command} needs --channel")
        ch = parse_channel(cfg.channel)
        if cfg.command != "capacity":
            parse_metric(cfg.metric, ch)
    if cfg.ratio is not None:
        parse_ratio(cfg.ratio, cfg.theta_bits)
    if cfg.command in ("exact", "simulate", "bounds"):
        if cfg.code == "random":
            if cfg.n is None:
                raise ConfigError("a random code needs --n")
            if cfg.M is None and cfg.rate_bits is None:
                raise ConfigError("a random code needs --M or --rate-bits")
        elif not Path(cfg.code).is_file():
            raise ConfigError(f"codebook file not found: {cfg.code}")
    if cfg.command == "bounds":
        if cfg.n is None and cfg.code == "random":
            raise ConfigError("bounds needs --n")
    if cfg.command == "sweep":
        if any(v < 1 for v in cfg.n_grid):
            raise ConfigError("grid block lengths must be positive")
        if any(v <= 0 for v in cfg.rate_grid_bits):
            raise ConfigError("grid rates must be positive")
        if any(v < 0 for v in cfg.theta_grid_bits):
            raise ConfigError("grid thetas must be nonnegative")
        if cfg.code != "random":
            raise ConfigError("sweep draws random codes; --code must be 'random'")
    if cfg.command == "idbound":
        if cfg.eps is None or cfg.delta is None:
            raise ConfigError("idbound needs --eps and --delta")
        if cfg.eps < 0 or cfg.delta <= cfg.eps:
            raise ConfigError("idbound needs delta > eps >= 0")
        if cfg.capacity_bits is not None and cfg.capacity_bits <= 0:
            raise ConfigError("capacity must be positive")
