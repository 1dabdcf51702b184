"""Run configuration: every knob reachable through one flat key=value space.

Keys are `section.field` for the component configs (`cache.repl=ship`,
`mc.wrq_capacity=64`, `timing.twr=72`, `workload.kind=stream_triad`,
`geometry.rows_per_bank=65536`) and bare names for engine-level switches
(`pbpl=false`, `checked=true`). The same pairs are written into the stats
CSV header, so a result file names the exact configuration that made it and
`from_items` can rebuild that configuration.
"""

import hashlib
from dataclasses import dataclass, field, fields, replace

from .cache import CacheConfig
from .controller import ControllerConfig
from .errors import ConfigError
from .geometry import DramGeometry
from .timing import TimingParams
from .workload import WorkloadSpec

_SECTIONS = ("workload", "cache", "mc", "timing", "geometry")


@dataclass
class RunConfig:
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    cache: CacheConfig = field(default_factory=CacheConfig)
    mc: ControllerConfig = field(default_factory=ControllerConfig)
    timing: TimingParams = field(default_factory=TimingParams)
    geometry: DramGeometry = field(default_factory=DramGeometry)
    pbpl: bool = True
    x8: bool = False  # x8-device write spacing preset
    tracker_whole_reset: bool = False
    tracker_disabled: bool = False
    stream_budget: int = 16  # outstanding DRAM reads per stream
    checked: bool = False  # re-verify every committed command time
    keep_episodes: bool = False
    log_commands: bool = False

    def effective_timing(self) -> TimingParams:
        return self.timing.for_x8_devices() if self.x8 else self.timing

    def __post_init__(self):
        if self.stream_budget < 1:
            raise ConfigError("stream_budget must be >= 1")


def _convert(raw: str, typ, key: str):
    if typ is bool or typ == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if typ is int:
        try:
            return int(raw, 0)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if typ is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    return raw  # str-typed fields take the text as is


def _field_types(cls) -> dict:
    return {f.name: f.type for f in fields(cls)}

_TOP_TYPES = {
    f.name: f.type for f in fields(RunConfig) if f.name not in _SECTIONS
}


def apply_overrides(rc: RunConfig, pairs: dict[str, str]) -> RunConfig:
    """Return a new RunConfig with the given key=value overrides applied.

    Section validation reruns through each dataclass __post_init__, so a
    contradictory combination fails here with a ConfigError. The virtual key
    `mc.wrq` resizes the write queue with watermarks rescaled to the default
    ratios; explicit mc.* overrides in the same batch still win.
    """
    pairs = dict(pairs)
    wrq = pairs.pop("mc.wrq", None)
    if wrq is not None:
        size = _convert(wrq, int, "mc.wrq")
        rc = replace(rc, mc=rc.mc.with_wrq_capacity(size))
    section_kw: dict[str, dict] = {s: {} for s in _SECTIONS}
    top_kw: dict = {}
    for key, raw in pairs.items():
        sect, _, name = key.partition(".")
        if name and sect in _SECTIONS:
            types = _field_types(type(getattr(rc, sect)))
            if name not in types:
                raise ConfigError(f"unknown config key: {key}")
            section_kw[sect][name] = _convert(raw, types[name], key)
        elif key in _TOP_TYPES:
            top_kw[key] = _convert(raw, _TOP_TYPES[key], key)
        else:
            raise ConfigError(f"unknown config key: {key}")
    kw = dict(top_kw)
    for sect in _SECTIONS:
        if section_kw[sect]:
            kw[sect] = replace(getattr(rc, sect), **section_kw[sect])
    return replace(rc, **kw) if kw else rc


def parse_pairs(args: list[str]) -> dict[str, str]:
    pairs = {}
    for a in args:
        key, eq, val = a.partition("=")
        if not eq or not key:
            raise ConfigError(f"expected key=value, got {a!r}")
        pairs[key] = val
    return pairs


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def config_items(rc: RunConfig) -> list[tuple[str, str]]:
    """Flat sorted (key, value) pairs covering the whole configuration."""
    items = []
    for sect in _SECTIONS:
        obj = getattr(rc, sect)
        for f in fields(obj):
            items.append((f"{sect}.{f.name}", _fmt_value(getattr(obj, f.name))))
    for name in _TOP_TYPES:
        items.append((name, _fmt_value(getattr(rc, name))))
    items.sort()
    return items


def from_items(items) -> RunConfig:
    return apply_overrides(RunConfig(), dict(items))


def config_hash(rc: RunConfig) -> str:
    """Short digest over every knob; equal configs hash equal."""
    text = "\n".join(f"{k}={v}" for k, v in config_items(rc))
    return hashlib.sha256(text.encode()).hexdigest()[:12]
