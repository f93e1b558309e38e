"""Scenario configuration files.

A configuration is an INI-style text file with one section per scenario.
Every section names its ``kind``; the remaining keys are typed parameters
of that kind.  An optional sweep axis is given by ``sweep_param``,
``sweep_start``, ``sweep_stop`` and ``sweep_count``, and a second axis by
the same keys with a ``sweep2_`` prefix (the grid is their product).

Example::

    [fig3a]
    kind = branches
    alpha0_sq = 0.03
    gamma = 0.2
    a = 2.0
    y = 0
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

REQUIRED = object()

_BARRIER = {"B": (float, 30.0), "gamma": (float, 0.2), "alpha0_sq": (float, 0.03), "a": (float, REQUIRED)}
_TRACE = {
    "x_min": (float, 0.0),
    "x_max": (float, 2.5),
    "extensions": (bool, True),
    "extension_length": (float, 0.3),
    "h_max": (float, 0.05),
}
_ONED = {"E": (float, REQUIRED), "V": (float, REQUIRED), "a": (float, REQUIRED), "m": (float, 1.0), "hbar": (float, 1.0)}

#: kind -> {key: (type, default)}; ``REQUIRED`` marks keys without a default.
KINDS: dict[str, dict[str, tuple]] = {
    "branches": {**_BARRIER, "y": ("y", 0.0), **_TRACE},
    "critical": dict(_BARRIER),
    "penetration": dict(_BARRIER),
    "crosscheck": dict(_BARRIER),
    "threshold_sweep": {**_BARRIER, "a": (float, None)},
    "impurity": {
        "B": (float, 30.0),
        "u": (float, REQUIRED),
        "l": (float, REQUIRED),
        "a_imp": (float, REQUIRED),
        "k2": (float, REQUIRED),
        "x_start": (float, 1.1),
        "x_stop": (float, 2.0),
        "x_count": (int, 10),
        "check_regime": (bool, True),
    },
    "stokes1d": {**_ONED, "extent": (float, None), "step": (float, None)},
    "stokes2d": {**_BARRIER, "extent": (float, None)},
    "wire_zero_field": {
        "beta0": (float, REQUIRED),
        "E": (float, REQUIRED),
        "u0": (float, REQUIRED),
        "width_start": (float, REQUIRED),
        "width_stop": (float, REQUIRED),
        "width_count": (int, 12),
        "m": (float, 1.0),
        "hbar": (float, 1.0),
    },
    "caustics": {
        **_BARRIER,
        "b_start": (float, -0.2),
        "b_stop": (float, 0.2),
        "b_count": (int, 5),
        "half_span": (float, 0.5),
        "samples": (int, 101),
    },
}

_COMMON = {"kind", "format"}
_SWEEP_KEYS = ("param", "start", "stop", "count")
FORMATS = ("csv", "json")
DEFAULT_FORMAT = {"critical": "json", "impurity": "csv", "threshold_sweep": "csv"}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass(frozen=True)
class Sweep:
    param: str
    start: float
    stop: float
    count: int

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.count - 1)
        return [self.start + i * step for i in range(self.count)]


@dataclass
class Scenario:
    """One parsed section: typed parameters plus the raw text it came from."""

    name: str
    kind: str
    params: dict
    sweeps: list[Sweep] = field(default_factory=list)
    format: str = "csv"
    raw: dict = field(default_factory=dict)
    line: int | None = None

    @property
    def filename(self) -> str:
        return f"{self.name}.{self.format}"

    def grid(self) -> list[dict]:
        """Parameter sets for every sweep point, in row-major order."""
        points = [dict(self.params)]
        for sw in self.sweeps:
            points = [{**pt, sw.param: v} for pt in points for v in sw.values()]
        return points


def _line_map(text: str) -> dict[tuple[str | None, str | None], int]:
    """(section, key) -> 1-based line number; (section, None) for headers."""
    out: dict = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), i)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", s)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip()), i)
    return out


def _convert(kind, text: str, where: dict):
    s = text.strip()
    if kind is bool:
        low = s.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"expected a boolean, got {text!r}", **where)
    if kind == "y":
        if s.lower() == "delta":
            return "delta"
        kind = float
    try:
        val = kind(s)
    except ValueError:
        raise ConfigError(f"expected {kind.__name__}, got {text!r}", **where) from None
    if isinstance(val, float) and not math.isfinite(val):
        raise ConfigError(f"value must be finite, got {text!r}", **where)
    return val


def _parse_sweep(prefix: str, sec: configparser.SectionProxy, schema: dict, where) -> Sweep | None:
    keys = {k: f"{prefix}_{k}" for k in _SWEEP_KEYS}
    present = [full for full in keys.values() if full in sec]
    if not present:
        return None
    missing = [full for full in keys.values() if full not in sec]
    if missing:
        raise ConfigError(f"incomplete sweep axis: missing {missing[0]}", **where(missing[0]))
    param = sec[keys["param"]].strip()
    if param not in schema or schema[param][0] not in (float, "y"):
        raise ConfigError(f"sweep axis names no numeric parameter: {param!r}", **where(keys["param"]))
    start = _convert(float, sec[keys["start"]], where(keys["start"]))
    stop = _convert(float, sec[keys["stop"]], where(keys["stop"]))
    count = _convert(int, sec[keys["count"]], where(keys["count"]))
    if count < 2:
        raise ConfigError(f"sweep count must be at least 2, got {count}", **where(keys["count"]))
    return Sweep(param, start, stop, count)


def parse_config(text: str) -> list[Scenario]:
    """Parse configuration text into scenarios, in file order."""
    lines = _line_map(text)
    cp = configparser.ConfigParser(interpolation=None, default_section="\0none")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section {exc.section!r}", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key in section {exc.section!r}", line=exc.lineno, field=exc.option) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        ln = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=ln) from None
    if not cp.sections():
        raise ConfigError("configuration defines no scenario")
    out = []
    for name in cp.sections():
        sec = cp[name]

        def where(key, _name=name):
            return {"line": lines.get((_name, key), lines.get((_name, None))), "field": key}

        if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
            raise ConfigError(f"section name {name!r} is not a valid file stem", line=lines.get((name, None)))
        if "kind" not in sec:
            raise ConfigError(f"section {name!r} has no kind", line=lines.get((name, None)), field="kind")
        kind = sec["kind"].strip()
        if kind not in KINDS:
            raise ConfigError(f"unknown kind {kind!r}; expected one of {sorted(KINDS)}", **where("kind"))
        schema = KINDS[kind]
        fmt = sec.get("format", DEFAULT_FORMAT.get(kind, "csv")).strip()
        if fmt not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {fmt!r}", **where("format"))
        sweep_keys = {f"{p}_{k}" for p in ("sweep", "sweep2") for k in _SWEEP_KEYS}
        for key in sec:
            if key not in schema and key not in _COMMON and key not in sweep_keys:
                raise ConfigError(f"unknown key for kind {kind!r}", **where(key))
        params = {}
        for key, (typ, default) in schema.items():
            if key in sec:
                params[key] = _convert(typ, sec[key], where(key))
            elif default is REQUIRED:
                raise ConfigError(f"missing required key {key!r}", line=lines.get((name, None)), field=key)
            else:
                params[key] = default
        sweeps = [s for s in (_parse_sweep(p, sec, schema, where) for p in ("sweep", "sweep2")) if s]
        if len(sweeps) == 2 and sweeps[0].param == sweeps[1].param:
            raise ConfigError("both sweep axes name the same parameter", **where("sweep2_param"))
        raw = {key: sec[key] for key in sec}
        out.append(Scenario(name, kind, params, sweeps, fmt, raw, lines.get((name, None))))
    return out


def load_config(path) -> list[Scenario]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc.strerror}") from None
    return parse_config(text)
