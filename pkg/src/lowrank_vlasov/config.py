"""Run-configuration parsing.

Grammar: one `key = value` per line, `#` starts a comment, keys are exactly
the RunConfig field names, vectors are comma-separated.  Events use
`name(key=value, ...)`, separated by `;`.  Example:

    scenario   = landau_2d
    integrator = strang
    r          = 10
    grid       = 64, 256
    tau        = 0.025
    T          = 40
    stride     = 1
    output     = landau.csv

Unknown keys, malformed values, and violated invariants are reported with
the key name and line number.
"""

import re
from dataclasses import dataclass, field

from .scenarios import SCENARIOS


class ConfigError(ValueError):
    """A configuration problem, with the offending key and line in the message."""


@dataclass(frozen=True)
class Event:
    """A timed mid-run action (currently only `inject_echo`)."""

    name: str
    t: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    integrator: str
    r: int
    grid: tuple
    tau: float
    T: float
    stride: int = 1
    output: str | None = None
    r_x: int | None = None
    r_v: int | None = None
    r_E: int | None = None
    events: tuple = ()


_INT_KEYS = {"r", "r_x", "r_v", "r_E", "stride"}
_FLOAT_KEYS = {"tau", "T"}
_STR_KEYS = {"scenario", "integrator", "output"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | {"grid", "events"}

_EVENT_RE = re.compile(r"^\s*(\w+)\s*\(([^()]*)\)\s*$")


def _fail(key: str, line: int, why: str):
    raise ConfigError(f"config line {line}: key '{key}': {why}")


def _parse_int(key, raw, line):
    try:
        return int(raw)
    except ValueError:
        _fail(key, line, f"expected an integer, got {raw!r}")


def _parse_float(key, raw, line):
    try:
        return float(raw)
    except ValueError:
        _fail(key, line, f"expected a number, got {raw!r}")


def _parse_events(raw: str, line: int):
    events = []
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        m = _EVENT_RE.match(part)
        if not m:
            _fail("events", line, f"expected name(key=value, ...), got {part!r}")
        name, body = m.group(1), m.group(2)
        if name != "inject_echo":
            _fail("events", line, f"unknown event {name!r}")
        params = {}
        for item in body.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                _fail("events", line, f"malformed event argument {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            params[k] = _parse_float("events", v, line)
        missing = {"t", "alpha", "k2"} - params.keys()
        extra = params.keys() - {"t", "alpha", "k2"}
        if missing:
            _fail("events", line, f"event {name} missing argument(s) {sorted(missing)}")
        if extra:
            _fail("events", line, f"event {name} got unknown argument(s) {sorted(extra)}")
        events.append(Event(name, params["t"], {"alpha": params["alpha"], "k2": params["k2"]}))
    return tuple(sorted(events, key=lambda e: e.t))


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a run configuration."""
    values = {}
    lines = {}
    for ln, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {ln}: expected 'key = value', got {rawline.strip()!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"config line {ln}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"config line {ln}: duplicate key '{key}'")
        lines[key] = ln
        if key in _INT_KEYS:
            values[key] = _parse_int(key, raw, ln)
        elif key in _FLOAT_KEYS:
            values[key] = _parse_float(key, raw, ln)
        elif key == "grid":
            values[key] = tuple(_parse_int("grid", p.strip(), ln) for p in raw.split(","))
        elif key == "events":
            values[key] = _parse_events(raw, ln)
        else:
            if not raw:
                _fail(key, ln, "empty value")
            values[key] = raw

    for req in ("scenario", "integrator", "r", "grid", "tau", "T"):
        if req not in values:
            raise ConfigError(f"config: missing required key '{req}'")

    def fail(key, why):
        _fail(key, lines.get(key, 0), why)

    name = values["scenario"]
    if name not in SCENARIOS:
        fail("scenario", f"unknown scenario {name!r} (choose from {sorted(SCENARIOS)})")
    dims = SCENARIOS[name].dims

    integ = values["integrator"]
    if integ not in ("lie", "strang"):
        fail("integrator", f"must be 'lie' or 'strang', got {integ!r}")
    if integ == "strang" and dims == 4:
        fail("integrator", "strang is only valid for 2D runs; hierarchical runs use lie")

    if values["tau"] <= 0:
        fail("tau", "must be positive")
    if values["T"] < 0:
        fail("T", "must be nonnegative")
    if values["r"] < 1:
        fail("r", "must be at least 1")
    for rk in ("r_x", "r_v", "r_E"):
        if values.get(rk) is not None and values[rk] < 1:
            fail(rk, "must be at least 1")
    if "stride" in values and values["stride"] < 1:
        fail("stride", "must be at least 1")

    grid = values["grid"]
    if len(grid) != dims:
        fail("grid", f"scenario '{name}' needs {dims} grid sizes, got {len(grid)}")
    if any(n < 2 for n in grid):
        fail("grid", "grid sizes must be at least 2")

    if dims == 4:
        for rk in ("r_x", "r_v"):
            if values.get(rk) is None:
                fail(rk, "required for hierarchical (4D) runs")
        if values.get("events"):
            fail("events", "events are only supported for 2D runs")
    for ev in values.get("events", ()):
        if not 0 <= ev.t <= values["T"]:
            fail("events", f"event time {ev.t} outside [0, T]")

    if "stride" not in values:
        values["stride"] = 1 if dims == 2 else 40

    return RunConfig(
        scenario=name,
        integrator=integ,
        r=values["r"],
        grid=grid,
        tau=values["tau"],
        T=values["T"],
        stride=values["stride"],
        output=values.get("output"),
        r_x=values.get("r_x"),
        r_v=values.get("r_v"),
        r_E=values.get("r_E"),
        events=values.get("events", ()),
    )


def render_config(cfg: RunConfig) -> str:
    """Inverse of parse_config (for round-trip checks and logging)."""
    out = [
        f"scenario = {cfg.scenario}",
        f"integrator = {cfg.integrator}",
        f"r = {cfg.r}",
        "grid = " + ", ".join(str(n) for n in cfg.grid),
        f"tau = {cfg.tau!r}",
        f"T = {cfg.T!r}",
        f"stride = {cfg.stride}",
    ]
    if cfg.output is not None:
        out.append(f"output = {cfg.output}")
    for rk in ("r_x", "r_v", "r_E"):
        val = getattr(cfg, rk)
        if val is not None:
            out.append(f"{rk} = {val}")
    if cfg.events:
        rendered = "; ".join(
            f"{e.name}(t={e.t!r}, alpha={e.params['alpha']!r}, k2={e.params['k2']!r})"
            for e in cfg.events
        )
        out.append(f"events = {rendered}")
    return "\n".join(out) + "\n"
