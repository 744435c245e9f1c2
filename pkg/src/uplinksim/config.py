"""Scenario configuration: a line-oriented sectioned key=value format.

Grammar (see README for the full reference)::

    # comment / blank lines anywhere
    [frame]                 at most once
    duration_ms = 10
    capacity_bytes = 16000
    bandwidth_mhz = 4.3     informational only

    [run]                   at most once
    modes = ss1 ss2 gpc     or: all
    frames = 3000
    seeds = 1 2
    rhos = 1.0
    window_ms = 1000
    warmup = 0.1
    drop_expired = off
    trace = off
    outdir = out

    [connection]            once per connection
    cid = 0
    ss = 0
    class = rtps
    max_sustained_kbps = 1024    QoS block: omit all three to get the
    min_reserved_kbps = 512      per-class defaults; a partial block is an
    max_latency_ms = 20          error (the class decides which are needed)
    weight = 4
    model = onoff                omit model to get the class default source
    rate_kbps = 1024
    size_bytes = 100 1250        one value = fixed size, two = uniform range
    on_ms = 500
    off_ms = 500

Parsing is strict: unknown sections or keys are errors, and every scenario
validation check runs at parse time.  Errors carry line numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .engine import ConnSpec, Scenario, SimMode
from .model import (
    FrameConfig,
    QosParams,
    ServiceClass,
    validate_scenario,
)
from .traffic import TrafficKind, TrafficModel, default_models, model_violations

#: QoS fallbacks applied when a connection omits its whole QoS block.
DEFAULT_QOS: dict[ServiceClass, QosParams] = {
    ServiceClass.UGS: QosParams(max_sustained_kbps=256.0, weight=1.0),
    ServiceClass.RTPS: QosParams(
        max_sustained_kbps=1024.0, min_reserved_kbps=512.0,
        max_latency_ms=20.0, weight=4.0,
    ),
    ServiceClass.NRTPS: QosParams(
        max_sustained_kbps=1024.0, min_reserved_kbps=512.0, weight=2.0,
    ),
    ServiceClass.BE: QosParams(min_reserved_kbps=256.0, weight=1.0),
}

_QOS_KEYS = ("max_sustained_kbps", "min_reserved_kbps", "max_latency_ms")
_FRAME_KEYS = {"duration_ms", "capacity_bytes", "bandwidth_mhz"}
_RUN_KEYS = {
    "modes", "frames", "seeds", "rhos", "window_ms", "warmup",
    "drop_expired", "trace", "outdir",
}
_CONN_KEYS = {
    "cid", "ss", "class", "max_sustained_kbps", "min_reserved_kbps",
    "max_latency_ms", "weight", "model", "rate_kbps", "size_bytes",
    "on_ms", "off_ms",
}


class ConfigError(ValueError):
    """Parse or validation failure; ``errors`` lists every problem found."""

    def __init__(self, errors: list[str]):
        super().__init__("\n".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    modes: tuple[SimMode, ...] = (SimMode.SS1,)
    frames: int = 3000
    seeds: tuple[int, ...] = (1,)
    rhos: tuple[float, ...] = (1.0,)
    window_ms: float = 1000.0
    warmup: float = 0.1
    drop_expired: bool = False
    trace: bool = False
    outdir: str = "out"


def _tokenize(text: str):
    """Yield (line_no, kind, payload) where kind is 'section' or 'pair'."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            yield line_no, "section", line[1:-1].strip().lower()
        elif "=" in line:
            key, _, value = line.partition("=")
            yield line_no, "pair", (key.strip().lower(), value.strip())
        else:
            yield line_no, "bad", line


def _parse_bool(value: str, line: int, key: str, errors: list[str]) -> bool:
    if value.lower() in ("on", "true", "yes", "1"):
        return True
    if value.lower() in ("off", "false", "no", "0"):
        return False
    errors.append(f"line {line}: {key} must be on/off, got {value!r}")
    return False


def _parse_float(value: str, line: int, key: str, errors: list[str]) -> float:
    try:
        return float(value)
    except ValueError:
        errors.append(f"line {line}: {key} must be a number, got {value!r}")
        return 0.0


def _parse_int(value: str, line: int, key: str, errors: list[str]) -> int:
    try:
        return int(value)
    except ValueError:
        errors.append(f"line {line}: {key} must be an integer, got {value!r}")
        return 0


def _build_conn(raw: dict, line: int, errors: list[str]) -> ConnSpec | None:
    for key in ("cid", "ss", "class"):
        if key not in raw:
            errors.append(f"line {line}: connection is missing required key {key}")
            return None
    local: list[str] = []
    cid = _parse_int(raw["cid"][0], raw["cid"][1], "cid", local)
    ss = _parse_int(raw["ss"][0], raw["ss"][1], "ss", local)
    try:
        service_class = ServiceClass.from_label(raw["class"][0])
    except ValueError as exc:
        local.append(f"line {raw['class'][1]}: {exc}")
        errors.extend(local)
        return None

    qos_given = {k: raw[k] for k in _QOS_KEYS if k in raw}
    if qos_given:
        # a partially specified QoS block is an error: the class decides
        # which fields are mandatory, so fill nothing in silently
        fields = {}
        for key, (value, kline) in qos_given.items():
            fields[key] = _parse_float(value, kline, key, local)
        qos = QosParams(**fields)
    else:
        qos = DEFAULT_QOS[service_class]
    if "weight" in raw:
        qos = replace(qos, weight=_parse_float(raw["weight"][0], raw["weight"][1],
                                               "weight", local))

    if "model" in raw:
        value, kline = raw["model"]
        try:
            kind = TrafficKind.from_label(value)
        except ValueError as exc:
            local.append(f"line {kline}: {exc}")
            errors.extend(local)
            return None
        if "rate_kbps" not in raw or "size_bytes" not in raw:
            local.append(
                f"line {kline}: cid {cid}: an explicit model needs rate_kbps "
                "and size_bytes"
            )
            errors.extend(local)
            return None
        rate = _parse_float(*raw["rate_kbps"][:2], "rate_kbps", local)
        size_text, sline = raw["size_bytes"]
        parts = size_text.split()
        if len(parts) == 1:
            lo = hi = _parse_int(parts[0], sline, "size_bytes", local)
        elif len(parts) == 2:
            lo = _parse_int(parts[0], sline, "size_bytes", local)
            hi = _parse_int(parts[1], sline, "size_bytes", local)
        else:
            local.append(f"line {sline}: size_bytes takes one or two values")
            lo = hi = 1
        on_ms = (_parse_float(*raw["on_ms"][:2], "on_ms", local)
                 if "on_ms" in raw else 500.0)
        off_ms = (_parse_float(*raw["off_ms"][:2], "off_ms", local)
                  if "off_ms" in raw else 500.0)
        model = TrafficModel(kind, rate, lo, hi, on_ms, off_ms)
    else:
        for key in ("rate_kbps", "size_bytes", "on_ms", "off_ms"):
            if key in raw:
                local.append(
                    f"line {raw[key][1]}: cid {cid}: {key} requires an "
                    "explicit model"
                )
        model = default_models()[service_class]

    errors.extend(local)
    if local:
        return None
    return ConnSpec(cid=cid, ss_id=ss, service_class=service_class,
                    qos=qos, traffic=model)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario configuration.

    Raises ConfigError carrying every problem found, each with its line.
    """
    errors: list[str] = []
    frame_raw: dict[str, tuple[str, int]] = {}
    run_raw: dict[str, tuple[str, int]] = {}
    conn_raws: list[tuple[dict, int]] = []
    section = None
    current: dict[str, tuple[str, int]] | None = None

    for line_no, kind, payload in _tokenize(text):
        if kind == "bad":
            errors.append(f"line {line_no}: expected 'key = value', got {payload!r}")
            continue
        if kind == "section":
            if payload == "frame":
                section, current = "frame", frame_raw
            elif payload == "run":
                section, current = "run", run_raw
            elif payload == "connection":
                current = {}
                conn_raws.append((current, line_no))
                section = "connection"
            else:
                errors.append(f"line {line_no}: unknown section [{payload}]")
                section, current = None, None
            continue
        key, value = payload
        if section is None or current is None:
            errors.append(f"line {line_no}: {key} appears outside any section")
            continue
        allowed = {"frame": _FRAME_KEYS, "run": _RUN_KEYS,
                   "connection": _CONN_KEYS}[section]
        if key not in allowed:
            errors.append(f"line {line_no}: unknown key {key!r} in [{section}]")
            continue
        if key in current:
            errors.append(f"line {line_no}: duplicate key {key!r}")
            continue
        current[key] = (value, line_no)

    frame = FrameConfig(
        frame_duration_ms=(
            _parse_float(*frame_raw["duration_ms"][:2], "duration_ms", errors)
            if "duration_ms" in frame_raw else 10.0),
        uplink_capacity_bytes=(
            _parse_int(*frame_raw["capacity_bytes"][:2], "capacity_bytes", errors)
            if "capacity_bytes" in frame_raw else 5375),
        channel_bandwidth_mhz=(
            _parse_float(*frame_raw["bandwidth_mhz"][:2], "bandwidth_mhz", errors)
            if "bandwidth_mhz" in frame_raw else 4.3),
    )

    specs: list[ConnSpec] = []
    for raw, line in conn_raws:
        spec = _build_conn(raw, line, errors)
        if spec is not None:
            specs.append(spec)
    if not conn_raws:
        errors.append("config defines no subscriber stations (no [connection] sections)")

    kwargs: dict = {}
    if "modes" in run_raw:
        value, line = run_raw["modes"]
        labels = value.split()
        if labels == ["all"]:
            kwargs["modes"] = (SimMode.SS1, SimMode.SS2, SimMode.GPC)
        else:
            modes = []
            for label in labels:
                try:
                    modes.append(SimMode.from_label(label))
                except ValueError as exc:
                    errors.append(f"line {line}: {exc}")
            kwargs["modes"] = tuple(modes)
    if "frames" in run_raw:
        kwargs["frames"] = _parse_int(*run_raw["frames"][:2], "frames", errors)
        if kwargs["frames"] <= 0:
            errors.append(f"line {run_raw['frames'][1]}: frames must be > 0")
    if "seeds" in run_raw:
        value, line = run_raw["seeds"]
        kwargs["seeds"] = tuple(
            _parse_int(tok, line, "seeds", errors) for tok in value.split()
        )
        if not kwargs["seeds"]:
            errors.append(f"line {line}: seeds must list at least one value")
    if "rhos" in run_raw:
        value, line = run_raw["rhos"]
        kwargs["rhos"] = tuple(
            _parse_float(tok, line, "rhos", errors) for tok in value.split()
        )
        if not kwargs["rhos"]:
            errors.append(f"line {line}: rhos must list at least one value")
        elif any(r < 0 for r in kwargs["rhos"]):
            errors.append(f"line {line}: rhos must be >= 0")
    if "window_ms" in run_raw:
        kwargs["window_ms"] = _parse_float(*run_raw["window_ms"][:2],
                                           "window_ms", errors)
        if kwargs["window_ms"] <= 0:
            errors.append(f"line {run_raw['window_ms'][1]}: window_ms must be > 0")
    if "warmup" in run_raw:
        kwargs["warmup"] = _parse_float(*run_raw["warmup"][:2], "warmup", errors)
        if not (0 <= kwargs["warmup"] < 1):
            errors.append(f"line {run_raw['warmup'][1]}: warmup must be in [0, 1)")
    if "drop_expired" in run_raw:
        kwargs["drop_expired"] = _parse_bool(*run_raw["drop_expired"][:2],
                                             "drop_expired", errors)
    if "trace" in run_raw:
        kwargs["trace"] = _parse_bool(*run_raw["trace"][:2], "trace", errors)
    if "outdir" in run_raw:
        kwargs["outdir"] = run_raw["outdir"][0]

    scenario = Scenario(frame=frame, conns=tuple(sorted(specs, key=lambda s: s.cid)))
    if not errors:
        errors.extend(validate_scenario(scenario.build_connections(), frame))
        for spec in scenario.conns:
            errors.extend(model_violations(spec.cid, spec.traffic, frame))
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(scenario=scenario, **kwargs)


def _fmt(value: float) -> str:
    return repr(float(value))


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg."""
    out = []
    frame = cfg.scenario.frame
    out.append("[frame]")
    out.append(f"duration_ms = {_fmt(frame.frame_duration_ms)}")
    out.append(f"capacity_bytes = {frame.uplink_capacity_bytes}")
    out.append(f"bandwidth_mhz = {_fmt(frame.channel_bandwidth_mhz)}")
    out.append("")
    out.append("[run]")
    out.append("modes = " + " ".join(m.value for m in cfg.modes))
    out.append(f"frames = {cfg.frames}")
    out.append("seeds = " + " ".join(str(s) for s in cfg.seeds))
    out.append("rhos = " + " ".join(_fmt(r) for r in cfg.rhos))
    out.append(f"window_ms = {_fmt(cfg.window_ms)}")
    out.append(f"warmup = {_fmt(cfg.warmup)}")
    out.append(f"drop_expired = {'on' if cfg.drop_expired else 'off'}")
    out.append(f"trace = {'on' if cfg.trace else 'off'}")
    out.append(f"outdir = {cfg.outdir}")
    for spec in cfg.scenario.conns:
        out.append("")
        out.append("[connection]")
        out.append(f"cid = {spec.cid}")
        out.append(f"ss = {spec.ss_id}")
        out.append(f"class = {spec.service_class.label}")
        for key in _QOS_KEYS:
            value = getattr(spec.qos, key)
            if value is not None:
                out.append(f"{key} = {_fmt(value)}")
        out.append(f"weight = {_fmt(spec.qos.weight)}")
        m = spec.traffic
        out.append(f"model = {m.kind.value}")
        out.append(f"rate_kbps = {_fmt(m.mean_rate_kbps)}")
        if m.size_lo == m.size_hi:
            out.append(f"size_bytes = {m.size_lo}")
        else:
            out.append(f"size_bytes = {m.size_lo} {m.size_hi}")
        if m.kind is TrafficKind.ONOFF_VBR:
            out.append(f"on_ms = {_fmt(m.mean_on_ms)}")
            out.append(f"off_ms = {_fmt(m.mean_off_ms)}")
    out.append("")
    return "\n".join(out)


def baseline_scenario(capacity_bytes: int = 16000) -> Scenario:
    """Built-in four-station cell: each SS carries one connection of every
    service class with the default QoS contracts and traffic sources.

    The default capacity leaves headroom above the 7680 bytes/frame of
    guaranteed minimums so the excess-distribution phase has work to do.
    """
    frame = FrameConfig(frame_duration_ms=10.0, uplink_capacity_bytes=capacity_bytes)
    models = default_models()
    order = (ServiceClass.UGS, ServiceClass.RTPS, ServiceClass.NRTPS, ServiceClass.BE)
    specs = []
    for ss in range(4):
        for k, cls in enumerate(order):
            specs.append(
                ConnSpec(
                    cid=ss * 4 + k,
                    ss_id=ss,
                    service_class=cls,
                    qos=DEFAULT_QOS[cls],
                    traffic=models[cls],
                )
            )
    return Scenario(frame=frame, conns=tuple(specs))


def baseline_config() -> ScenarioConfig:
    """Default run matrix over the built-in scenario: all three modes."""
    return ScenarioConfig(
        scenario=baseline_scenario(),
        modes=(SimMode.SS1, SimMode.SS2, SimMode.GPC),
        frames=3000,
        seeds=(1, 2),
        rhos=(1.0,),
    )
