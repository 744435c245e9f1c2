"""Domain model: service classes, QoS contracts, connections, packets, frames.

All scheduling arithmetic runs on integer bytes per frame; kbit/s rates from
the configuration are converted exactly once at scenario load (see
``bytes_per_frame``), which keeps conservation checks exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum


class ServiceClass(IntEnum):
    """Uplink service classes; larger value = higher scheduling priority."""

    BE = 1
    NRTPS = 2
    RTPS = 3
    UGS = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ServiceClass":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown service class {label!r}") from None


#: Classes ordered highest priority first, as the schedulers visit them.
PRIORITY_ORDER = (
    ServiceClass.UGS,
    ServiceClass.RTPS,
    ServiceClass.NRTPS,
    ServiceClass.BE,
)


@dataclass(frozen=True)
class QosParams:
    """Per-connection QoS contract.

    Which fields must be present depends on the owning service class:
    UGS needs a sustained rate, RTPS all three parameters, NRTPS both
    rates, BE only a reserved rate.  ``weight`` drives the excess-bandwidth
    distribution at the base station.
    """

    max_sustained_kbps: float | None = None
    min_reserved_kbps: float | None = None
    max_latency_ms: float | None = None
    weight: float = 1.0


# field name -> (classes requiring it, classes forbidding it)
_QOS_REQUIRED: dict[ServiceClass, tuple[str, ...]] = {
    ServiceClass.UGS: ("max_sustained_kbps",),
    ServiceClass.RTPS: ("max_sustained_kbps", "min_reserved_kbps", "max_latency_ms"),
    ServiceClass.NRTPS: ("max_sustained_kbps", "min_reserved_kbps"),
    ServiceClass.BE: ("min_reserved_kbps",),
}
_QOS_FORBIDDEN: dict[ServiceClass, tuple[str, ...]] = {
    ServiceClass.UGS: ("min_reserved_kbps", "max_latency_ms"),
    ServiceClass.RTPS: (),
    ServiceClass.NRTPS: ("max_latency_ms",),
    ServiceClass.BE: ("max_sustained_kbps", "max_latency_ms"),
}


@dataclass(slots=True)
class Packet:
    """One uplink packet.  ``deadline`` is set only for delay-bounded (rtPS)
    connections; ``departure_time`` stays ``None`` until transmission."""

    size: int
    arrival_time: float
    deadline: float | None = None
    departure_time: float | None = None
    dropped: bool = False


@dataclass
class Connection:
    """A CID-identified uplink flow with its FIFO packet queue."""

    cid: int
    ss_id: int
    service_class: ServiceClass
    qos: QosParams
    queue: deque = field(default_factory=deque)


@dataclass(frozen=True)
class FrameConfig:
    """TDD frame settings.  ``channel_bandwidth_mhz`` is informational only;
    the usable uplink capacity is configured directly in bytes per frame."""

    frame_duration_ms: float = 10.0
    uplink_capacity_bytes: int = 5375
    channel_bandwidth_mhz: float = 4.3


def bytes_per_frame(rate_kbps: float, frame: FrameConfig) -> int:
    """Whole bytes a given rate amounts to within one frame (floor).

    1 kbit/s is exactly 1 bit/ms, so this is rate * duration / 8 truncated.
    """
    if rate_kbps < 0:
        raise ValueError(f"rate must be >= 0, got {rate_kbps}")
    return int(rate_kbps * frame.frame_duration_ms / 8.0)


def guaranteed_bytes(conn: Connection, frame: FrameConfig) -> int:
    """Per-frame byte reservation backing this connection's rate guarantee.

    UGS has no reserved rate: its fixed unsolicited grant equals one frame's
    worth of its sustained rate.  All other classes reserve their minimum
    reserved rate.
    """
    if conn.service_class is ServiceClass.UGS:
        return bytes_per_frame(conn.qos.max_sustained_kbps or 0.0, frame)
    return bytes_per_frame(conn.qos.min_reserved_kbps or 0.0, frame)


def qos_violations(cid: int, service_class: ServiceClass, qos: QosParams) -> list[str]:
    """All contract violations for one connection's QoS block."""
    problems: list[str] = []
    for name in _QOS_REQUIRED[service_class]:
        if getattr(qos, name) is None:
            problems.append(
                f"cid {cid}: {service_class.label} connection requires {name}"
            )
    for name in _QOS_FORBIDDEN[service_class]:
        if getattr(qos, name) is not None:
            problems.append(
                f"cid {cid}: {service_class.label} connection must not set {name}"
            )
    for name in ("max_sustained_kbps", "min_reserved_kbps", "max_latency_ms"):
        value = getattr(qos, name)
        if value is not None and value <= 0:
            problems.append(f"cid {cid}: {name} must be > 0, got {value}")
    if qos.weight <= 0:
        problems.append(f"cid {cid}: weight must be > 0, got {qos.weight}")
    if (
        qos.max_sustained_kbps is not None
        and qos.min_reserved_kbps is not None
        and qos.min_reserved_kbps > qos.max_sustained_kbps
    ):
        problems.append(
            f"cid {cid}: min_reserved_kbps {qos.min_reserved_kbps} exceeds "
            f"max_sustained_kbps {qos.max_sustained_kbps}"
        )
    return problems


def validate_scenario(connections, frame: FrameConfig) -> list[str]:
    """Check every QoS contract plus the cell-wide reservation budget.

    Returns all violations found (not just the first); an empty list means
    the scenario is valid.  The reservation budget includes the fixed UGS
    grants, so a valid scenario guarantees the per-frame minimum allocation
    always fits the uplink capacity.
    """
    problems: list[str] = []
    if frame.frame_duration_ms <= 0:
        problems.append(f"frame duration must be > 0, got {frame.frame_duration_ms}")
    if frame.uplink_capacity_bytes <= 0:
        problems.append(
            f"uplink capacity must be > 0, got {frame.uplink_capacity_bytes}"
        )
        return problems

    seen: set[int] = set()
    reserved = 0
    for conn in connections:
        if conn.cid < 0:
            problems.append(f"cid {conn.cid}: connection ids must be non-negative")
        if conn.cid in seen:
            problems.append(f"cid {conn.cid}: duplicate connection id")
        seen.add(conn.cid)
        problems.extend(qos_violations(conn.cid, conn.service_class, conn.qos))
        try:
            reserved += guaranteed_bytes(conn, frame)
        except ValueError:
            pass  # already reported as a rate violation above

    if reserved > frame.uplink_capacity_bytes:
        problems.append(
            f"reserved sum exceeds uplink capacity: {reserved} > "
            f"{frame.uplink_capacity_bytes} bytes/frame"
        )
    return problems
