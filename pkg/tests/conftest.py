import sys
from collections import deque
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from uplinksim.model import Connection, FrameConfig, Packet, QosParams, ServiceClass

# Standard QoS contracts used across the tests (rates in kbit/s, latency ms).
QOS = {
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


def make_conn(cid, cls, ss=0, sizes=(), arrivals=None, deadlines=None, qos=None):
    """Connection with a pre-filled queue for scheduler-level tests."""
    conn = Connection(
        cid=cid, ss_id=ss, service_class=cls, qos=qos or QOS[cls], queue=deque()
    )
    for k, size in enumerate(sizes):
        arrival = arrivals[k] if arrivals else float(k)
        deadline = deadlines[k] if deadlines else (
            arrival + conn.qos.max_latency_ms
            if conn.qos.max_latency_ms is not None else None
        )
        conn.queue.append(Packet(size=size, arrival_time=arrival, deadline=deadline))
    return conn


def frame(capacity=5375, duration=10.0):
    return FrameConfig(frame_duration_ms=duration, uplink_capacity_bytes=capacity)
