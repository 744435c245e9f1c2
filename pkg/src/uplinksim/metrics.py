"""Evaluation quantities computed from a RunResult.

Delays are reported for delivered packets only; packets still queued at run
end count as residual backlog, never into the means.  A window with no
deliveries yields absent (None) statistics rather than NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import RunResult
from .model import ServiceClass


@dataclass(frozen=True)
class ClassStats:
    mean_delay_ms: float | None
    violation_rate: float | None
    throughput_kbps: float


@dataclass(frozen=True)
class MetricsSample:
    window_start_ms: float
    window_end_ms: float
    per_class: dict[ServiceClass, ClassStats]
    per_connection: dict[int, ClassStats]
    utilization: float
    jfi: float | None


def jain_index(rates) -> float | None:
    """Fairness index (sum r)^2 / (n * sum r^2); 1 when all rates are equal,
    1/n when exactly one is positive, undefined (None) when all are zero."""
    rates = list(rates)
    if not rates:
        raise ValueError("jain_index needs at least one rate")
    if any(r < 0 for r in rates):
        raise ValueError("rates must be non-negative")
    total = sum(rates)
    if total == 0:
        return None
    square_sum = sum(r * r for r in rates)
    return (total * total) / (len(rates) * square_sum)


def _latency_of(result: RunResult) -> dict[int, float | None]:
    return {s.cid: s.qos.max_latency_ms for s in result.conns}


def _class_of(result: RunResult) -> dict[int, ServiceClass]:
    return {s.cid: s.service_class for s in result.conns}


def _select_cids(result: RunResult, class_filter) -> list[int]:
    if class_filter is None:
        return [s.cid for s in result.conns]
    if isinstance(class_filter, ServiceClass):
        return [s.cid for s in result.conns if s.service_class is class_filter]
    return [int(class_filter)]


def delay_stats(
    result: RunResult, window, class_filter=None
) -> tuple[float | None, float | None]:
    """(mean delay, delay-violation rate) over packets delivered in window.

    The violation rate is the fraction of delivered packets whose delay
    exceeds their connection's maximum latency; connections without a
    latency bound never violate.  Absent (None, None) when nothing was
    delivered in the window.
    """
    start, end = window
    latency = _latency_of(result)
    total = 0.0
    late = 0
    count = 0
    for cid in _select_cids(result, class_filter):
        bound = latency[cid]
        for pkt in result.history[cid]:
            dep = pkt.departure_time
            if dep is None or not (start <= dep < end):
                continue
            delay = dep - pkt.arrival_time
            total += delay
            count += 1
            if bound is not None and delay > bound:
                late += 1
    if count == 0:
        return None, None
    return total / count, late / count


def throughput(result: RunResult, window, group: str = "class") -> dict:
    """Delivered kbit/s per group member ('class' or 'connection').

    Every configured member appears in the result, including those that
    delivered nothing (rate 0).  bytes * 8 / window-ms is exactly kbit/s.
    """
    start, end = window
    span = end - start
    if span <= 0:
        raise ValueError("window length must be > 0")
    classes = _class_of(result)
    if group == "class":
        totals: dict = {cls: 0 for cls in sorted(set(classes.values()))}
    elif group == "connection":
        totals = {cid: 0 for cid in sorted(classes)}
    else:
        raise ValueError(f"unknown group {group!r}")
    for cid, cls in classes.items():
        key = cls if group == "class" else cid
        for pkt in result.history[cid]:
            dep = pkt.departure_time
            if dep is not None and start <= dep < end:
                totals[key] += pkt.size
    return {key: bytes_ * 8.0 / span for key, bytes_ in totals.items()}


def utilization(result: RunResult, window) -> float:
    """Mean used/capacity over the frames fully inside the window."""
    start, end = window
    dur = result.frame.frame_duration_ms
    first = max(0, int(-(-start // dur)))  # ceil
    last = min(result.frames, int(end // dur))
    if last <= first:
        return 0.0
    capacity = result.frame.uplink_capacity_bytes
    used = result.used[first:last]
    return sum(u / capacity for u in used) / len(used)


def warmup_ms(result: RunResult, warmup_fraction: float = 0.1) -> float:
    return result.frames * result.frame.frame_duration_ms * warmup_fraction


def window_metrics(
    result: RunResult, window_ms: float = 1000.0, warmup_fraction: float = 0.1
) -> list[MetricsSample]:
    """Per-window samples over the post-warm-up portion of the run.

    Single pass over the packet history; only full windows are reported.
    """
    if window_ms <= 0:
        raise ValueError("window_ms must be > 0")
    total_ms = result.frames * result.frame.frame_duration_ms
    start = warmup_ms(result, warmup_fraction)
    n_windows = int((total_ms - start + 1e-9) // window_ms)
    classes = sorted({s.service_class for s in result.conns})
    if n_windows <= 0:
        return []

    latency = _latency_of(result)
    cids = [s.cid for s in result.conns]
    cls_index = {cls: k for k, cls in enumerate(classes)}
    cid_index = {cid: k for k, cid in enumerate(cids)}
    nc = len(classes)
    counts = [[0] * nc for _ in range(n_windows)]
    delay_sums = [[0.0] * nc for _ in range(n_windows)]
    lates = [[0] * nc for _ in range(n_windows)]
    bytes_ = [[0] * nc for _ in range(n_windows)]
    nconn = len(cids)
    c_counts = [[0] * nconn for _ in range(n_windows)]
    c_delays = [[0.0] * nconn for _ in range(n_windows)]
    c_lates = [[0] * nconn for _ in range(n_windows)]
    c_bytes = [[0] * nconn for _ in range(n_windows)]
    for spec in result.conns:
        k = cls_index[spec.service_class]
        j = cid_index[spec.cid]
        bound = latency[spec.cid]
        for pkt in result.history[spec.cid]:
            dep = pkt.departure_time
            if dep is None or dep < start:
                continue
            w = int((dep - start) // window_ms)
            if w >= n_windows:
                continue
            delay = dep - pkt.arrival_time
            counts[w][k] += 1
            delay_sums[w][k] += delay
            bytes_[w][k] += pkt.size
            c_counts[w][j] += 1
            c_delays[w][j] += delay
            c_bytes[w][j] += pkt.size
            if bound is not None and delay > bound:
                lates[w][k] += 1
                c_lates[w][j] += 1

    def stats(count, delay_sum, late, nbytes):
        rate = nbytes * 8.0 / window_ms
        if count:
            return ClassStats(delay_sum / count, late / count, rate)
        return ClassStats(None, None, rate)

    samples = []
    for w in range(n_windows):
        ws = start + w * window_ms
        window = (ws, ws + window_ms)
        per_class = {
            cls: stats(counts[w][cls_index[cls]],
                       delay_sums[w][cls_index[cls]],
                       lates[w][cls_index[cls]],
                       bytes_[w][cls_index[cls]])
            for cls in classes
        }
        per_connection = {
            cid: stats(c_counts[w][cid_index[cid]],
                       c_delays[w][cid_index[cid]],
                       c_lates[w][cid_index[cid]],
                       c_bytes[w][cid_index[cid]])
            for cid in cids
        }
        samples.append(
            MetricsSample(
                window_start_ms=window[0],
                window_end_ms=window[1],
                per_class=per_class,
                per_connection=per_connection,
                utilization=utilization(result, window),
                jfi=jain_index([per_class[cls].throughput_kbps
                                for cls in classes]),
            )
        )
    return samples


def run_summary(result: RunResult, warmup_fraction: float = 0.1) -> MetricsSample:
    """One sample covering the whole post-warm-up region."""
    total_ms = result.frames * result.frame.frame_duration_ms
    start = warmup_ms(result, warmup_fraction)
    window = (start, total_ms)
    classes = sorted({s.service_class for s in result.conns})
    per_class = {}
    rates = throughput(result, window, group="class")
    for cls in classes:
        mean, viol = delay_stats(result, window, cls)
        per_class[cls] = ClassStats(mean, viol, rates[cls])
    conn_rates = throughput(result, window, group="connection")
    per_connection = {}
    for spec in result.conns:
        mean, viol = delay_stats(result, window, spec.cid)
        per_connection[spec.cid] = ClassStats(mean, viol, conn_rates[spec.cid])
    return MetricsSample(
        window_start_ms=window[0],
        window_end_ms=window[1],
        per_class=per_class,
        per_connection=per_connection,
        utilization=utilization(result, window),
        jfi=jain_index([rates[cls] for cls in classes]),
    )
