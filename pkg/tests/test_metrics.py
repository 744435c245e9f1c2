import math
import random

import pytest

from conftest import QOS, frame
from uplinksim.config import baseline_config
from uplinksim.engine import ConnSpec, RunResult, Scenario, SimMode, run
from uplinksim.metrics import (
    delay_stats,
    jain_index,
    run_summary,
    throughput,
    utilization,
    window_metrics,
)
from uplinksim.model import Packet, ServiceClass
from uplinksim.traffic import TrafficKind, TrafficModel


def synthetic_result(packets_by_cid, classes, used=None, frames=100,
                     capacity=5375):
    """RunResult assembled by hand for metric unit tests."""
    conns = tuple(
        ConnSpec(cid, 0, cls, QOS[cls],
                 TrafficModel(TrafficKind.CBR, 1.0, 10, 10))
        for cid, cls in classes.items()
    )
    return RunResult(
        mode=SimMode.SS1, seed=1, rho=1.0, frames=frames,
        frame=frame(capacity=capacity),
        conns=conns,
        history={cid: list(pkts) for cid, pkts in packets_by_cid.items()},
        granted=used or [0] * frames,
        used=used or [0] * frames,
    )


def pkt(size, arrival, departure, deadline=None):
    return Packet(size=size, arrival_time=arrival, deadline=deadline,
                  departure_time=departure)


def test_delay_stats_example():
    result = synthetic_result(
        {1: [pkt(100, 0.0, 15.0), pkt(100, 0.0, 25.0), pkt(100, 0.0, 18.0)]},
        {1: ServiceClass.RTPS},
    )
    mean, viol = delay_stats(result, (0.0, 1000.0), ServiceClass.RTPS)
    assert mean == pytest.approx((15 + 25 + 18) / 3)
    assert viol == pytest.approx(1 / 3)


def test_delay_stats_absent_when_nothing_delivered():
    result = synthetic_result({1: [pkt(100, 0.0, None)]},
                              {1: ServiceClass.RTPS})
    assert delay_stats(result, (0.0, 1000.0)) == (None, None)


def test_delay_stats_no_violations_below_bound():
    result = synthetic_result(
        {1: [pkt(100, 0.0, 10.0), pkt(100, 5.0, 25.0)]},
        {1: ServiceClass.RTPS},
    )
    mean, viol = delay_stats(result, (0.0, 1000.0))
    assert viol == 0.0  # 20 ms delay is not strictly larger than the bound


def test_classes_without_latency_never_violate():
    result = synthetic_result(
        {1: [pkt(100, 0.0, 500.0)]},
        {1: ServiceClass.BE},
    )
    _, viol = delay_stats(result, (0.0, 1000.0))
    assert viol == 0.0


def test_throughput_unit_conversion():
    result = synthetic_result(
        {1: [pkt(1280, 0.0, 5.0)]},
        {1: ServiceClass.NRTPS},
    )
    rates = throughput(result, (0.0, 10.0), group="class")
    assert rates[ServiceClass.NRTPS] == pytest.approx(1024.0)


def test_throughput_zero_and_grouping():
    result = synthetic_result(
        {1: [], 2: [pkt(100, 0.0, 5.0)]},
        {1: ServiceClass.BE, 2: ServiceClass.NRTPS},
    )
    rates = throughput(result, (0.0, 100.0), group="connection")
    assert rates[1] == 0.0
    assert rates[2] == pytest.approx(8.0)


def test_throughput_conservation_on_real_run():
    cfg = baseline_config()
    result = run(cfg.scenario, SimMode.SS1, 500, seed=1, rho=1.0)
    window = (0.0, 5000.0)
    per_conn = throughput(result, window, group="connection")
    delivered = sum(
        p.size for s in result.conns for p in result.history[s.cid]
        if p.departure_time is not None and p.departure_time < 5000.0
    )
    total_kbps = sum(per_conn.values())
    assert total_kbps * (window[1] - window[0]) / 8.0 == pytest.approx(delivered)


def test_utilization_handbuilt_patterns():
    full = synthetic_result({}, {}, used=[5375] * 100)
    assert utilization(full, (0.0, 1000.0)) == pytest.approx(1.0)
    idle = synthetic_result({}, {}, used=[0] * 100)
    assert utilization(idle, (0.0, 1000.0)) == 0.0
    alternating = synthetic_result({}, {}, used=[5375, 0] * 50)
    assert utilization(alternating, (0.0, 1000.0)) == pytest.approx(0.5)


def test_jain_index_identities():
    assert jain_index([5, 5, 5, 5]) == pytest.approx(1.0, abs=1e-12)
    assert jain_index([1, 0, 0, 0]) == pytest.approx(0.25, abs=1e-12)
    assert jain_index([1, 2, 3]) == pytest.approx(36 / 42, abs=1e-12)


def test_jain_index_scale_invariance_and_bounds():
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(1, 8)
        rates = [rng.random() * 100 for _ in range(n)]
        if sum(rates) == 0:
            continue
        j = jain_index(rates)
        for c in (0.001, 3.0, 1e6):
            assert jain_index([c * r for r in rates]) == pytest.approx(j, abs=1e-12)
        assert 1 / n - 1e-12 <= j <= 1 + 1e-12


def test_jain_index_edge_cases():
    assert jain_index([0.0, 0.0]) is None
    with pytest.raises(ValueError):
        jain_index([])
    with pytest.raises(ValueError):
        jain_index([-1.0])


def test_window_metrics_layout_and_warmup():
    cfg = baseline_config()
    result = run(cfg.scenario, SimMode.SS1, 1000, seed=1, rho=1.0)
    samples = window_metrics(result, window_ms=1000.0, warmup_fraction=0.1)
    assert len(samples) == 9  # 10 s run, 1 s warm-up, 1 s windows
    assert samples[0].window_start_ms == pytest.approx(1000.0)
    for s in samples:
        assert s.window_end_ms - s.window_start_ms == pytest.approx(1000.0)
        assert 0.0 <= s.utilization <= 1.0
        assert set(s.per_class) == {
            ServiceClass.UGS, ServiceClass.RTPS,
            ServiceClass.NRTPS, ServiceClass.BE,
        }


def test_window_metrics_per_connection_consistent_with_classes():
    cfg = baseline_config()
    result = run(cfg.scenario, SimMode.SS1, 600, seed=4, rho=1.0)
    by_class = {s.cid: s.service_class for s in result.conns}
    for sample in window_metrics(result, 1000.0, warmup_fraction=0.1):
        assert set(sample.per_connection) == set(by_class)
        for cls, stats in sample.per_class.items():
            members = [sample.per_connection[cid]
                       for cid, c in by_class.items() if c is cls]
            assert stats.throughput_kbps == pytest.approx(
                sum(m.throughput_kbps for m in members))


def test_window_metrics_agree_with_direct_computation():
    cfg = baseline_config()
    result = run(cfg.scenario, SimMode.SS2, 600, seed=2, rho=1.1)
    samples = window_metrics(result, window_ms=500.0, warmup_fraction=0.0)
    probe = samples[3]
    window = (probe.window_start_ms, probe.window_end_ms)
    rates = throughput(result, window, group="class")
    for cls, stats in probe.per_class.items():
        mean, viol = delay_stats(result, window, cls)
        assert stats.mean_delay_ms == mean
        assert stats.violation_rate == viol
        assert stats.throughput_kbps == pytest.approx(rates[cls])
    assert probe.utilization == pytest.approx(utilization(result, window))


def test_run_summary_never_nan():
    cfg = baseline_config()
    result = run(cfg.scenario, SimMode.SS1, 200, seed=1, rho=0.0)  # no traffic
    summary = run_summary(result)
    for stats in summary.per_class.values():
        assert stats.mean_delay_ms is None
        assert stats.violation_rate is None
        assert stats.throughput_kbps == 0.0
    assert summary.jfi is None
    assert summary.utilization == 0.0
    assert not any(
        isinstance(v, float) and math.isnan(v)
        for stats in summary.per_class.values()
        for v in (stats.mean_delay_ms, stats.violation_rate,
                  stats.throughput_kbps)
        if v is not None
    )
