"""Frame-driven simulation loop.

Each frame executes, in order: bandwidth allocation from the requests issued
at the end of the previous frame (the one-frame request/grant round trip),
new traffic arrivals, transmission against the grants, and finally the next
round of backlog requests.  Station schedulers (ss1/ss2 modes) spend their
pooled grant against the live queues, including this frame's arrivals; in
gpc mode every connection is confined to its own, one-frame-stale grant.
That asymmetry is the whole difference between the operating modes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .bs_alloc import (
    BandwidthRequest,
    GrantMode,
    allocate_gpc,
    phase1_guarantee,
    phase2_excess,
    pool_gpss,
)
from .model import (
    Connection,
    FrameConfig,
    Packet,
    QosParams,
    ServiceClass,
    guaranteed_bytes,
    validate_scenario,
)
from .ss_sched import (
    DfpqState,
    new_dfpq_state,
    schedule_frame_ss1,
    schedule_frame_ss2,
)
from .traffic import TrafficModel, TrafficSource


class SimMode(Enum):
    SS1 = "ss1"  # pooled grant, proposed station scheduler
    SS2 = "ss2"  # pooled grant, strict-priority comparison scheduler
    GPC = "gpc"  # per-connection grants, no station scheduler

    @classmethod
    def from_label(cls, label: str) -> "SimMode":
        for mode in cls:
            if mode.value == label.strip().lower():
                return mode
        raise ValueError(f"unknown mode {label!r}")


@dataclass(frozen=True)
class ConnSpec:
    """Immutable description of one connection; runs instantiate fresh
    Connection objects from it so parallel runs never share queues."""

    cid: int
    ss_id: int
    service_class: ServiceClass
    qos: QosParams
    traffic: TrafficModel


@dataclass(frozen=True)
class Scenario:
    frame: FrameConfig
    conns: tuple[ConnSpec, ...]

    def build_connections(self) -> list[Connection]:
        return [
            Connection(
                cid=s.cid,
                ss_id=s.ss_id,
                service_class=s.service_class,
                qos=s.qos,
                queue=deque(),
            )
            for s in sorted(self.conns, key=lambda s: s.cid)
        ]


class ScenarioError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(slots=True)
class FrameTrace:
    frame_index: int
    alloc: dict[int, int]  # per-connection bytes awarded this frame
    grants: dict[int, int]  # per-SS (ss1/ss2) or per-connection (gpc)
    granted_bytes: int
    used_bytes: int


@dataclass
class RunResult:
    """Everything the metrics need: per-packet records (the full generation
    history of every connection, delivered or not) and per-frame counters."""

    mode: SimMode
    seed: int
    rho: float
    frames: int
    frame: FrameConfig
    conns: tuple[ConnSpec, ...]
    history: dict[int, list[Packet]]
    granted: list[int]
    used: list[int]

    def backlog(self, cid: int) -> int:
        return sum(
            p.size
            for p in self.history[cid]
            if p.departure_time is None and not p.dropped
        )


class Simulation:
    """Single deterministic run; drive with step() or run_frames()."""

    def __init__(
        self,
        scenario: Scenario,
        mode: SimMode,
        seed: int = 1,
        rho: float = 1.0,
        drop_expired: bool = False,
    ):
        self.frame_cfg = scenario.frame
        self.mode = mode
        self.seed = seed
        self.rho = rho
        self.drop_expired = drop_expired
        self.connections = scenario.build_connections()
        problems = validate_scenario(self.connections, self.frame_cfg)
        if problems:
            raise ScenarioError(problems)

        models = {s.cid: s.traffic for s in scenario.conns}
        self.sources = {
            c.cid: TrafficSource(c, models[c.cid], self.frame_cfg, rho, seed)
            for c in self.connections
        }
        self.weights = {c.cid: c.qos.weight for c in self.connections}
        self._ugs_grant = {
            c.cid: guaranteed_bytes(c, self.frame_cfg)
            for c in self.connections
            if c.service_class is ServiceClass.UGS
        }
        self.ss_ids = sorted({c.ss_id for c in self.connections})
        self._ss_conns = {
            ss: [c for c in self.connections if c.ss_id == ss] for ss in self.ss_ids
        }
        self.dfpq: dict[int, DfpqState] = {
            ss: new_dfpq_state(self._ss_conns[ss], self.frame_cfg)
            for ss in self.ss_ids
        }
        self.pending_requests: dict[int, int] = {}
        self.frame_index = 0
        self.history: dict[int, list[Packet]] = {c.cid: [] for c in self.connections}
        self._backlog: dict[int, int] = {c.cid: 0 for c in self.connections}

    def backlog_bytes(self, cid: int) -> int:
        return self._backlog[cid]

    def step(self) -> FrameTrace:
        fr = self.frame_index
        cfg = self.frame_cfg

        # (1) allocate against last frame's requests; UGS gets its synthetic
        # fixed request every frame
        requests = [
            BandwidthRequest(
                cid=c.cid,
                requested_bytes=self._ugs_grant.get(
                    c.cid, self.pending_requests.get(c.cid, 0)
                ),
                issued_frame=fr - 1,
            )
            for c in self.connections
        ]
        if self.mode is SimMode.GPC:
            grant_map = allocate_gpc(requests, self.connections, cfg, self.weights)
            alloc = dict(grant_map.grants)
        else:
            result = phase2_excess(
                phase1_guarantee(requests, self.connections, cfg),
                requests,
                self.weights,
            )
            alloc = dict(result.allocated)
            grant_map = pool_gpss(result, self.connections)

        # (2) this frame's arrivals join the live queues
        for conn in self.connections:
            pkts = self.sources[conn.cid].generate(fr)
            if pkts:
                conn.queue.extend(pkts)
                self.history[conn.cid].extend(pkts)
                self._backlog[conn.cid] += sum(p.size for p in pkts)

        frame_end = (fr + 1) * cfg.frame_duration_ms

        # optional drop-on-expiry: a delay-bounded packet that could no
        # longer meet its deadline even if sent right now is discarded
        if self.drop_expired:
            for conn in self.connections:
                if conn.service_class is not ServiceClass.RTPS:
                    continue
                q = conn.queue
                while q and q[0].deadline is not None and q[0].deadline < frame_end:
                    pkt = q.popleft()
                    pkt.dropped = True
                    self._backlog[conn.cid] -= pkt.size

        # (3) transmission against the grants
        used = 0
        if self.mode is SimMode.GPC:
            for conn in self.connections:
                budget = grant_map.grants.get(conn.cid, 0)
                q = conn.queue
                while q and q[0].size <= budget:
                    pkt = q.popleft()
                    budget -= pkt.size
                    used += pkt.size
                    pkt.departure_time = frame_end
                    self._backlog[conn.cid] -= pkt.size
        else:
            for ss in self.ss_ids:
                grant = grant_map.grants.get(ss, 0)
                conns = self._ss_conns[ss]
                if self.mode is SimMode.SS1:
                    tx = schedule_frame_ss1(conns, grant, self.dfpq[ss])
                else:
                    tx = schedule_frame_ss2(conns, grant)
                for cid, pkt in tx.entries:
                    pkt.departure_time = frame_end
                    self._backlog[cid] -= pkt.size
                used += tx.total_bytes

        # (5) next frame's requests report the post-transmission backlog
        for conn in self.connections:
            if conn.cid not in self._ugs_grant:
                self.pending_requests[conn.cid] = self._backlog[conn.cid]

        self.frame_index = fr + 1
        return FrameTrace(
            frame_index=fr,
            alloc=alloc,
            grants=dict(grant_map.grants),
            granted_bytes=sum(alloc.values()),
            used_bytes=used,
        )


def run(
    scenario: Scenario,
    mode: SimMode,
    frames: int,
    seed: int = 1,
    rho: float = 1.0,
    drop_expired: bool = False,
) -> RunResult:
    """Execute a full deterministic run and gather the metric inputs."""
    if frames <= 0:
        raise ValueError(f"frames must be > 0, got {frames}")
    sim = Simulation(scenario, mode, seed=seed, rho=rho, drop_expired=drop_expired)
    granted = []
    used = []
    for _ in range(frames):
        trace = sim.step()
        granted.append(trace.granted_bytes)
        used.append(trace.used_bytes)
    return RunResult(
        mode=mode,
        seed=seed,
        rho=rho,
        frames=frames,
        frame=scenario.frame,
        conns=tuple(sorted(scenario.conns, key=lambda s: s.cid)),
        history=sim.history,
        granted=granted,
        used=used,
    )
