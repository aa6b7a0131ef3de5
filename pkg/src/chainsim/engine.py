"""Discrete-event engine.

Simulated time is an integer nanosecond clock.  Work in progress (remaining
instructions, remaining bytes) is advanced as a fluid between events: each
CPU thread and each in-flight transmission has a current rate, and whenever
the set of competitors on a host or link changes the affected work is first
settled at the old rates, then rates are recomputed and completions are
predicted again.  Superseded predictions stay in the heap and are skipped
by a version check.

Events are ordered by (timestamp, class priority, sequence number).
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from enum import IntEnum

from .chaingraph import AlternativeGraph, ChainGraph, RoundRobin, SubchainPlan, build_alternative_graph, extract_subchains
from .cpu import BLKIO, CPU, DONE, IDLE, CpuOptions, HostScheduler, LiveThread
from .errors import DeadlockError, SimulationTimeout, StalledTransferError
from .netio import BYTES, LATENCY, NetworkState, Transmission, blkio_time
from .placement import ClusterState, Replica, place_cluster
from .scenario import ClusterScenario, ScenarioBundle, TrafficPrototype
from .topology import Topology, build_topology

log = logging.getLogger(__name__)


class EventClass(IntEnum):
    REQUEST_GENERATION = 0
    NETWORK_TRANSMISSION = 1
    THREADS_EXECUTION = 2
    THREADS_GENERATION = 3
    THREADS_EXECUTION_TIME_ESTIMATION = 4


@dataclass
class SimClock:
    now: int = 0
    horizon: int = 0

    def advance(self, t: int) -> None:
        if t < self.now:
            raise AssertionError(f"event at {t} ns is before the clock ({self.now} ns)")
        self.now = t


@dataclass
class EngineOptions:
    max_drain_factor: float = 10.0
    record_threads: bool = False
    cpu: CpuOptions = field(default_factory=CpuOptions)


@dataclass
class Request:
    id: int
    chain: str
    arrival_ns: int
    pending_sinks: int
    completion_ns: int | None = None

    @property
    def exe_time_ns(self) -> int | None:
        if self.completion_ns is None:
            return None
        return self.completion_ns - self.arrival_ns


@dataclass(eq=False)
class Visit:
    """One execution of an alternative-graph node for one request."""

    request: Request
    chain: str
    node: int
    replica: Replica
    pending_threads: int = 0


@dataclass(frozen=True)
class RequestRecord:
    index: int
    chain: str
    arrival_ns: int
    completion_ns: int
    exe_time_ns: int


@dataclass(frozen=True)
class ThreadRecord:
    id: int
    request: int
    chain: str
    node: int
    replica: str
    host: int
    spawn_ns: int
    cpu_end_ns: int
    end_ns: int
    instructions: int
    consumed_instructions: float


@dataclass
class RunResult:
    scenario: str
    requests: list[RequestRecord]
    events: int
    wall_seconds: float
    peak_live_threads: int
    threads_spawned: int
    sim_end_ns: int
    placement: dict[str, str]
    structure: dict[str, dict[str, int]]
    weights: dict[str, float]
    threads: list[ThreadRecord] = field(default_factory=list)

    def mean_exe_time(self, chain: str | None = None) -> float:
        vals = [r.exe_time_ns for r in self.requests if chain is None or r.chain == chain]
        return sum(vals) / len(vals) if vals else float("nan")


def _ceil_delay(work: float, rate: float) -> int:
    """Integer ns until ``work`` is done at ``rate`` per ns; never zero."""
    if work <= 0:
        return 1
    if math.isinf(rate):
        return 1
    return max(1, math.ceil(work / rate))


class Simulation:
    def __init__(self, bundle: ScenarioBundle, cluster: str | ClusterScenario, options: EngineOptions | None = None):
        self.bundle = bundle
        self.cluster = bundle.cluster_scenarios[cluster] if isinstance(cluster, str) else cluster
        self.options = options or EngineOptions()
        self.topology: Topology = build_topology(bundle, self.cluster.topology)
        self.state: ClusterState = place_cluster(bundle, self.cluster, self.topology)
        self.replicas: dict[str, list[Replica]] = {}
        for r in self.state.replicas:
            self.replicas.setdefault(r.service, []).append(r)
        self.plans: dict[str, SubchainPlan] = {}
        self.alt: dict[str, AlternativeGraph] = {}
        for cname in self.cluster.chains:
            alt = build_alternative_graph(ChainGraph.from_spec(bundle.chains[cname]))
            self.alt[cname] = alt
            self.plans[cname] = extract_subchains(alt)
        self.schedulers = [HostScheduler(h.cores, h.clock_hz, self.options.cpu) for h in self.topology.hosts]
        self._host_settled = [0] * len(self.schedulers)
        self.network = NetworkState(self.topology)
        self.rr = RoundRobin()
        self.clock = SimClock()
        traffics = [bundle.traffic_types[t] for t in self.cluster.chains.values()]
        self.clock.horizon = max((t.duration_ns for t in traffics), default=0)

        self._heap: list = []
        self._seq = 0
        self._estimation_pending_at: int | None = None
        self._dirty_hosts: set[int] = set()
        self._dirty_flows: set[int] = set()
        self._flow_settled: dict[int, int] = {}
        self._threads: dict[int, LiveThread] = {}
        self._tx: dict[int, Transmission] = {}
        self._next_thread = 0
        self._next_tx = 0
        self._next_request = 0
        self.requests: list[Request] = []
        self.completed: list[RequestRecord] = []
        self.thread_records: list[ThreadRecord] = []
        self.events = 0
        self.peak_live_threads = 0
        self._cpu_end: dict[int, int] = {}
        self._spawn: dict[int, int] = {}

    # -- event queue
    def _push(self, t: int, cls: EventClass, payload=None, version: int = 0) -> None:
        heapq.heappush(self._heap, (t, int(cls), self._seq, payload, version))
        self._seq += 1

    def _request_estimation(self) -> None:
        if self._estimation_pending_at != self.clock.now:
            self._estimation_pending_at = self.clock.now
            self._push(self.clock.now, EventClass.THREADS_EXECUTION_TIME_ESTIMATION)

    # -- traffic
    def _schedule_traffic(self) -> None:
        for cname, tname in self.cluster.chains.items():
            traffic: TrafficPrototype = self.bundle.traffic_types[tname]
            for k in range(traffic.batch_count):
                self._push(traffic.arrival_ns(k), EventClass.REQUEST_GENERATION, (cname, traffic.batch))

    def _on_request_generation(self, payload) -> None:
        cname, batch = payload
        alt = self.alt[cname]
        n_sinks = len(alt.leaves)
        for _ in range(batch):
            req = Request(self._next_request, cname, self.clock.now, n_sinks)
            self._next_request += 1
            self.requests.append(req)
            src = alt.nodes[alt.source]
            replica = self.rr.next(src.service, self.replicas[src.service])
            self._push(self.clock.now, EventClass.THREADS_GENERATION, Visit(req, cname, alt.source, replica))

    # -- threads
    def _settle_host(self, h: int) -> None:
        dt = self.clock.now - self._host_settled[h]
        if dt > 0:
            for t in self.schedulers[h].threads():
                done = min(t.remaining_instructions, t.rate * dt)
                t.remaining_instructions -= done
                t.consumed_instructions += done
                t.age(dt)
        self._host_settled[h] = self.clock.now

    def _on_threads_generation(self, visit: Visit) -> None:
        alt = self.alt[visit.chain]
        node = alt.nodes[visit.node]
        models = self.bundle.thread_models(node.service, node.function)
        res = visit.replica.resources
        host = visit.replica.host
        visit.pending_threads = len(models)
        if not models:
            self._conclude_visit(visit)
            return
        self._settle_host(host)
        for m in models:
            t = LiveThread(
                id=self._next_thread,
                model=m,
                host=host,
                group=(visit.replica.id, node.function),
                service_share=res.cpu_share,
                cpu_limits=res.cpu_limits,
                remaining_instructions=float(m.instructions),
                remaining_blkio=float(m.blkio_rw),
                remaining_idle=float(m.idle_time),
                owner=visit,
            )
            self._next_thread += 1
            self._threads[t.id] = t
            self._spawn[t.id] = self.clock.now
            self._enter_phase(t, CPU)
        self.peak_live_threads = max(self.peak_live_threads, len(self._threads))

    def _enter_phase(self, t: LiveThread, phase: str) -> None:
        """Move a thread into ``phase``, skipping phases with no work."""
        now = self.clock.now
        if phase == CPU:
            if t.remaining_instructions > 0:
                t.phase = CPU
                self.schedulers[t.host].enqueue(t)
                self._dirty_hosts.add(t.host)
                self._request_estimation()
                return
            phase = BLKIO
        if phase == BLKIO:
            self._cpu_end[t.id] = now
            if t.remaining_blkio > 0:
                t.phase = BLKIO
                host = self.topology.hosts[t.host]
                service_bw = t.owner.replica.resources.requests.get("blkio_bw")
                dur = blkio_time(t.remaining_blkio, host.initial_capacity["blkio_bw"], service_bw)
                t.version += 1
                self._push(now + max(1, math.ceil(dur)), EventClass.THREADS_EXECUTION, t.id, t.version)
                return
            phase = IDLE
        if phase == IDLE:
            if t.remaining_idle > 0:
                t.phase = IDLE
                t.version += 1
                self._push(now + int(t.remaining_idle), EventClass.THREADS_EXECUTION, t.id, t.version)
                return
        self._retire(t)

    def _on_threads_execution(self, tid: int, version: int) -> None:
        t = self._threads.get(tid)
        if t is None or t.version != version:
            return
        if t.phase == CPU:
            self._settle_host(t.host)
            t.consumed_instructions += t.remaining_instructions
            t.remaining_instructions = 0.0
            self.schedulers[t.host].dequeue(t)
            self._dirty_hosts.add(t.host)
            self._request_estimation()
            self._enter_phase(t, BLKIO)
        elif t.phase == BLKIO:
            t.remaining_blkio = 0.0
            self._enter_phase(t, IDLE)
        elif t.phase == IDLE:
            t.remaining_idle = 0.0
            self._retire(t)

    def _retire(self, t: LiveThread) -> None:
        t.phase = DONE
        del self._threads[t.id]
        visit: Visit = t.owner
        if self.options.record_threads:
            self.thread_records.append(ThreadRecord(
                t.id, visit.request.id, visit.chain, visit.node, visit.replica.label, t.host,
                self._spawn.pop(t.id), self._cpu_end.pop(t.id), self.clock.now,
                t.model.instructions, t.consumed_instructions,
            ))
        else:
            self._spawn.pop(t.id, None)
            self._cpu_end.pop(t.id, None)
        visit.pending_threads -= 1
        if visit.pending_threads == 0:
            self._conclude_visit(visit)

    def _conclude_visit(self, visit: Visit) -> None:
        alt = self.alt[visit.chain]
        children = alt.children[visit.node]
        if not children:
            req = visit.request
            req.pending_sinks -= 1
            if req.pending_sinks == 0:
                req.completion_ns = self.clock.now
                self.completed.append(RequestRecord(req.id, req.chain, req.arrival_ns, req.completion_ns, req.exe_time_ns))
            return
        for eid in children:
            edge = alt.edges[eid]
            child = alt.nodes[edge.dst]
            replica = self.rr.next(child.service, self.replicas[child.service])
            nxt = Visit(visit.request, visit.chain, child.id, replica)
            if replica.host == visit.replica.host:
                self._push(self.clock.now, EventClass.THREADS_GENERATION, nxt)
                continue
            path = self.topology.path_between(visit.replica.host, replica.host)
            tx = Transmission(
                id=self._next_tx,
                src_host=visit.replica.host,
                dst_host=replica.host,
                path=path,
                payload=float(edge.payload),
                remaining_payload=float(edge.payload),
                sender_cap=visit.replica.resources.requests.get("out_bw", math.inf),
                receiver_cap=replica.resources.requests.get("in_bw", math.inf),
                owner=nxt,
            )
            self._next_tx += 1
            self._tx[tx.id] = tx
            self._push(self.clock.now + path.latency_ns, EventClass.NETWORK_TRANSMISSION, tx.id, tx.version)

    # -- network
    def _settle_flows(self, ids) -> None:
        now = self.clock.now
        for fid in ids:
            tx = self._tx[fid]
            dt = now - self._flow_settled.get(fid, now)
            if dt > 0:
                tx.remaining_payload = max(0.0, tx.remaining_payload - tx.rate * dt)
            self._flow_settled[fid] = now

    def _on_network(self, fid: int, version: int) -> None:
        tx = self._tx.get(fid)
        if tx is None or tx.version != version:
            return
        if tx.phase == LATENCY and tx.remaining_payload > 0:
            self._settle_flows(self.network._neighbours(tx))
            affected = self.network.start_bytes(tx)
            self._flow_settled[fid] = self.clock.now
            self._dirty_flows |= affected
            self._request_estimation()
            return
        if tx.phase == BYTES:
            self._settle_flows(self.network._neighbours(tx))
            affected = self.network.finish(tx)
            self._dirty_flows |= affected
            self._request_estimation()
        tx.remaining_payload = 0.0
        del self._tx[fid]
        self._flow_settled.pop(fid, None)
        self._push(self.clock.now, EventClass.THREADS_GENERATION, tx.owner)

    # -- estimation
    def _on_estimation(self) -> None:
        self._estimation_pending_at = None
        now = self.clock.now
        for h in sorted(self._dirty_hosts):
            self._settle_host(h)
            sched = self.schedulers[h]
            sched.load_balance()
            sched.compute_rates()
            for t in sched.threads():
                t.version += 1
                self._push(now + _ceil_delay(t.remaining_instructions, t.rate), EventClass.THREADS_EXECUTION, t.id, t.version)
        self._dirty_hosts.clear()
        for tx in self.network.rebalance(self._dirty_flows):
            if tx.rate <= 0:
                raise StalledTransferError(f"transmission {tx.id} has no bandwidth left on its path")
            tx.version += 1
            self._push(now + _ceil_delay(tx.remaining_payload, tx.rate), EventClass.NETWORK_TRANSMISSION, tx.id, tx.version)
        self._dirty_flows.clear()

    # -- main loop
    def in_flight(self) -> int:
        return sum(1 for r in self.requests if r.completion_ns is None)

    def run(self) -> RunResult:
        started = time.perf_counter()
        self._schedule_traffic()
        cap = self.options.max_drain_factor * self.clock.horizon
        handlers = {
            EventClass.REQUEST_GENERATION: lambda p, v: self._on_request_generation(p),
            EventClass.NETWORK_TRANSMISSION: self._on_network,
            EventClass.THREADS_EXECUTION: self._on_threads_execution,
            EventClass.THREADS_GENERATION: lambda p, v: self._on_threads_generation(p),
            EventClass.THREADS_EXECUTION_TIME_ESTIMATION: lambda p, v: self._on_estimation(),
        }
        while self._heap:
            t, cls, _, payload, version = heapq.heappop(self._heap)
            if t > cap:
                raise SimulationTimeout(
                    f"{self.in_flight()} requests still in flight at {t / 1e9:.3f} s "
                    f"(drain cap {cap / 1e9:.3f} s)"
                )
            self.clock.advance(t)
            self.events += 1
            handlers[EventClass(cls)](payload, version)
        if self.in_flight() or self._threads or self._tx:
            raise DeadlockError(f"{self.in_flight()} requests in flight with no pending events")
        wall = time.perf_counter() - started
        self.completed.sort(key=lambda r: r.index)
        return RunResult(
            scenario=self.cluster.name,
            requests=self.completed,
            events=self.events,
            wall_seconds=wall,
            peak_live_threads=self.peak_live_threads,
            threads_spawned=self._next_thread,
            sim_end_ns=self.clock.now,
            placement={r.label: self.topology.hosts[r.host].name for r in self.state.replicas},
            structure={
                c: {"nodes": len(self.alt[c].nodes), "edges": len(self.alt[c].edges), "subchains": p.count}
                for c, p in self.plans.items()
            },
            weights=dict(self.bundle.placement_for(self.cluster).weights),
            threads=self.thread_records,
        )


def run(bundle: ScenarioBundle, cluster: str, options: EngineOptions | None = None) -> RunResult:
    return Simulation(bundle, cluster, options).run()
