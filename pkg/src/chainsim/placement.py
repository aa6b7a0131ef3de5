"""Least-allocated replica placement with affinity and resource filtering."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import UnschedulableError
from .scenario import (
    BEST_EFFORT,
    DEFAULT_WEIGHTS,
    HOST_RESOURCES,
    AffinityRuleset,
    ClusterScenario,
    PlacementScenario,
    ResourceAllocScenario,
    ScenarioBundle,
)
from .topology import Topology

PSI_MIN = 0.0
PSI_MAX = 100.0
_RES_INDEX = {r: i for i, r in enumerate(HOST_RESOURCES)}
_SCORE_RTOL = 1e-9


@dataclass
class Replica:
    id: int
    service: str
    index: int  # position among the service's replicas
    resources: ResourceAllocScenario = BEST_EFFORT
    host: int | None = None

    @property
    def label(self) -> str:
        return f"{self.service}#{self.index}"


@dataclass(frozen=True)
class PlacementConfig:
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    algorithm: str = "least_allocated"
    psi_min: float = PSI_MIN
    psi_max: float = PSI_MAX

    def __post_init__(self):
        if any(w < 0 for w in self.weights.values()) or not any(w > 0 for w in self.weights.values()):
            raise ValueError("placement weights must be >= 0 with at least one > 0")
        unknown = set(self.weights) - set(HOST_RESOURCES)
        if unknown:
            raise ValueError(f"unknown weighted resources {sorted(unknown)}")

    @classmethod
    def from_scenario(cls, ps: PlacementScenario) -> "PlacementConfig":
        return cls(dict(ps.weights), ps.algorithm)


class PlacementMatrix:
    """Binary replica x host matrix plus the reverse map."""

    def __init__(self, n_replicas: int, n_hosts: int):
        self.pi = np.zeros((n_replicas, n_hosts), dtype=np.int8)
        self.host_of: list[int | None] = [None] * n_replicas

    def bind(self, replica: int, host: int) -> None:
        self.pi[replica, :] = 0
        self.pi[replica, host] = 1
        self.host_of[replica] = host

    def unbind(self, replica: int) -> None:
        self.pi[replica, :] = 0
        self.host_of[replica] = None

    def complete(self) -> bool:
        return bool((self.pi.sum(axis=1) == 1).all())


def _demand_vector(res: ResourceAllocScenario) -> np.ndarray:
    vec = np.zeros(len(HOST_RESOURCES))
    for r, v in res.host_demand().items():
        vec[_RES_INDEX[r]] = v
    return vec


def _filter_vector(res: ResourceAllocScenario) -> np.ndarray:
    # memory limits participate in fitting, never in the reservation
    vec = _demand_vector(res)
    if res.mem_limits is not None:
        vec[_RES_INDEX["mem"]] = max(vec[_RES_INDEX["mem"]], res.mem_limits)
    return vec


class ClusterState:
    """Hosts' initial and current resource vectors plus the placement matrix."""

    def __init__(self, topology: Topology, replicas: list[Replica]):
        self.topology = topology
        self.replicas = replicas
        self.initial = np.array(
            [[h.initial_capacity[r] for r in HOST_RESOURCES] for h in topology.hosts], dtype=float
        ).reshape(len(topology.hosts), len(HOST_RESOURCES))
        self.current = self.initial.copy()
        self.matrix = PlacementMatrix(len(replicas), len(topology.hosts))

    @property
    def n_hosts(self) -> int:
        return len(self.topology.hosts)

    def place(self, replica: Replica, host: int) -> None:
        self.current[host] -= _demand_vector(replica.resources)
        self.matrix.bind(replica.id, host)
        replica.host = host

    def remove(self, replica: Replica) -> None:
        if replica.host is None:
            return
        self.current[replica.host] += _demand_vector(replica.resources)
        self.matrix.unbind(replica.id)
        replica.host = None

    def hosts_of(self, service: str, exclude: int | None = None) -> set[int]:
        return {
            r.host for r in self.replicas
            if r.service == service and r.host is not None and r.id != exclude
        }

    def replicas_of(self, service: str) -> list[Replica]:
        return [r for r in self.replicas if r.service == service]


def filter_hosts(
    replica: Replica, state: ClusterState, config: PlacementConfig, ruleset: AffinityRuleset | None = None
) -> list[int]:
    ruleset = ruleset or AffinityRuleset({}, {})
    candidates = list(range(state.n_hosts))

    partners = ruleset.partners(replica.service)
    if partners:
        anchored = set().union(*(state.hosts_of(s, exclude=replica.id) for s in partners))
        if anchored:
            candidates = [h for h in candidates if h in anchored]
    for s in ruleset.partners(replica.service, anti=True):
        blocked = state.hosts_of(s, exclude=replica.id)
        candidates = [h for h in candidates if h not in blocked]

    need = _filter_vector(replica.resources)
    weighted = [_RES_INDEX[r] for r, w in config.weights.items() if w > 0]
    out = []
    for h in candidates:
        if np.any(need > state.current[h]):
            continue
        if any(state.initial[h, i] == 0 for i in weighted):
            continue
        out.append(h)
    return out


def score_host(replica: Replica, host: int, state: ClusterState, config: PlacementConfig) -> float:
    """Weighted request-to-capacity score in [psi_min, psi_max]; larger means fuller."""
    demand = _demand_vector(replica.resources)
    total_w = sum(config.weights.values())
    acc = 0.0
    for r, w in config.weights.items():
        if w == 0:
            continue
        i = _RES_INDEX[r]
        cap = state.initial[host, i]
        if math.isinf(cap):
            continue
        acc += (1.0 - (state.current[host, i] - demand[i]) / cap) * w
    return config.psi_max * acc / total_w


def select_host(replica: Replica, hosts: list[int], state: ClusterState, config: PlacementConfig) -> int:
    """Lowest score wins; ties go to the lowest host id."""
    best, best_score = None, math.inf
    for h in sorted(hosts):
        s = score_host(replica, h, state, config)
        if best is None or s < best_score - _SCORE_RTOL * max(1.0, abs(best_score)):
            best, best_score = h, s
    return best


def schedule(
    queue: list[Replica], state: ClusterState, config: PlacementConfig, ruleset: AffinityRuleset | None = None
) -> PlacementMatrix:
    """Place every replica, giving each unplaceable replica one more try at the back of the queue."""
    pending = deque((r, 0) for r in queue)
    while pending:
        replica, attempts = pending.popleft()
        hosts = filter_hosts(replica, state, config, ruleset)
        if not hosts:
            if attempts >= 1:
                raise UnschedulableError(f"replica {replica.label} fits on no host")
            pending.append((replica, attempts + 1))
            continue
        state.place(replica, select_host(replica, hosts, state, config))
    return state.matrix


def service_order(bundle: ScenarioBundle, cluster: ClusterScenario) -> list[str]:
    order = list(cluster.services)
    for chain in cluster.chains:
        for svc, _fn in bundle.chains[chain].nodes.values():
            if svc not in order:
                order.append(svc)
    return order


def make_replicas(bundle: ScenarioBundle, cluster: ClusterScenario) -> list[Replica]:
    replicas = []
    for svc in service_order(bundle, cluster):
        settings = cluster.services.get(svc)
        count = settings.replica_count if settings else 1
        res = bundle.res_scenario_for(cluster, svc)
        for i in range(count):
            replicas.append(Replica(len(replicas), svc, i, res))
    return replicas


def place_cluster(bundle: ScenarioBundle, cluster: ClusterScenario, topology: Topology) -> ClusterState:
    replicas = make_replicas(bundle, cluster)
    state = ClusterState(topology, replicas)
    config = PlacementConfig.from_scenario(bundle.placement_for(cluster))
    schedule(list(replicas), state, config, bundle.ruleset_for(cluster))
    return state
