"""Hosts, routers and directed links, with unique host-to-host paths."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import NoPathError, TopologyError
from .scenario import HOST_RESOURCES, ScenarioBundle

PRECOMPUTE_LIMIT = 256


@dataclass
class Host:
    id: int
    name: str
    prototype: str
    cores: int
    clock_hz: float
    initial_capacity: dict[str, float]  # V̂_H; math.inf where unset
    router: str = ""

    @property
    def core_ids(self) -> list[int]:
        return list(range(self.cores))


@dataclass(frozen=True)
class Link:
    id: int
    src: str
    dst: str
    latency_ns: int
    capacity: float  # bytes/s


@dataclass(frozen=True)
class HostPath:
    src: int
    dst: int
    routers: tuple[str, ...]
    links: tuple[int, ...]
    latency_ns: int  # routers plus links


@dataclass
class Topology:
    name: str
    hosts: list[Host]
    routers: dict[str, "RouterNode"]
    links: list[Link]
    link_index: dict[tuple[str, str], int]
    _router_adj: dict[str, list[str]] = field(default_factory=dict, repr=False)
    _paths: dict[tuple[int, int], HostPath] = field(default_factory=dict, repr=False)

    def host(self, name: str) -> Host:
        for h in self.hosts:
            if h.name == name:
                return h
        raise KeyError(name)

    @property
    def host_links(self) -> list[Link]:
        return [link for link in self.links if link.src not in self.routers or link.dst not in self.routers]

    @property
    def router_links(self) -> list[Link]:
        return [link for link in self.links if link.src in self.routers and link.dst in self.routers]

    def path_between(self, a: int, b: int) -> HostPath:
        if a == b:
            raise ValueError("no network path between a host and itself")
        key = (a, b)
        path = self._paths.get(key)
        if path is None:
            path = self._compute_path(a, b)
            self._paths[key] = path
        return path

    def _router_route(self, ra: str, rb: str) -> list[str]:
        prev = {ra: None}
        queue = deque([ra])
        while queue:
            u = queue.popleft()
            if u == rb:
                break
            for v in self._router_adj[u]:
                if v not in prev:
                    prev[v] = u
                    queue.append(v)
        if rb not in prev:
            return []
        route = [rb]
        while route[-1] != ra:
            route.append(prev[route[-1]])
        return route[::-1]

    def _compute_path(self, a: int, b: int) -> HostPath:
        ha, hb = self.hosts[a], self.hosts[b]
        routers = self._router_route(ha.router, hb.router)
        if not routers:
            raise NoPathError(f"no path between hosts {ha.name!r} and {hb.name!r}")
        nodes = [ha.name, *routers, hb.name]
        links = tuple(self.link_index[(u, v)] for u, v in zip(nodes, nodes[1:]))
        latency = sum(self.routers[r].latency_ns for r in routers)
        latency += sum(self.links[i].latency_ns for i in links)
        return HostPath(a, b, tuple(routers), links, latency)

    def precompute_paths(self) -> None:
        for a in range(len(self.hosts)):
            for b in range(len(self.hosts)):
                if a != b and (a, b) not in self._paths:
                    try:
                        self._paths[(a, b)] = self._compute_path(a, b)
                    except NoPathError:
                        pass


@dataclass(frozen=True)
class RouterNode:
    name: str
    latency_ns: int
    in_bw: float
    out_bw: float


def build_topology(bundle: ScenarioBundle, name: str) -> Topology:
    """Instantiate the named topology.

    Hosts keep the order in which they are declared under ``equipments``;
    that order is the host id used everywhere else.
    """
    spec = bundle.topologies[name]
    members = set(spec.nodes)
    hosts: list[Host] = []
    for hname, htype in bundle.hosts.items():
        if hname not in members:
            continue
        proto = bundle.host_types[htype]
        caps = {r: float(proto.capacities.get(r, math.inf)) for r in HOST_RESOURCES}
        hosts.append(Host(len(hosts), hname, htype, proto.cores, proto.clock_hz, caps))
    by_name = {h.name: h for h in hosts}
    routers = {}
    for rname, rtype in bundle.routers.items():
        if rname in members:
            proto = bundle.router_types[rtype]
            routers[rname] = RouterNode(rname, proto.latency_ns, proto.in_bw, proto.out_bw)

    def out_cap(node):
        return routers[node].out_bw if node in routers else by_name[node].initial_capacity["out_bw"]

    def in_cap(node):
        return routers[node].in_bw if node in routers else by_name[node].initial_capacity["in_bw"]

    links: list[Link] = []
    index: dict[tuple[str, str], int] = {}
    adj: dict[str, list[str]] = {r: [] for r in routers}
    for a, b, ltype in spec.edges:
        if a == b:
            raise TopologyError(f"topology {name!r}: self-connection on {a!r}")
        if a not in by_name and a not in routers or b not in by_name and b not in routers:
            raise TopologyError(f"topology {name!r}: edge {a!r}-{b!r} names undeclared equipment")
        if a in by_name and b in by_name:
            raise TopologyError(f"topology {name!r}: hosts {a!r} and {b!r} must connect through a router")
        if (a, b) in index:
            raise TopologyError(f"topology {name!r}: duplicate connection {a!r}-{b!r}")
        latency = bundle.link_types[ltype].latency_ns if ltype is not None else 0
        for u, v in ((a, b), (b, a)):
            index[(u, v)] = len(links)
            links.append(Link(len(links), u, v, latency, min(out_cap(u), in_cap(v))))
        for u, v in ((a, b), (b, a)):
            if u in by_name:
                if by_name[u].router:
                    raise TopologyError(f"topology {name!r}: host {u!r} connects to more than one router")
                by_name[u].router = v
            elif v in routers:
                adj[u].append(v)
    for h in hosts:
        if not h.router:
            raise TopologyError(f"topology {name!r}: host {h.name!r} is not connected to a router")

    # A router forest has exactly |routers| - components edges; any extra edge closes a cycle.
    rr_edges = sum(len(v) for v in adj.values()) // 2
    seen: set[str] = set()
    components = 0
    for r in adj:
        if r in seen:
            continue
        components += 1
        stack = [r]
        seen.add(r)
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
    if rr_edges > len(adj) - components:
        raise TopologyError(f"topology {name!r}: routers form a cycle")

    topo = Topology(name, hosts, routers, links, index, adj)
    if len(hosts) <= PRECOMPUTE_LIMIT:
        topo.precompute_paths()
    return topo
