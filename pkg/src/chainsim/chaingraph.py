"""Service-chain graphs: alternative graph construction and subchain extraction.

A chain graph may revisit services (several incoming edges, even cycles).
The alternative graph G′ gives every visit its own node so that each node
has at most one incoming edge, which turns it into an out-tree rooted at
the source.  Nodes are discovered breadth first; the first incoming edge
to reach a node keeps the original, every later one is rerouted to a fresh
duplicate that executes the same endpoint function but forwards nowhere.
Cycles are therefore unrolled exactly once.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import GraphError
from .scenario import ChainSpec


@dataclass(frozen=True)
class ChainGraph:
    name: str
    nodes: tuple[str, ...]  # declaration order; the first node is the source
    functions: dict[str, tuple[str, str]]  # node -> (service, endpoint function)
    edges: tuple[tuple[str, str, int], ...]  # (src, dst, payload bytes)

    @classmethod
    def from_spec(cls, spec: ChainSpec) -> "ChainGraph":
        return cls(spec.name, tuple(spec.nodes), dict(spec.nodes), tuple(spec.edges))

    @property
    def source(self) -> str:
        return self.nodes[0]

    def in_degree(self, node: str) -> int:
        return sum(1 for _, d, _ in self.edges if d == node)

    def out_edges(self, node: str) -> list[int]:
        return [i for i, (s, _, _) in enumerate(self.edges) if s == node]


@dataclass(frozen=True)
class AltNode:
    id: int
    origin: str  # node of the original chain graph
    service: str
    function: str
    duplicate: bool


@dataclass(frozen=True)
class AltEdge:
    id: int
    src: int
    dst: int
    payload: int
    origin: int  # index of the original edge


@dataclass
class AlternativeGraph:
    chain: ChainGraph
    nodes: list[AltNode]
    edges: list[AltEdge]
    rerouted: list[int]  # original edge indices that now end at a duplicate
    children: list[list[int]] = field(default_factory=list)  # node -> outgoing edge ids
    parent_edge: list[int | None] = field(default_factory=list)

    @property
    def source(self) -> int:
        return 0

    def out_degree(self, node: int) -> int:
        return len(self.children[node])

    @property
    def leaves(self) -> list[int]:
        return [n.id for n in self.nodes if not self.children[n.id]]

    def duplicates_of(self, origin: str) -> list[int]:
        return [n.id for n in self.nodes if n.origin == origin]


def build_alternative_graph(g: ChainGraph) -> AlternativeGraph:
    if not g.nodes:
        raise GraphError(f"chain {g.name!r} has no nodes")
    src = g.source
    if g.in_degree(src):
        if any(s == d == src for s, d, _ in g.edges):
            raise GraphError(f"chain {g.name!r}: self-loop on source node {src!r}")
        raise GraphError(f"chain {g.name!r}: source node {src!r} has incoming edges")

    out_edges = {n: [] for n in g.nodes}
    for i, (s, _, _) in enumerate(g.edges):
        out_edges[s].append(i)

    nodes: list[AltNode] = []
    edges: list[AltEdge] = []
    children: list[list[int]] = []
    parent_edge: list[int | None] = []
    rerouted: list[int] = []

    def new_node(origin: str, dup: bool) -> int:
        svc, fn = g.functions[origin]
        nodes.append(AltNode(len(nodes), origin, svc, fn, dup))
        children.append([])
        parent_edge.append(None)
        return nodes[-1].id

    primary = {src: new_node(src, False)}
    queue = deque([src])
    while queue:
        origin = queue.popleft()
        u = primary[origin]
        for ei in out_edges[origin]:
            _, dst, payload = g.edges[ei]
            if dst in primary:
                v = new_node(dst, True)
                rerouted.append(ei)
            else:
                v = new_node(dst, False)
                primary[dst] = v
                queue.append(dst)
            edges.append(AltEdge(len(edges), u, v, payload, ei))
            children[u].append(edges[-1].id)
            parent_edge[v] = edges[-1].id

    missing = [n for n in g.nodes if n not in primary]
    if missing:
        raise GraphError(f"chain {g.name!r}: nodes unreachable from the source: {missing}")
    return AlternativeGraph(g, nodes, edges, rerouted, children, parent_edge)


def collapse(alt: AlternativeGraph) -> ChainGraph:
    """Merge duplicates back into their original nodes."""
    order: list[str] = []
    for n in alt.nodes:
        if n.origin not in order:
            order.append(n.origin)
    edges = {}
    for e in alt.edges:
        edges[e.origin] = (alt.nodes[e.src].origin, alt.nodes[e.dst].origin, e.payload)
    functions = {n.origin: (n.service, n.function) for n in alt.nodes}
    return ChainGraph(alt.chain.name, tuple(order), functions, tuple(edges[i] for i in sorted(edges)))


@dataclass(frozen=True)
class Subchain:
    index: int
    nodes: tuple[int, ...]
    edges: tuple[int, ...]  # includes the entry edge from the branching parent
    parent: int | None  # subchain that spawned this one

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def end(self) -> int:
        return self.nodes[-1]


@dataclass
class SubchainPlan:
    graph: AlternativeGraph
    subchains: list[Subchain]
    sinks: list[int]
    node_subchain: list[int]  # alt node -> subchain index

    @property
    def count(self) -> int:
        return len(self.subchains)

    def membership(self) -> list[frozenset[int]]:
        return [frozenset(sc.nodes) for sc in self.subchains]


def extract_subchains(alt: AlternativeGraph) -> SubchainPlan:
    """Split G′ into maximal paths.

    A subchain starts at the source or at any child of a node with two or
    more outgoing edges, follows single outgoing edges, and ends at the
    first node whose outdegree differs from one.
    """
    subchains: list[Subchain] = []
    node_sc = [-1] * len(alt.nodes)
    starts = deque([(alt.source, None, None)])  # (node, entry edge, parent subchain)
    while starts:
        node, entry, parent = starts.popleft()
        members, sc_edges = [node], [] if entry is None else [entry]
        while alt.out_degree(node) == 1:
            e = alt.edges[alt.children[node][0]]
            sc_edges.append(e.id)
            node = e.dst
            members.append(node)
        idx = len(subchains)
        subchains.append(Subchain(idx, tuple(members), tuple(sc_edges), parent))
        for m in members:
            node_sc[m] = idx
        for eid in alt.children[node]:
            starts.append((alt.edges[eid].dst, eid, idx))
    return SubchainPlan(alt, subchains, alt.leaves, node_sc)


class RoundRobin:
    """One counter per service, shared by every chain that calls it."""

    def __init__(self):
        self._counters: dict[str, int] = {}

    def next(self, service: str, replicas: list):
        if not replicas:
            raise ValueError(f"service {service!r} has no replicas")
        c = self._counters.get(service, 0)
        self._counters[service] = c + 1
        return replicas[c % len(replicas)]


def next_hop(plan: SubchainPlan, node: int, rr: RoundRobin, replicas: dict[str, list]) -> dict[int, object]:
    """Pick a replica for each child of ``node`` (keyed by alt node id)."""
    alt = plan.graph
    out = {}
    for eid in alt.children[node]:
        child = alt.nodes[alt.edges[eid].dst]
        out[child.id] = rr.next(child.service, replicas[child.service])
    return out


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def chain_to_dot(g: ChainGraph) -> str:
    lines = [f'digraph "{g.name}" {{']
    for n in g.nodes:
        svc, fn = g.functions[n]
        lines.append(f'  "{n}" [label="{n}\\n{svc}.{fn}"];')
    for i, (s, d, p) in enumerate(g.edges):
        lines.append(f'  "{s}" -> "{d}" [label="e{i + 1} ({p} B)"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def plan_to_dot(plan: SubchainPlan) -> str:
    """G′ with nodes and edges coloured by subchain."""
    alt = plan.graph
    edge_sc = {e: sc.index for sc in plan.subchains for e in sc.edges}
    lines = [f'digraph "{alt.chain.name}_alt" {{']
    for n in alt.nodes:
        colour = _PALETTE[plan.node_subchain[n.id] % len(_PALETTE)]
        shape = "box" if n.duplicate else "ellipse"
        lines.append(f'  n{n.id} [label="{n.origin}\\n{n.service}.{n.function}", shape={shape}, color="{colour}"];')
    for e in alt.edges:
        colour = _PALETTE[edge_sc[e.id] % len(_PALETTE)]
        lines.append(f'  n{e.src} -> n{e.dst} [label="e{e.origin + 1}", color="{colour}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
