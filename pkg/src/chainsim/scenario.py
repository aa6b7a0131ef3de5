"""Scenario file model: parsing, cross-reference validation and serialisation.

A scenario is a single JSON document with the top-level sections
``prototypes``, ``equipments``, ``topologies``, ``sfcs``,
``res_alloc_scenarios``, ``placement_scenarios``, ``affinity_rulesets`` and
``cluster_scenarios``.  Parsing normalises every time to integer
nanoseconds, every size to bytes and every bandwidth to bytes/second.
Objects are frozen after construction and keep references as names; the
validator resolves them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import units
from .errors import ScenarioError

HOST_RESOURCES = ("millicores", "mem", "in_bw", "out_bw", "blkio_bw", "blkio_size")
SERVICE_RESOURCES = ("cpu_requests", "mem_requests", "in_bw", "out_bw", "blkio_bw", "blkio_size")
#: service resource -> host resource it is checked against during placement
RESOURCE_MAP = dict(zip(SERVICE_RESOURCES, HOST_RESOURCES))

CPU_PERIOD_US = 100_000
DEFAULT_CPU_SHARE = 1024.0
DEFAULT_WEIGHTS = {"millicores": 1.0, "mem": 1.0}
PLACEMENT_ALGORITHMS = ("least_allocated",)

SECTIONS = (
    "prototypes", "equipments", "topologies", "sfcs", "res_alloc_scenarios",
    "placement_scenarios", "affinity_rulesets", "cluster_scenarios",
)

_HOST_UNITS = {
    "millicores": units.parse_real,
    "mem": units.parse_bytes,
    "in_bw": units.parse_bandwidth,
    "out_bw": units.parse_bandwidth,
    "blkio_bw": units.parse_bandwidth,
    "blkio_size": units.parse_bytes,
}
_SERVICE_UNITS = {
    "cpu_requests": units.parse_real,
    "cpu_limits": units.parse_real,
    "mem_requests": units.parse_bytes,
    "mem_limits": units.parse_bytes,
    "in_bw": units.parse_bandwidth,
    "out_bw": units.parse_bandwidth,
    "blkio_bw": units.parse_bandwidth,
    "blkio_size": units.parse_bytes,
}


class ScenarioSyntaxError(ScenarioError):
    """The document is not valid JSON."""


class ScenarioValidationError(ScenarioError):
    """A value violates a model invariant or has the wrong shape."""

    def __init__(self, message: str, diagnostics: list[Diagnostic] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class MissingReferenceError(ScenarioValidationError):
    """A name refers to a prototype, equipment or scenario that does not exist."""


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    path: str
    message: str
    kind: str = "invariant"  # or "reference"

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class ThreadPrototype:
    instructions: int
    cpi: float
    mem_accesses: int
    cache_refs: int
    cache_misses_ref: int
    cache_miss_penalty: float
    blkio_rw: int = 0
    idle_time: int = 0  # ns
    cmc_coeffs: tuple[float, float] = (0.0, 0.0)
    cmt_coeffs: tuple[float, float] = (0.0, 0.0)

    @property
    def base_miss_rate(self) -> float:
        if self.cache_refs == 0:
            return 0.0
        return self.cache_misses_ref / self.cache_refs

    def to_list(self) -> list:
        return [
            self.instructions, self.cpi, self.mem_accesses, self.cache_refs,
            self.cache_misses_ref, self.cache_miss_penalty, self.blkio_rw,
            self.idle_time, *self.cmc_coeffs, *self.cmt_coeffs,
        ]


@dataclass(frozen=True)
class ServicePrototype:
    name: str
    functions: Mapping[str, tuple[ThreadPrototype, ...]]


@dataclass(frozen=True)
class HostPrototype:
    cores: int
    clock_hz: float
    capacities: Mapping[str, float]  # over HOST_RESOURCES; missing means unlimited


@dataclass(frozen=True)
class RouterPrototype:
    latency_ns: int
    in_bw: float
    out_bw: float


@dataclass(frozen=True)
class LinkPrototype:
    latency_ns: int


@dataclass(frozen=True)
class TrafficPrototype:
    rate: float  # requests/s
    duration_s: float
    batch: int

    @property
    def duration_ns(self) -> int:
        return int(round(self.duration_s * 1e9))

    @property
    def batch_count(self) -> int:
        return int(math.floor(self.duration_s * self.rate + 1e-9))

    def arrival_ns(self, k: int) -> int:
        return int(round(k * 1e9 / self.rate))


@dataclass(frozen=True)
class TopologySpec:
    name: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, str | None], ...]  # (a, b, link type)


@dataclass(frozen=True)
class ChainSpec:
    name: str
    nodes: Mapping[str, tuple[str, str]]  # node -> (service, endpoint function)
    edges: tuple[tuple[str, str, int], ...]  # (src, dst, payload bytes)


@dataclass(frozen=True)
class ResourceAllocScenario:
    """Per-replica resource controller settings.  Absent values mean no reservation."""

    requests: Mapping[str, float] = field(default_factory=dict)  # over SERVICE_RESOURCES
    cpu_limits: float | None = None  # millicores; None = unlimited
    mem_limits: int | None = None

    @property
    def cpu_requests(self) -> float:
        return self.requests.get("cpu_requests", 0.0)

    @property
    def cpu_share(self) -> float:
        # 1024 shares per 1000 millicores, as kubelet maps requests to cpu.shares
        if self.cpu_requests > 0:
            return self.cpu_requests * 1024.0 / 1000.0
        return DEFAULT_CPU_SHARE

    @property
    def cpu_period_us(self) -> int:
        return CPU_PERIOD_US

    @property
    def cpu_quota_us(self) -> float:
        if self.cpu_limits is None:
            return 0.0
        return self.cpu_limits * CPU_PERIOD_US / 1000.0

    @property
    def guaranteed(self) -> bool:
        return self.cpu_quota_us > 0

    def host_demand(self) -> dict[str, float]:
        """Resource vector in host terms that placement reserves."""
        return {RESOURCE_MAP[k]: v for k, v in self.requests.items()}

    def to_json(self) -> dict:
        out: dict[str, Any] = dict(self.requests)
        if self.cpu_limits is not None:
            out["cpu_limits"] = self.cpu_limits
        if self.mem_limits is not None:
            out["mem_limits"] = self.mem_limits
        return out


BEST_EFFORT = ResourceAllocScenario()


@dataclass(frozen=True)
class PlacementScenario:
    algorithm: str
    weights: Mapping[str, float]


@dataclass(frozen=True)
class AffinityRuleset:
    affinity: Mapping[str, frozenset[str]]
    anti_affinity: Mapping[str, frozenset[str]]

    def partners(self, service: str, anti: bool = False) -> set[str]:
        """Services bound to ``service`` by a rule declared on either side."""
        rules = self.anti_affinity if anti else self.affinity
        out = set(rules.get(service, ()))
        out.update(s for s, p in rules.items() if service in p)
        return out


@dataclass(frozen=True)
class ServiceSettings:
    replica_count: int = 1
    res_scenario: str | None = None


@dataclass(frozen=True)
class ClusterScenario:
    name: str
    chains: Mapping[str, str]  # chain -> traffic type
    services: Mapping[str, ServiceSettings]
    placement_scenario: str | None
    topology: str
    affinity_ruleset: str | None = None
    chain_settings: Mapping[str, Mapping[str, ServiceSettings]] = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioBundle:
    services: Mapping[str, ServicePrototype]
    host_types: Mapping[str, HostPrototype]
    router_types: Mapping[str, RouterPrototype]
    link_types: Mapping[str, LinkPrototype]
    traffic_types: Mapping[str, TrafficPrototype]
    hosts: Mapping[str, str]  # host -> host type
    routers: Mapping[str, str]  # router -> router type
    topologies: Mapping[str, TopologySpec]
    chains: Mapping[str, ChainSpec]
    res_scenarios: Mapping[str, ResourceAllocScenario]
    placement_scenarios: Mapping[str, PlacementScenario]
    affinity_rulesets: Mapping[str, AffinityRuleset]
    cluster_scenarios: Mapping[str, ClusterScenario]

    def thread_models(self, service: str, function: str) -> tuple[ThreadPrototype, ...]:
        return self.services[service].functions[function]

    def res_scenario_for(self, cluster: ClusterScenario, service: str) -> ResourceAllocScenario:
        settings = cluster.services.get(service)
        if settings is None or settings.res_scenario is None:
            return BEST_EFFORT
        return self.res_scenarios[settings.res_scenario]

    def placement_for(self, cluster: ClusterScenario) -> PlacementScenario:
        if cluster.placement_scenario is None:
            return PlacementScenario("least_allocated", dict(DEFAULT_WEIGHTS))
        return self.placement_scenarios[cluster.placement_scenario]

    def ruleset_for(self, cluster: ClusterScenario) -> AffinityRuleset:
        if cluster.affinity_ruleset is None:
            return AffinityRuleset({}, {})
        return self.affinity_rulesets[cluster.affinity_ruleset]


# ---------------------------------------------------------------------------
# Parsing


def _fail(path: str, message: str):
    raise ScenarioValidationError(f"{path}: {message}", [Diagnostic("error", path, message)])


def _obj(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    return value


def _arr(value, path: str, min_len: int = 0, max_len: int | None = None) -> list:
    if not isinstance(value, list):
        _fail(path, f"expected an array, got {type(value).__name__}")
    if len(value) < min_len or (max_len is not None and len(value) > max_len):
        bound = f"{min_len}" if max_len is None else f"{min_len}..{max_len}"
        _fail(path, f"expected {bound} elements, got {len(value)}")
    return value


def _str(value, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected a name, got {value!r}")
    return value


def _num(parser, value, path: str):
    try:
        return parser(value)
    except units.UnitError as exc:
        _fail(path, str(exc))


def _parse_thread(raw, path: str) -> ThreadPrototype:
    arr = _arr(raw, path, 7, 12)
    vals = [
        _num(units.parse_count, arr[0], f"{path}[0]"),
        _num(units.parse_real, arr[1], f"{path}[1]"),
        _num(units.parse_count, arr[2], f"{path}[2]"),
        _num(units.parse_count, arr[3], f"{path}[3]"),
        _num(units.parse_count, arr[4], f"{path}[4]"),
        _num(units.parse_real, arr[5], f"{path}[5]"),
        _num(units.parse_bytes, arr[6], f"{path}[6]"),
    ]
    idle = _num(units.parse_time_ns, arr[7], f"{path}[7]") if len(arr) > 7 else 0
    tail = [_num(units.parse_real, v, f"{path}[{8 + i}]") for i, v in enumerate(arr[8:])]
    tail += [0.0] * (4 - len(tail))
    return ThreadPrototype(*vals, idle_time=idle, cmc_coeffs=(tail[0], tail[1]), cmt_coeffs=(tail[2], tail[3]))


def _parse_prototypes(raw, path: str):
    raw = _obj(raw, path)
    services = {}
    for sname, fns in _obj(raw.get("microservices", {}), f"{path}.microservices").items():
        fpath = f"{path}.microservices.{sname}"
        functions = {}
        for fname, threads in _obj(fns, fpath).items():
            tpath = f"{fpath}.{fname}"
            functions[fname] = tuple(
                _parse_thread(t, f"{tpath}[{i}]") for i, t in enumerate(_arr(threads, tpath))
            )
        services[sname] = ServicePrototype(sname, functions)

    host_types = {}
    for name, spec in _obj(raw.get("hosts", {}), f"{path}.hosts").items():
        hpath = f"{path}.hosts.{name}"
        arr = _arr(spec, hpath, 2, 3)
        caps_raw = _obj(arr[2], f"{hpath}[2]") if len(arr) == 3 else {}
        caps = {}
        for key, value in caps_raw.items():
            if key not in _HOST_UNITS:
                _fail(f"{hpath}[2].{key}", f"unknown host resource; expected one of {HOST_RESOURCES}")
            caps[key] = _num(_HOST_UNITS[key], value, f"{hpath}[2].{key}")
        cores = _num(units.parse_count, arr[0], f"{hpath}[0]")
        caps.setdefault("millicores", cores * 1000.0)
        host_types[name] = HostPrototype(cores, _num(units.parse_frequency, arr[1], f"{hpath}[1]"), caps)

    router_types = {}
    for name, spec in _obj(raw.get("routers", {}), f"{path}.routers").items():
        rpath = f"{path}.routers.{name}"
        arr = _arr(spec, rpath, 3, 3)
        router_types[name] = RouterPrototype(
            _num(units.parse_time_ns, arr[0], f"{rpath}[0]"),
            _num(units.parse_bandwidth, arr[1], f"{rpath}[1]"),
            _num(units.parse_bandwidth, arr[2], f"{rpath}[2]"),
        )

    link_types = {}
    for name, spec in _obj(raw.get("links", {}), f"{path}.links").items():
        lpath = f"{path}.links.{name}"
        arr = _arr(spec, lpath, 1, 1)
        link_types[name] = LinkPrototype(_num(units.parse_time_ns, arr[0], f"{lpath}[0]"))

    traffic_types = {}
    for name, spec in _obj(raw.get("traffics", {}), f"{path}.traffics").items():
        tpath = f"{path}.traffics.{name}"
        arr = _arr(spec, tpath, 3, 3)
        duration_ns = _num(lambda v: units.parse_time_ns(v, "s"), arr[1], f"{tpath}[1]")
        traffic_types[name] = TrafficPrototype(
            _num(units.parse_real, arr[0], f"{tpath}[0]"),
            duration_ns / 1e9,
            _num(units.parse_count, arr[2], f"{tpath}[2]"),
        )
    return services, host_types, router_types, link_types, traffic_types


def _parse_name_map(raw, path: str) -> dict[str, str]:
    return {k: _str(v, f"{path}.{k}") for k, v in _obj(raw, path).items()}


def _parse_topology(name: str, raw, path: str) -> TopologySpec:
    raw = _obj(raw, path)
    nodes = tuple(_str(n, f"{path}.nodes[{i}]") for i, n in enumerate(_arr(raw.get("nodes", []), f"{path}.nodes")))
    edges = []
    for i, e in enumerate(_arr(raw.get("edges", []), f"{path}.edges")):
        epath = f"{path}.edges[{i}]"
        e = _arr(e, epath, 2, 3)
        link = _str(e[2], f"{epath}[2]") if len(e) == 3 and e[2] is not None else None
        edges.append((_str(e[0], f"{epath}[0]"), _str(e[1], f"{epath}[1]"), link))
    return TopologySpec(name, nodes, tuple(edges))


def _parse_chain(name: str, raw, path: str) -> ChainSpec:
    raw = _obj(raw, path)
    nodes = {}
    for node, ref in _obj(raw.get("nodes", {}), f"{path}.nodes").items():
        ref = _arr(ref, f"{path}.nodes.{node}", 2, 2)
        nodes[node] = (_str(ref[0], f"{path}.nodes.{node}[0]"), _str(ref[1], f"{path}.nodes.{node}[1]"))
    edges = []
    for i, e in enumerate(_arr(raw.get("edges", []), f"{path}.edges")):
        epath = f"{path}.edges[{i}]"
        e = _arr(e, epath, 2, 3)
        payload = _num(units.parse_bytes, e[2], f"{epath}[2]") if len(e) == 3 else 0
        edges.append((_str(e[0], f"{epath}[0]"), _str(e[1], f"{epath}[1]"), payload))
    return ChainSpec(name, nodes, tuple(edges))


def _parse_res_scenario(raw, path: str) -> ResourceAllocScenario:
    raw = _obj(raw, path)
    requests, limits = {}, {}
    for key, value in raw.items():
        if key not in _SERVICE_UNITS:
            _fail(f"{path}.{key}", f"unknown resource control parameter; expected one of {tuple(_SERVICE_UNITS)}")
        if value is None:
            continue
        parsed = _num(_SERVICE_UNITS[key], value, f"{path}.{key}")
        (limits if key.endswith("_limits") else requests)[key] = parsed
    return ResourceAllocScenario(requests, limits.get("cpu_limits"), limits.get("mem_limits"))


def _parse_rules(raw, path: str, service_order: list[str]) -> dict[str, frozenset[str]]:
    """Rules are either {service: [partners]} or a binary matrix over declared services."""
    if isinstance(raw, dict):
        return {
            s: frozenset(_str(p, f"{path}.{s}[{i}]") for i, p in enumerate(_arr(ps, f"{path}.{s}")))
            for s, ps in raw.items()
        }
    rows = _arr(raw, path)
    if len(rows) != len(service_order):
        _fail(path, f"matrix form needs one row per service ({len(service_order)}), got {len(rows)}")
    out = {}
    for i, row in enumerate(rows):
        row = _arr(row, f"{path}[{i}]", len(service_order), len(service_order))
        partners = frozenset(service_order[j] for j, bit in enumerate(row) if bit)
        if partners:
            out[service_order[i]] = partners
    return out


def _parse_settings(raw, path: str) -> ServiceSettings:
    raw = _obj(raw, path)
    count = _num(units.parse_count, raw.get("replica_count", 1), f"{path}.replica_count")
    res = raw.get("res_scenario")
    return ServiceSettings(count, None if res is None else _str(res, f"{path}.res_scenario"))


def _parse_cluster(name: str, raw, path: str) -> ClusterScenario:
    raw = _obj(raw, path)
    chains, per_chain, merged = {}, {}, {}
    for cname, craw in _obj(raw.get("service_chains", {}), f"{path}.service_chains").items():
        cpath = f"{path}.service_chains.{cname}"
        craw = _obj(craw, cpath)
        chains[cname] = _str(craw.get("traffic_type"), f"{cpath}.traffic_type")
        settings = {
            s: _parse_settings(v, f"{cpath}.nodes_settings.{s}")
            for s, v in _obj(craw.get("nodes_settings", {}), f"{cpath}.nodes_settings").items()
        }
        per_chain[cname] = settings
        for s, v in settings.items():
            merged.setdefault(s, v)
    placement = raw.get("placement_scenario")
    affinity = raw.get("affinity_ruleset")
    return ClusterScenario(
        name=name,
        chains=chains,
        services=merged,
        placement_scenario=None if placement is None else _str(placement, f"{path}.placement_scenario"),
        topology=_str(raw.get("topology"), f"{path}.topology"),
        affinity_ruleset=None if affinity is None else _str(affinity, f"{path}.affinity_ruleset"),
        chain_settings=per_chain,
    )


def bundle_from_dict(doc: Mapping) -> ScenarioBundle:
    """Build a bundle from an already-decoded JSON document (no validation)."""
    doc = _obj(doc, "$")
    for key in doc:
        if key not in SECTIONS:
            _fail(key, f"unknown top-level section; expected one of {SECTIONS}")
    services, host_types, router_types, link_types, traffic_types = _parse_prototypes(
        doc.get("prototypes", {}), "prototypes"
    )
    equipments = _obj(doc.get("equipments", {}), "equipments")
    hosts = _parse_name_map(equipments.get("hosts", {}), "equipments.hosts")
    routers = _parse_name_map(equipments.get("routers", {}), "equipments.routers")
    topologies = {
        n: _parse_topology(n, t, f"topologies.{n}") for n, t in _obj(doc.get("topologies", {}), "topologies").items()
    }
    chains = {n: _parse_chain(n, c, f"sfcs.{n}") for n, c in _obj(doc.get("sfcs", {}), "sfcs").items()}
    res = {
        n: _parse_res_scenario(r, f"res_alloc_scenarios.{n}")
        for n, r in _obj(doc.get("res_alloc_scenarios", {}), "res_alloc_scenarios").items()
    }
    placements = {}
    for n, p in _obj(doc.get("placement_scenarios", {}), "placement_scenarios").items():
        ppath = f"placement_scenarios.{n}"
        p = _obj(p, ppath)
        opts = _obj(p.get("options", dict(DEFAULT_WEIGHTS)), f"{ppath}.options")
        weights = {k: _num(units.parse_real, v, f"{ppath}.options.{k}") for k, v in opts.items()}
        placements[n] = PlacementScenario(_str(p.get("algorithm", "least_allocated"), f"{ppath}.algorithm"), weights)
    order = list(services)
    rulesets = {}
    for n, r in _obj(doc.get("affinity_rulesets", {}), "affinity_rulesets").items():
        rpath = f"affinity_rulesets.{n}"
        r = _obj(r, rpath)
        rulesets[n] = AffinityRuleset(
            _parse_rules(r.get("affinity", {}), f"{rpath}.affinity", order),
            _parse_rules(r.get("anti-affinity", {}), f"{rpath}.anti-affinity", order),
        )
    clusters = {
        n: _parse_cluster(n, c, f"cluster_scenarios.{n}")
        for n, c in _obj(doc.get("cluster_scenarios", {}), "cluster_scenarios").items()
    }
    return ScenarioBundle(
        services, host_types, router_types, link_types, traffic_types, hosts, routers,
        topologies, chains, res, placements, rulesets, clusters,
    )


def parse_scenario(json_text: str, *, strict: bool = True) -> ScenarioBundle:
    """Parse scenario text into a bundle.

    With ``strict`` (the default) the bundle is also validated and the first
    class of failure raises: :class:`MissingReferenceError` when any name is
    dangling, :class:`ScenarioValidationError` for invariant violations.
    """
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(f"malformed JSON: {exc}") from exc
    bundle = bundle_from_dict(doc)
    if strict:
        errors = [d for d in validate_bundle(bundle) if d.severity == "error"]
        if errors:
            text = "; ".join(str(d) for d in errors)
            if any(d.kind == "reference" for d in errors):
                raise MissingReferenceError(text, errors)
            raise ScenarioValidationError(text, errors)
    return bundle


def load_scenario(path, *, strict: bool = True) -> ScenarioBundle:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), strict=strict)


# ---------------------------------------------------------------------------
# Validation


def validate_bundle(bundle: ScenarioBundle) -> list[Diagnostic]:
    """Check every type invariant and cross-reference; diagnostics are data."""
    diags: list[Diagnostic] = []

    def err(path, msg, kind="invariant"):
        diags.append(Diagnostic("error", path, msg, kind))

    def ref(path, name, table, what):
        if name not in table:
            err(path, f"unknown {what} {name!r}", "reference")
            return False
        return True

    for sname, svc in bundle.services.items():
        for fname, threads in svc.functions.items():
            for i, t in enumerate(threads):
                p = f"prototypes.microservices.{sname}.{fname}[{i}]"
                if t.instructions < 0:
                    err(p, "instructions must be >= 0")
                if not t.cpi > 0:
                    err(p, "cpi must be > 0")
                if not 0 <= t.cache_misses_ref <= t.cache_refs:
                    err(p, "cache misses must lie in [0, cache references]")
                for label, v in (("mem_accesses", t.mem_accesses), ("cache_miss_penalty", t.cache_miss_penalty),
                                 ("blkio_rw", t.blkio_rw), ("idle_time", t.idle_time)):
                    if v < 0:
                        err(p, f"{label} must be >= 0")

    for name, h in bundle.host_types.items():
        p = f"prototypes.hosts.{name}"
        if h.cores < 1:
            err(p, "cores must be >= 1")
        if not h.clock_hz > 0:
            err(p, "clock must be > 0")
        if h.capacities.get("millicores") != h.cores * 1000:
            err(p, f"millicores must equal cores x 1000 ({h.cores * 1000})")
        for k, v in h.capacities.items():
            if v < 0:
                err(f"{p}.{k}", "capacity must be >= 0")
    for name, r in bundle.router_types.items():
        if min(r.latency_ns, r.in_bw, r.out_bw) < 0:
            err(f"prototypes.routers.{name}", "router values must be >= 0")
    for name, link in bundle.link_types.items():
        if link.latency_ns < 0:
            err(f"prototypes.links.{name}", "latency must be >= 0")
    for name, t in bundle.traffic_types.items():
        p = f"prototypes.traffics.{name}"
        if not t.rate > 0:
            err(p, "rate must be > 0")
        if not t.duration_s > 0:
            err(p, "duration must be > 0")
        if t.batch < 1:
            err(p, "batch must be >= 1")

    for h, t in bundle.hosts.items():
        ref(f"equipments.hosts.{h}", t, bundle.host_types, "host prototype")
    for r, t in bundle.routers.items():
        ref(f"equipments.routers.{r}", t, bundle.router_types, "router prototype")
    overlap = set(bundle.hosts) & set(bundle.routers)
    for name in sorted(overlap):
        err(f"equipments.{name}", "name used for both a host and a router")

    for tname, topo in bundle.topologies.items():
        p = f"topologies.{tname}"
        members = set(topo.nodes)
        for i, n in enumerate(topo.nodes):
            if n not in bundle.hosts and n not in bundle.routers:
                err(f"{p}.nodes[{i}]", f"unknown equipment {n!r}", "reference")
        for i, (a, b, link) in enumerate(topo.edges):
            for j, n in enumerate((a, b)):
                if n not in members:
                    err(f"{p}.edges[{i}][{j}]", f"{n!r} is not a node of this topology", "reference")
            if link is not None:
                ref(f"{p}.edges[{i}][2]", link, bundle.link_types, "link prototype")

    for cname, chain in bundle.chains.items():
        p = f"sfcs.{cname}"
        if not chain.nodes:
            err(f"{p}.nodes", "a service chain needs at least one node")
        for node, (svc, fn) in chain.nodes.items():
            if ref(f"{p}.nodes.{node}[0]", svc, bundle.services, "service"):
                ref(f"{p}.nodes.{node}[1]", fn, bundle.services[svc].functions, f"endpoint function of {svc}")
        for i, (a, b, payload) in enumerate(chain.edges):
            ref(f"{p}.edges[{i}][0]", a, chain.nodes, "chain node")
            ref(f"{p}.edges[{i}][1]", b, chain.nodes, "chain node")
            if payload < 0:
                err(f"{p}.edges[{i}][2]", "payload must be >= 0")

    for name, rs in bundle.res_scenarios.items():
        p = f"res_alloc_scenarios.{name}"
        for k, v in rs.requests.items():
            if v < 0:
                err(f"{p}.{k}", "value must be >= 0")
        if rs.cpu_limits is not None:
            if rs.cpu_limits <= 0:
                err(f"{p}.cpu_limits", "cpu limits must be > 0 when set")
            elif rs.cpu_limits < rs.cpu_requests:
                err(f"{p}.cpu_limits", "cpu limits must be >= cpu requests")
        if rs.mem_limits is not None and rs.mem_limits < rs.requests.get("mem_requests", 0):
            err(f"{p}.mem_limits", "memory limits must be >= memory requests")

    for name, ps in bundle.placement_scenarios.items():
        p = f"placement_scenarios.{name}"
        if ps.algorithm not in PLACEMENT_ALGORITHMS:
            err(f"{p}.algorithm", f"unsupported placement algorithm {ps.algorithm!r}")
        for k, w in ps.weights.items():
            if k not in HOST_RESOURCES:
                err(f"{p}.options.{k}", f"unknown host resource; expected one of {HOST_RESOURCES}")
            if w < 0:
                err(f"{p}.options.{k}", "weights must be >= 0")
        if not any(w > 0 for w in ps.weights.values()):
            err(f"{p}.options", "at least one weight must be > 0")

    for name, rules in bundle.affinity_rulesets.items():
        p = f"affinity_rulesets.{name}"
        for key, table in (("affinity", rules.affinity), ("anti-affinity", rules.anti_affinity)):
            for s, partners in table.items():
                ref(f"{p}.{key}.{s}", s, bundle.services, "service")
                for q in sorted(partners):
                    ref(f"{p}.{key}.{s}", q, bundle.services, "service")
        for s in sorted(set(rules.affinity) | set(rules.anti_affinity)):
            for q in sorted(rules.partners(s) & rules.partners(s, anti=True)):
                if s <= q:
                    err(p, f"services {s!r} and {q!r} are both affine and anti-affine")

    if not bundle.cluster_scenarios:
        err("cluster_scenarios", "no cluster scenario")
    for name, cs in bundle.cluster_scenarios.items():
        p = f"cluster_scenarios.{name}"
        ref(f"{p}.topology", cs.topology, bundle.topologies, "topology")
        if cs.placement_scenario is not None:
            ref(f"{p}.placement_scenario", cs.placement_scenario, bundle.placement_scenarios, "placement scenario")
        if cs.affinity_ruleset is not None:
            ref(f"{p}.affinity_ruleset", cs.affinity_ruleset, bundle.affinity_rulesets, "affinity ruleset")
        for cname, traffic in cs.chains.items():
            cpath = f"{p}.service_chains.{cname}"
            ref(cpath, cname, bundle.chains, "service chain")
            ref(f"{cpath}.traffic_type", traffic, bundle.traffic_types, "traffic prototype")
            for s, st in cs.chain_settings.get(cname, {}).items():
                spath = f"{cpath}.nodes_settings.{s}"
                ref(spath, s, bundle.services, "service")
                if st.replica_count < 1:
                    err(f"{spath}.replica_count", "replica_count must be >= 1")
                if st.res_scenario is not None:
                    ref(f"{spath}.res_scenario", st.res_scenario, bundle.res_scenarios, "resource scenario")
                if cs.services.get(s, st) != st:
                    err(spath, f"settings for {s!r} conflict with another chain of this scenario")
    return diags


# ---------------------------------------------------------------------------
# Serialisation


def bundle_to_dict(bundle: ScenarioBundle) -> dict:
    """Inverse of :func:`bundle_from_dict` in normalised units."""
    return {
        "prototypes": {
            "microservices": {
                s.name: {f: [t.to_list() for t in ts] for f, ts in s.functions.items()}
                for s in bundle.services.values()
            },
            "hosts": {n: [h.cores, h.clock_hz, dict(h.capacities)] for n, h in bundle.host_types.items()},
            "routers": {n: [r.latency_ns, r.in_bw, r.out_bw] for n, r in bundle.router_types.items()},
            "links": {n: [link.latency_ns] for n, link in bundle.link_types.items()},
            "traffics": {n: [t.rate, t.duration_s, t.batch] for n, t in bundle.traffic_types.items()},
        },
        "equipments": {"hosts": dict(bundle.hosts), "routers": dict(bundle.routers)},
        "topologies": {
            n: {"nodes": list(t.nodes), "edges": [[a, b, link] for a, b, link in t.edges]}
            for n, t in bundle.topologies.items()
        },
        "sfcs": {
            n: {"nodes": {k: list(v) for k, v in c.nodes.items()}, "edges": [list(e) for e in c.edges]}
            for n, c in bundle.chains.items()
        },
        "res_alloc_scenarios": {n: r.to_json() for n, r in bundle.res_scenarios.items()},
        "placement_scenarios": {
            n: {"algorithm": p.algorithm, "options": dict(p.weights)} for n, p in bundle.placement_scenarios.items()
        },
        "affinity_rulesets": {
            n: {
                "affinity": {s: sorted(ps) for s, ps in r.affinity.items()},
                "anti-affinity": {s: sorted(ps) for s, ps in r.anti_affinity.items()},
            }
            for n, r in bundle.affinity_rulesets.items()
        },
        "cluster_scenarios": {n: _cluster_to_dict(c) for n, c in bundle.cluster_scenarios.items()},
    }


def _cluster_to_dict(cs: ClusterScenario) -> dict:
    out: dict[str, Any] = {
        "service_chains": {
            cname: {
                "traffic_type": traffic,
                "nodes_settings": {
                    s: _settings_to_dict(st) for s, st in cs.chain_settings.get(cname, {}).items()
                },
            }
            for cname, traffic in cs.chains.items()
        },
        "topology": cs.topology,
    }
    if cs.placement_scenario is not None:
        out["placement_scenario"] = cs.placement_scenario
    if cs.affinity_ruleset is not None:
        out["affinity_ruleset"] = cs.affinity_ruleset
    return out


def _settings_to_dict(st: ServiceSettings) -> dict:
    out: dict[str, Any] = {"replica_count": st.replica_count}
    if st.res_scenario is not None:
        out["res_scenario"] = st.res_scenario
    return out


def serialize_scenario(bundle: ScenarioBundle) -> str:
    return json.dumps(bundle_to_dict(bundle), indent=2)
