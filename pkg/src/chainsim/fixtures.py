"""Reference scenario documents.

* ``reference_document()`` - the measured host, router, link and thread
  parameters of the evaluation cluster, with no chains attached.
* ``suite_document()`` - 104 desk-scale cluster scenarios in six
  categories (CPU, memory, storage, network on two topologies,
  multi-replica, multi-endpoint) over synthetic chains C1-C6.
* ``large_chain_document()`` - a random 100-service, 200-edge chain over
  100 hosts.

Every builder returns a plain JSON-compatible dict; feed it to
:func:`chainsim.scenario.bundle_from_dict` or dump it to a file.
"""

from __future__ import annotations

import copy
import random

HOST_TYPE = [4, "1.59GHz", {
    "mem": "16GB", "in_bw": "1Gbps", "out_bw": "1Gbps", "blkio_bw": "657MBps", "blkio_size": "500GB",
}]
ROUTER_LATENCY_NS = 7.3e5
LINK_LATENCY_NS = 4.2e5

# [inst, cpi, maccs, crefs, cmiss, cpenalty, blk_rw]
REFERENCE_THREADS = {
    ("S1", "f1"): [[1.4e9, 0.7432, 3.1e8, 1.0e6, 1.0e5, 4, "ε"]],
    ("S1", "f2"): [[3.1e9, 0.750, 7.2e8, 1.2e6, 1.3e5, 4, "ε"], [3.1e9, 0.715, 6.6e8, 1.7e6, 2.2e5, 3, "ε"]],
    ("S2", "f1"): [[1.7e9, 0.520, 3.4e8, 2.9e6, 2.0e6, 5, "ε"]],
    ("S2", "f2"): [[1.0e8, 0.4912, 7.4e8, 5.5e6, 4.1e6, 5, "ε"]],
    ("S3", "f1"): [[2.1e8, 0.6660, 4.3e7, 1.5e6, 5.7e5, 5, 5.1e7]],
    ("S3", "f2"): [[5.1e8, 0.7199, 2.2e7, 4.3e6, 2.3e6, 5, 1.0e8]],
}

# Reconstruction of the eight-node example with a two-way branch at S3
# and an S6/S7 loop: 10 edges, edges 6, 8 and 10 end at duplicates.
BRANCHING_EDGES = [
    ("S1", "S2"), ("S2", "S3"), ("S3", "S4"), ("S3", "S5"), ("S4", "S6"),
    ("S5", "S3"), ("S6", "S7"), ("S7", "S6"), ("S7", "S8"), ("S8", "S6"),
]

PAYLOAD = "50MB"
SUITE_DURATION_S = 60
NET_CAP_STEP = 12.5e6  # bytes/s per step; ten steps reach the 1 Gbps NIC


def _microservices() -> dict:
    out: dict = {}
    for (svc, fn), threads in REFERENCE_THREADS.items():
        out.setdefault(svc, {})[fn] = copy.deepcopy(threads)
    return out


def _equipment(n_hosts: int, n_routers: int = 1) -> dict:
    return {
        "hosts": {f"h{i + 1}": "ref_host" for i in range(n_hosts)},
        "routers": {f"rho{i + 1}": "router" for i in range(n_routers)},
    }


def _base(n_hosts: int = 4, n_routers: int = 2) -> dict:
    return {
        "prototypes": {
            "microservices": _microservices(),
            "hosts": {"ref_host": copy.deepcopy(HOST_TYPE)},
            "routers": {"router": [f"{ROUTER_LATENCY_NS:g}ns", "1Gbps", "1Gbps"]},
            "links": {"link": [f"{LINK_LATENCY_NS:g}ns"]},
            "traffics": {},
        },
        "equipments": _equipment(n_hosts, n_routers),
        "topologies": {},
        "sfcs": {},
        "res_alloc_scenarios": {},
        "placement_scenarios": {"least_allocated": {"algorithm": "least_allocated", "options": {"millicores": 1, "mem": 1}}},
        "affinity_rulesets": {},
        "cluster_scenarios": {},
    }


def star_topology(hosts: list[str], router: str = "rho1") -> dict:
    return {"nodes": [router, *hosts], "edges": [[h, router, "link"] for h in hosts]}


def tau1() -> dict:
    return star_topology(["h1", "h2", "h3", "h4"])


def tau2() -> dict:
    # odd hosts on rho1, even hosts on rho2 so consecutive placements cross the core link
    return {
        "nodes": ["rho1", "rho2", "h1", "h2", "h3", "h4"],
        "edges": [["rho1", "rho2", "link"], ["h1", "rho1", "link"], ["h3", "rho1", "link"],
                  ["h2", "rho2", "link"], ["h4", "rho2", "link"]],
    }


def reference_document() -> dict:
    doc = _base()
    doc["topologies"] = {"tau1": tau1(), "tau2": tau2()}
    doc["prototypes"]["traffics"] = {"once": [1, 1, 1]}
    doc["sfcs"] = {"single": {"nodes": {"n1": ["S1", "f1"]}, "edges": []}}
    doc["cluster_scenarios"] = {
        "idle": {"service_chains": {"single": {"traffic_type": "once", "nodes_settings": {}}},
                 "placement_scenario": "least_allocated", "topology": "tau1"},
    }
    return doc


def suite_chains() -> dict:
    branching_functions = {
        "S1": ["S1", "f1"], "S2": ["S2", "f1"], "S3": ["S1", "f2"], "S4": ["S3", "f1"],
        "S5": ["S2", "f2"], "S6": ["S3", "f2"], "S7": ["S1", "f1"], "S8": ["S2", "f2"],
    }
    return {
        "C1": {"nodes": {"n1": ["S1", "f1"]}, "edges": []},
        "C2": {"nodes": {"n1": ["S2", "f1"]}, "edges": []},
        "C3": {"nodes": {"n1": ["S3", "f2"]}, "edges": []},
        "C4": {"nodes": {"n1": ["S1", "f1"], "n2": ["S3", "f1"]}, "edges": [["n1", "n2", PAYLOAD]]},
        "C5": {"nodes": {"n1": ["S1", "f1"], "n2": ["S2", "f1"], "n3": ["S3", "f1"]},
               "edges": [["n1", "n2", PAYLOAD], ["n2", "n3", PAYLOAD]]},
        "C6": {"nodes": branching_functions, "edges": [[a, b, PAYLOAD] for a, b in BRANCHING_EDGES]},
    }


def _cluster(chain: str, traffic: str, settings: dict, topology: str = "tau1") -> dict:
    return {
        "service_chains": {chain: {"traffic_type": traffic, "nodes_settings": settings}},
        "placement_scenario": "least_allocated",
        "topology": topology,
    }


def suite_document() -> dict:
    """104 cluster scenarios named s001..s104."""
    doc = _base()
    doc["topologies"] = {"tau1": tau1(), "tau2": tau2()}
    doc["sfcs"] = suite_chains()
    doc["prototypes"]["traffics"] = {
        "r1": [1, SUITE_DURATION_S, 1], "r3": [3, SUITE_DURATION_S, 1],
        "r1_2": [0.5, SUITE_DURATION_S, 1], "r1_3": [1 / 3, SUITE_DURATION_S, 1],
    }
    res = doc["res_alloc_scenarios"]
    # a small memory reservation makes least-allocated spread replicas
    res["best_effort"] = {"mem_requests": "1GB"}
    for k in range(2, 21):
        res[f"cpu_{100 * k}mc"] = {"cpu_requests": 100 * k, "cpu_limits": 100 * k, "mem_requests": "1GB"}
    for k in range(1, 11):
        res[f"out_bw_{k}"] = {"out_bw": k * NET_CAP_STEP, "mem_requests": "1GB"}
        res[f"in_bw_{k}"] = {"in_bw": k * NET_CAP_STEP, "mem_requests": "1GB"}

    clusters = doc["cluster_scenarios"]
    n = 0

    def add(entry):
        nonlocal n
        n += 1
        clusters[f"s{n:03d}"] = entry

    be = {"replica_count": 1, "res_scenario": "best_effort"}
    for chain, svc in (("C1", "S1"), ("C2", "S2"), ("C3", "S3")):
        for k in range(2, 21):
            add(_cluster(chain, "r1", {svc: {"replica_count": 1, "res_scenario": f"cpu_{100 * k}mc"}}))
        add(_cluster(chain, "r1", {svc: dict(be)}))
    for topo in ("tau1", "tau2"):
        for k in range(1, 11):
            add(_cluster("C4", "r1", {"S1": {"replica_count": 1, "res_scenario": f"out_bw_{k}"}, "S3": dict(be)}, topo))
        for k in range(1, 11):
            add(_cluster("C4", "r1", {"S1": dict(be), "S3": {"replica_count": 1, "res_scenario": f"in_bw_{k}"}}, topo))
    for traffic in ("r1", "r3"):
        add(_cluster("C5", traffic, {
            "S1": {"replica_count": 4, "res_scenario": "best_effort"},
            "S2": {"replica_count": 2, "res_scenario": "best_effort"},
            "S3": {"replica_count": 2, "res_scenario": "best_effort"},
        }))
    for traffic in ("r1_2", "r1_3"):
        add(_cluster("C6", traffic, {s: dict(be) for s in ("S1", "S2", "S3")}))
    return doc


def random_chain_edges(n_nodes: int, n_edges: int, rng: random.Random) -> list[tuple[int, int]]:
    """A random spanning out-tree from node 0 plus extra edges; no self-loops, no edges into node 0."""
    if n_edges < n_nodes - 1:
        raise ValueError("need at least n_nodes - 1 edges to reach every node")
    edges = {(rng.randrange(i), i) for i in range(1, n_nodes)}
    while len(edges) < n_edges:
        a, b = rng.randrange(n_nodes), rng.randrange(1, n_nodes)
        if a != b:
            edges.add((a, b))
    return sorted(edges)


def large_chain_document(
    seed: int = 1, n_services: int = 100, n_edges: int = 200, n_hosts: int = 100,
    rate: float = 0.1, duration_s: float = 600,
) -> dict:
    """Random chain with randomised payloads, workload heaviness and type."""
    rng = random.Random(seed)
    doc = _base(n_hosts=n_hosts, n_routers=1)
    threads = [t for ts in REFERENCE_THREADS.values() for t in ts]
    micro = {}
    for i in range(n_services):
        base = list(rng.choice(threads))
        scale = rng.uniform(0.05, 0.5)  # workload heaviness
        base[0] = round(base[0] * scale)
        base[2] = round(base[2] * scale)
        if isinstance(base[6], (int, float)):
            base[6] = round(base[6] * scale)
        micro[f"S{i + 1}"] = {"f1": [base]}
    doc["prototypes"]["microservices"] = micro
    doc["prototypes"]["traffics"] = {"slow": [rate, duration_s, 1]}
    doc["topologies"] = {"tau1": star_topology([f"h{i + 1}" for i in range(n_hosts)])}
    doc["sfcs"] = {"big": {
        "nodes": {f"n{i + 1}": [f"S{i + 1}", "f1"] for i in range(n_services)},
        "edges": [[f"n{a + 1}", f"n{b + 1}", rng.randint(1_000, 10_000_000)]
                  for a, b in random_chain_edges(n_services, n_edges, rng)],
    }}
    doc["res_alloc_scenarios"] = {"best_effort": {"mem_requests": "1GB"}}
    doc["cluster_scenarios"] = {"large": _cluster("big", "slow", {
        f"S{i + 1}": {"replica_count": 1, "res_scenario": "best_effort"} for i in range(n_services)
    })}
    return doc


def single_host_document(
    functions: dict[str, list[list]], *, cores: int = 1, rate: float = 1.0, duration_s: float = 1.0,
    batch: int = 1, res: dict | None = None, clock: str = "1.59GHz",
) -> dict:
    """One host, one service ``S`` whose function ``f`` threads are given; chain of that single node."""
    host = copy.deepcopy(HOST_TYPE)
    host[0], host[1] = cores, clock
    doc = _base(n_hosts=1, n_routers=1)
    doc["prototypes"]["hosts"] = {"ref_host": host}
    doc["prototypes"]["microservices"] = {"S": copy.deepcopy(functions)}
    doc["prototypes"]["traffics"] = {"t": [rate, duration_s, batch]}
    doc["topologies"] = {"tau1": star_topology(["h1"])}
    fn = next(iter(functions))
    doc["sfcs"] = {"C": {"nodes": {"n1": ["S", fn]}, "edges": []}}
    settings = {}
    if res is not None:
        doc["res_alloc_scenarios"] = {"r": res}
        settings = {"S": {"replica_count": 1, "res_scenario": "r"}}
    doc["cluster_scenarios"] = {"run": _cluster("C", "t", settings)}
    return doc
