"""Acceptance criteria, one test each, at their stated tolerances.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the terminal
summary lists a PASS/FAIL line per criterion and ``-s`` also shows the
measured figures.
"""

import json
import math
import resource
import subprocess
import sys
import time

import pytest

from chainsim import fixtures, results
from chainsim.chaingraph import ChainGraph, build_alternative_graph, extract_subchains
from chainsim.cpu import isolated_cpu_time
from chainsim.engine import EngineOptions, Simulation, run
from chainsim.netio import NetworkState, Transmission
from chainsim.placement import ClusterState, PlacementConfig, Replica, filter_hosts, schedule, score_host, select_host
from chainsim.scenario import ResourceAllocScenario, bundle_from_dict
from chainsim.topology import build_topology
from microfixtures import CLOCK, FIXTURES, oracle_threads, scenario
from oracles import enumerate_chain_graphs, oracle_subchains, oracle_microstep

# computed with 40-digit decimal arithmetic before the build
ISOLATED_NS = {
    ("S1", "f1", 0): 732377358.49056603774,
    ("S1", "f2", 0): 1658490566.0377358491,
    ("S1", "f2", 1): 1555179430.2626711062,
    ("S2", "f1", 0): 1293342008.2411624376,
    ("S2", "f2", 0): 1765598627.7873070326,
    ("S3", "f1", 0): 139345911.94968553459,
    ("S3", "f2", 0): 267915854.90712300717,
}


def _graph(nodes, edges):
    names = [str(n) for n in nodes]
    return ChainGraph("g", tuple(names), {n: (n, "f") for n in names}, tuple((str(a), str(b), 0) for a, b in edges))


def _origins(plan):
    return sorted(tuple(plan.graph.nodes[i].origin for i in sc.nodes) for sc in plan.subchains)


def test_criterion_1_formula_fidelity():
    """isolated CPU time of every measured thread within 1e-9 relative"""
    bundle = bundle_from_dict(fixtures.reference_document())
    worst = 0.0
    for (svc, fn, i), expected in ISOLATED_NS.items():
        got = isolated_cpu_time(bundle.services[svc].functions[fn][i], CLOCK)
        worst = max(worst, abs(got - expected) / expected)
    print(f"criterion 1: worst relative error {worst:.2e}")
    assert worst <= 1e-9
    assert ISOLATED_NS[("S1", "f1", 0)] / 1e9 == pytest.approx(0.7324, abs=5e-5)


def test_criterion_2_subchain_oracle_equivalence():
    """exhaustive subchain equivalence for graphs up to 6 nodes / 8 edges; eight-node example gives 5"""
    checked = 0
    for nodes, edges in enumerate_chain_graphs(6, 8):
        plan = extract_subchains(build_alternative_graph(_graph(nodes, edges)))
        want = sorted(tuple(str(x) for x in s) for s in oracle_subchains(nodes, edges))
        assert _origins(plan) == want, (nodes, edges)
        checked += 1
    names = [f"S{i}" for i in range(1, 9)]
    fig = extract_subchains(build_alternative_graph(_graph(names, fixtures.BRANCHING_EDGES)))
    print(f"criterion 2: {checked} graphs checked, example graph has {fig.count} subchains")
    assert fig.count == 5
    assert checked > 500_000


def _two_host_state(replicas):
    doc = fixtures.reference_document()
    doc["equipments"] = fixtures._equipment(2, 1)
    doc["topologies"] = {"t": fixtures.star_topology(["h1", "h2"])}
    return ClusterState(build_topology(bundle_from_dict(doc), "t"), replicas)


def test_criterion_3_placement_correctness():
    """hand-computed scores on two-host/two-replica fixtures to 1e-12; selection invariant under weight scaling"""
    import random

    mc_only = PlacementConfig({"millicores": 1.0})
    both = PlacementConfig({"millicores": 1.0, "mem": 1.0})
    a = Replica(0, "S1", 0, ResourceAllocScenario({"cpu_requests": 1000.0}))
    b = Replica(1, "S1", 1, ResourceAllocScenario({"cpu_requests": 1000.0}))
    st = _two_host_state([a, b])
    assert abs(score_host(a, 0, st, mc_only) - 25.0) <= 1e-12
    assert abs(score_host(a, 1, st, mc_only) - 25.0) <= 1e-12
    st.place(a, 0)
    assert abs(score_host(b, 0, st, mc_only) - 50.0) <= 1e-12
    assert abs(score_host(b, 1, st, mc_only) - 25.0) <= 1e-12
    c = Replica(0, "S1", 0, ResourceAllocScenario({"cpu_requests": 2000.0, "mem_requests": 4e9}))
    d = Replica(1, "S2", 0, ResourceAllocScenario({"cpu_requests": 1000.0, "mem_requests": 8e9}))
    st2 = _two_host_state([c, d])
    assert abs(score_host(c, 0, st2, both) - 37.5) <= 1e-12  # (50 + 25) / 2
    st2.place(c, 0)
    assert abs(score_host(d, 0, st2, both) - 75.0) <= 1e-12  # cpu 3000/4000, mem 12/16
    assert abs(score_host(d, 1, st2, both) - 37.5) <= 1e-12  # (25 + 50) / 2
    st3 = _two_host_state([c, d])
    schedule([c, d], st3, both)
    assert (c.host, d.host) == (0, 1)

    rng = random.Random(20240)
    for _ in range(100):
        w = {"millicores": rng.uniform(0.01, 5), "mem": rng.uniform(0, 5), "blkio_size": rng.uniform(0, 2)}
        k = rng.uniform(0.01, 1000)
        reps = [Replica(i, f"S{i % 3}", i // 3, ResourceAllocScenario({
            "cpu_requests": float(rng.choice([0, 100, 250, 500, 1000])),
            "mem_requests": float(rng.choice([0, 1e8, 5e8, 2e9]))})) for i in range(4)]
        state = _two_host_state(reps)
        for r in reps[:3]:
            state.place(r, rng.randrange(2))
        c1, c2 = PlacementConfig(w), PlacementConfig({n: v * k for n, v in w.items()})
        hosts = filter_hosts(reps[3], state, c1)
        assert hosts == filter_hosts(reps[3], state, c2)
        assert select_host(reps[3], hosts, state, c1) == select_host(reps[3], hosts, state, c2)
    print("criterion 3: hand scores exact, 100 scaled weight vectors agree")


def test_criterion_4_scheduler_oracle():
    """engine within 0.5% of the 1 us fixed-step scheduler on every small fixture; instructions conserved to 1"""
    worst = 0.0
    for name in sorted(FIXTURES):
        res = Simulation(bundle_from_dict(scenario(name)), "run", EngineOptions(record_threads=True)).run()
        cores, threads = oracle_threads(name)
        assert len(threads) <= 4 and cores <= 2
        oracle = oracle_microstep(threads, cores, CLOCK, dt_ns=1000)
        assert len(res.threads) == len(threads)
        for rec in res.threads:
            span = oracle[rec.id] - threads[rec.id]["arrival_ns"]
            worst = max(worst, abs(rec.end_ns - oracle[rec.id]) / span)
            assert abs(rec.consumed_instructions - rec.instructions) <= 1
    print(f"criterion 4: {len(FIXTURES)} fixtures, worst relative deviation {worst:.2e}")
    assert worst <= 0.005


def _transfer_doc(batch):
    doc = fixtures.reference_document()
    doc["sfcs"] = {"C4": fixtures.suite_chains()["C4"]}
    doc["prototypes"]["traffics"] = {"t": [1, 1, batch]}
    doc["res_alloc_scenarios"] = {"be": {"mem_requests": "1GB"}}
    settings = {s: {"replica_count": 1, "res_scenario": "be"} for s in ("S1", "S3")}
    doc["cluster_scenarios"] = {"run": {"service_chains": {"C4": {"traffic_type": "t", "nodes_settings": settings}},
                                        "placement_scenario": "least_allocated", "topology": "tau1"}}
    return doc


def _hops(doc):
    res = Simulation(bundle_from_dict(doc), "run", EngineOptions(record_threads=True)).run()
    src = {t.request: t.end_ns for t in res.threads if t.node == 0}
    return [t.spawn_ns - src[t.request] for t in res.threads if t.node == 1]


def test_criterion_5_network_arithmetic():
    """50 MB over 1 Gbps through one router takes 0.40157 s within 1 us; a second flow halves the rate at the join"""
    (single,) = _hops(_transfer_doc(1))
    assert abs(single - 401_570_000) <= 1000
    topo = build_topology(bundle_from_dict(fixtures.reference_document()), "tau1")
    net = NetworkState(topo)
    t0 = Transmission(0, 0, 1, topo.path_between(0, 1), 5e7, 5e7)
    t1 = Transmission(1, 0, 2, topo.path_between(0, 2), 5e7, 5e7)
    net.rebalance(net.start_bytes(t0))
    before = t0.rate
    net.rebalance(net.start_bytes(t1))
    assert t0.rate == before / 2 and t1.rate == before / 2
    pair = _hops(_transfer_doc(2))
    assert all(abs(h - 801_570_000) <= 1000 for h in pair)
    print(f"criterion 5: single transfer {single / 1e9:.6f} s, shared transfers {[h / 1e9 for h in pair]}")


def test_criterion_6_determinism():
    """every suite scenario run twice gives byte-identical JSON"""
    bundle = bundle_from_dict(fixtures.suite_document())
    for name in bundle.cluster_scenarios:
        a = results.to_json(results.build_document(run(bundle, name)))
        b = results.to_json(results.build_document(run(bundle, name)))
        assert a == b, name
    print(f"criterion 6: {len(bundle.cluster_scenarios)} scenarios replayed identically")


def test_criterion_7_large_scale(tmp_path):
    """100 services, 200 edges, 100 hosts, 0.1 req/s for 600 s: under 120 s wall and 2 GB peak memory"""
    path = tmp_path / "large.json"
    path.write_text(json.dumps(fixtures.large_chain_document(seed=1)))
    out = tmp_path / "out"
    started = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "chainsim.cli", "--scenario", str(path), "--out", str(out)],
                          capture_output=True, text=True)
    wall = time.perf_counter() - started
    peak_mb = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 1024
    assert proc.returncode == 0, proc.stderr
    doc = json.loads((out / "large.json").read_text())
    st = doc["config"]["chain_structure"]["big"]
    print(f"criterion 7: wall {wall:.1f} s, peak RSS {peak_mb:.0f} MB, {doc['engine']['threads_spawned']} threads, "
          f"|S'| = {st['nodes']} (reference 201), subchains = {st['subchains']} (reference 161)")
    assert len(doc["requests"]) == 60
    assert wall < 120
    assert peak_mb < 2048


def test_criterion_8_suite_throughput():
    """all 104 suite scenarios complete in under 60 s of wall time"""
    bundle = bundle_from_dict(fixtures.suite_document())
    assert len(bundle.cluster_scenarios) == 104
    started = time.perf_counter()
    simulated = 0
    for name in bundle.cluster_scenarios:
        res = run(bundle, name)
        assert res.requests and all(r.exe_time_ns > 0 for r in res.requests)
        simulated += res.sim_end_ns
    wall = time.perf_counter() - started
    print(f"criterion 8: {wall:.1f} s wall for {simulated / 1e9:.0f} s simulated ({simulated / 1e9 / wall:.0f}x)")
    assert wall < 60
    assert not math.isnan(wall)
