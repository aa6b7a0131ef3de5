"""Independent reference implementations used only by the tests.

They share no code with the library: graphs are plain (nodes, edges) lists,
scheduling is integrated with a fixed time step, and the flow calculator
recounts link usage from scratch.
"""

from __future__ import annotations

import itertools
import math

# ---------------------------------------------------------------------------
# Subchains, read literally: visit every node once by giving each extra
# incoming edge its own copy, then cut the resulting tree into maximal paths.


def oracle_alternative(nodes, edges):
    """Return (copies, tree_edges): copies[i] = original node, tree_edges = [(parent copy, child copy, edge idx)]."""
    source = nodes[0]
    out = {n: [] for n in nodes}
    for idx, (a, b) in enumerate(edges):
        out[a].append((idx, b))
    seen = {source: 0}
    copies = [source]
    tree = []
    frontier = [source]
    while frontier:
        nxt = []
        for node in frontier:
            for idx, b in out[node]:
                copies.append(b)
                child = len(copies) - 1
                tree.append((seen[node], child, idx))
                if b not in seen:
                    seen[b] = child
                    nxt.append(b)
        frontier = nxt
    if len(seen) != len(nodes):
        return None
    # copies that are not the first visit never expand; keep them as leaves
    return copies, tree


def oracle_subchains(nodes, edges):
    """Subchains as tuples of original node names, in discovery order."""
    alt = oracle_alternative(nodes, edges)
    if alt is None:
        return None
    copies, tree = alt
    kids = {i: [] for i in range(len(copies))}
    for p, c, idx in tree:
        kids[p].append((idx, c))
    result = []

    def walk(start):
        path = [start]
        while len(kids[path[-1]]) == 1:
            path.append(kids[path[-1]][0][1])
        result.append(tuple(copies[i] for i in path))
        if len(kids[path[-1]]) >= 2:
            for _, c in kids[path[-1]]:
                walk(c)

    walk(0)
    return result


def enumerate_chain_graphs(max_nodes: int, max_edges: int):
    """All digraphs on 1..max_nodes labelled nodes with node 0 as the only entry,
    no self-loops, every node reachable from 0 and at most max_edges edges.
    Edges are declared sorted by (src, dst)."""
    for n in range(1, max_nodes + 1):
        possible = [(a, b) for a in range(n) for b in range(1, n) if a != b]
        for k in range(n - 1, min(max_edges, len(possible)) + 1):
            for subset in itertools.combinations(possible, k):
                if _reachable(n, subset):
                    yield list(range(n)), list(subset)


def _reachable(n, edges) -> bool:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
    seen = {0}
    stack = [0]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


# ---------------------------------------------------------------------------
# Naive fair-share flow rates: count, for every flow, how many flows use
# each of its links, and take the worst per-link share.


def oracle_flow_rates(capacities, flows, caps=None):
    """capacities: {link: bytes/s}; flows: {flow: [links]}; caps: {flow: (out, in)}."""
    rates = {}
    for f, links in flows.items():
        best = math.inf
        for link in links:
            users = sum(1 for g in flows.values() if link in g)
            best = min(best, capacities[link] / users)
        if caps and f in caps:
            best = min(best, *caps[f])
        rates[f] = best
    return rates


# ---------------------------------------------------------------------------
# Fixed-step CPU scheduler.  Threads are dicts with keys arrival_ns, group,
# inst, cpi, maccs, crefs, cmiss, pen, share, limits and optional cmt=(a, b).
# Core rule: an arriving thread joins the core with the fewest threads;
# whenever two cores differ by two or more threads, the oldest thread of the
# fullest core moves to the emptiest one.


def _core_rates(threads, active_on_core, group_count, clock):
    shares = {i: threads[i]["share"] / group_count[threads[i]["group"]] for i in active_on_core}
    total = sum(shares.values())
    maccs = sum(threads[i]["maccs"] for i in active_on_core)
    ratios = {}
    for i in active_on_core:
        th = threads[i]
        if th["limits"] is None:
            ratios[i] = shares[i] * 1024 / total
        else:
            cap = th["limits"] * 1024 / 1000 / group_count[th["group"]]
            ratios[i] = min(shares[i], 1024, cap)
    s = sum(ratios.values())
    if s > 1024:
        ratios = {i: r * 1024 / s for i, r in ratios.items()}
    rates = {}
    for i in active_on_core:
        th = threads[i]
        base = th["cmiss"] / th["crefs"] if th["crefs"] else 0.0
        a, b = th.get("cmt", (0.0, 0.0))
        corr = (a * math.log(maccs) + b) if a else b
        miss = base * (corr + 1)
        pen = th["maccs"] / th["inst"] * miss * th["pen"]
        rel = th["cpi"] * (ratios[i] / 1024) / (th["cpi"] + pen)
        rates[i] = rel * clock / th["cpi"]  # instructions per second
    return rates


def oracle_microstep(threads, cores, clock, dt_ns=1000.0, t_max_ns=10e9):
    """Completion time (ns) of every thread using fixed steps of ``dt_ns``."""
    remaining = {i: float(t["inst"]) for i, t in enumerate(threads)}
    done: dict[int, float] = {}
    core_of: dict[int, int] = {}
    pending = sorted(range(len(threads)), key=lambda i: (threads[i]["arrival_ns"], i))
    t = 0.0
    while len(done) < len(threads):
        if t > t_max_ns:
            raise RuntimeError("microstep oracle exceeded its horizon")
        while pending and threads[pending[0]]["arrival_ns"] <= t:
            i = pending.pop(0)
            counts = [sum(1 for c in core_of.values() if c == k) for k in range(cores)]
            core_of[i] = counts.index(min(counts))
        if not core_of:
            t = float(threads[pending[0]]["arrival_ns"])
            continue
        groups: dict = {}
        for i in core_of:
            groups[threads[i]["group"]] = groups.get(threads[i]["group"], 0) + 1
        rates = {}
        for k in range(cores):
            on = [i for i, c in core_of.items() if c == k]
            if on:
                rates.update(_core_rates(threads, on, groups, clock))
        step = dt_ns
        if pending:
            step = min(step, threads[pending[0]]["arrival_ns"] - t) or dt_ns
        finished = []
        for i, r in rates.items():
            work = r * step / 1e9
            if remaining[i] <= work:
                done[i] = t + remaining[i] / r * 1e9
                finished.append(i)
            else:
                remaining[i] -= work
        for i in finished:
            del core_of[i]
        while core_of:
            counts = [sum(1 for c in core_of.values() if c == k) for k in range(cores)]
            hi, lo = counts.index(max(counts)), counts.index(min(counts))
            if counts[hi] - counts[lo] < 2:
                break
            oldest = min(i for i, c in core_of.items() if c == hi)
            core_of[oldest] = lo
        t += step
    return done
