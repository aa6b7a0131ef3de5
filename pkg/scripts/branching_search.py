"""Enumerate 8-node, 10-edge chains matching the eight-node subchain example.

Constraints: S3 has indegree 2 and outdegree 2, S6 has indegree 3 and sits
on a cycle with S7, every other non-source node has indegree 1, exactly the
6th, 8th and 10th edges (edges listed in (src, dst) order) end at
duplicates, and the alternative graph has 5 subchains.
"""

import itertools
import sys

from chainsim.chaingraph import ChainGraph, build_alternative_graph, extract_subchains
from chainsim.errors import GraphError


def candidates():
    nodes = [f"S{i}" for i in range(1, 9)]
    others = lambda n: [m for m in nodes if m != n]
    single = {n: others(n) for n in ("S2", "S4", "S5", "S8")}
    for s2, s4, s5, s8 in itertools.product(*single.values()):
        for s3 in itertools.combinations(others("S3"), 2):
            for rest in itertools.combinations([m for m in others("S6") if m != "S7"], 2):
                s6 = ("S7", *rest)
                edges = sorted({(s2, "S2"), (s4, "S4"), (s5, "S5"), (s8, "S8"), ("S6", "S7")}
                               | {(a, "S3") for a in s3} | {(a, "S6") for a in s6},
                               key=lambda e: (int(e[0][1:]), int(e[1][1:])))
                if len(edges) != 10:
                    continue
                g = ChainGraph("example", tuple(nodes), {n: (n, "f") for n in nodes}, tuple((a, b, 0) for a, b in edges))
                if sum(1 for a, _, _ in g.edges if a == "S3") != 2:
                    continue
                try:
                    alt = build_alternative_graph(g)
                except GraphError:
                    continue
                if sorted(i + 1 for i in alt.rerouted) != [6, 8, 10]:
                    continue
                if extract_subchains(alt).count != 5:
                    continue
                yield edges


if __name__ == "__main__":
    limit = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    found = 0
    for edges in candidates():
        found += 1
        if found <= limit:
            print(" ".join(f"{a}->{b}" for a, b in edges))
    print(f"{found} graphs satisfy the constraints")
