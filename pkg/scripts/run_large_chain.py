"""Random 100-service chain over 100 hosts; reports wall time, memory and structure.

    python scripts/run_large_chain.py --seeds 1 2 3
"""

import argparse
import resource
import time

from chainsim import fixtures
from chainsim.engine import run
from chainsim.scenario import bundle_from_dict


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", type=int, nargs="+", default=[1])
    p.add_argument("--services", type=int, default=100)
    p.add_argument("--edges", type=int, default=200)
    p.add_argument("--hosts", type=int, default=100)
    p.add_argument("--rate", type=float, default=0.1)
    p.add_argument("--duration", type=float, default=600)
    args = p.parse_args()
    print("seed  wall_s  peak_rss_mb  requests  threads  mean_exe_s  alt_nodes  subchains")
    for seed in args.seeds:
        doc = fixtures.large_chain_document(seed, args.services, args.edges, args.hosts, args.rate, args.duration)
        bundle = bundle_from_dict(doc)
        t0 = time.perf_counter()
        res = run(bundle, "large")
        wall = time.perf_counter() - t0
        rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
        st = res.structure["big"]
        print(f"{seed:4d}  {wall:6.2f}  {rss:11.1f}  {len(res.requests):8d}  {res.threads_spawned:7d}  "
              f"{res.mean_exe_time() / 1e9:10.3f}  {st['nodes']:9d}  {st['subchains']:9d}")


if __name__ == "__main__":
    main()
