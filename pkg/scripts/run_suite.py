"""Run the 104-scenario suite and print one line per scenario plus totals.

    python scripts/run_suite.py [--csv results.csv]
"""

import argparse
import csv
import sys
import time

from chainsim import fixtures
from chainsim.engine import run
from chainsim.scenario import bundle_from_dict


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--csv", help="also write the per-scenario table to this file")
    args = p.parse_args()
    bundle = bundle_from_dict(fixtures.suite_document())
    rows = []
    started = time.perf_counter()
    for name, cs in bundle.cluster_scenarios.items():
        t0 = time.perf_counter()
        res = run(bundle, name)
        wall = time.perf_counter() - t0
        chain = next(iter(cs.chains))
        rows.append((name, chain, len(res.requests), res.mean_exe_time() / 1e9, res.sim_end_ns / 1e9, wall))
        print(f"{name} {chain} n={len(res.requests):<4d} mean={rows[-1][3]:10.4f} s  "
              f"sim={rows[-1][4]:8.1f} s  wall={wall:.3f} s")
    total = time.perf_counter() - started
    simulated = sum(r[4] for r in rows)
    print(f"{len(rows)} scenarios, {total:.2f} s wall, {simulated:.0f} s simulated, {simulated / total:.0f}x faster")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scenario", "chain", "requests", "mean_exe_s", "sim_end_s", "wall_s"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
