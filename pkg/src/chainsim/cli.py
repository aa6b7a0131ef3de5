"""``chainsim`` command line entry point."""

from __future__ import annotations

import argparse
import logging
import os
import resource
import sys
from pathlib import Path

from . import results
from .chaingraph import ChainGraph, build_alternative_graph, chain_to_dot, extract_subchains, plan_to_dot
from .engine import EngineOptions, Simulation
from .errors import ScenarioError, SimulationError
from .scenario import Diagnostic, ScenarioBundle, parse_scenario, validate_bundle
from .topology import build_topology

EXIT_OK, EXIT_USAGE, EXIT_SCENARIO, EXIT_SIMULATION = 0, 2, 3, 4

log = logging.getLogger("chainsim")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainsim", description="Simulate microservice chains described by a JSON scenario.")
    p.add_argument("--scenario", required=True, metavar="PATH", help="scenario JSON file")
    p.add_argument("--run", default="all", metavar="NAME|all", help="cluster scenario to run (default: all)")
    p.add_argument("--out", metavar="DIR", help="output directory (default: JSON to stdout)")
    p.add_argument("--format", choices=("json", "csv", "both"), default="json")
    p.add_argument("--validate-only", action="store_true", help="check the scenario and print diagnostics")
    p.add_argument("--repeat", type=int, default=1, metavar="N", help="run each scenario N times")
    p.add_argument("--dump-graphs", action="store_true", help="write dot files of chain and alternative graphs")
    p.add_argument("--max-drain-factor", type=float, default=10.0, metavar="F",
                   help="abort when work is still in flight after F x horizon (default 10)")
    return p


def _structural_diagnostics(bundle: ScenarioBundle) -> list[Diagnostic]:
    diags = []
    for name, cs in bundle.cluster_scenarios.items():
        try:
            build_topology(bundle, cs.topology)
        except ScenarioError as exc:
            diags.append(Diagnostic("error", f"topologies.{cs.topology}", str(exc)))
        for chain in cs.chains:
            try:
                build_alternative_graph(ChainGraph.from_spec(bundle.chains[chain]))
            except ScenarioError as exc:
                diags.append(Diagnostic("error", f"sfcs.{chain}", str(exc)))
    return diags


def _dump_graphs(bundle: ScenarioBundle, chains, out: Path) -> None:
    gdir = out / "graphs"
    gdir.mkdir(parents=True, exist_ok=True)
    for name in chains:
        g = ChainGraph.from_spec(bundle.chains[name])
        (gdir / f"{name}.dot").write_text(chain_to_dot(g))
        (gdir / f"{name}_alt.dot").write_text(plan_to_dot(extract_subchains(build_alternative_graph(g))))


def _peak_rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CHAINSIM_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.repeat < 1 or args.max_drain_factor <= 0:
        print("chainsim: --repeat must be >= 1 and --max-drain-factor > 0", file=sys.stderr)
        return EXIT_USAGE

    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"chainsim: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_SCENARIO

    if args.validate_only:
        try:
            bundle = parse_scenario(text, strict=False)
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SCENARIO
        diags = validate_bundle(bundle)
        if not any(d.severity == "error" for d in diags):
            diags += _structural_diagnostics(bundle)
        for d in diags:
            print(d, file=sys.stderr)
        return EXIT_SCENARIO if any(d.severity == "error" for d in diags) else EXIT_OK

    try:
        bundle = parse_scenario(text)
    except ScenarioError as exc:
        print(f"chainsim: {exc}", file=sys.stderr)
        return EXIT_SCENARIO

    names = list(bundle.cluster_scenarios) if args.run == "all" else [args.run]
    unknown = [n for n in names if n not in bundle.cluster_scenarios]
    if unknown:
        print(f"chainsim: unknown cluster scenario {unknown[0]!r}; available: {sorted(bundle.cluster_scenarios)}",
              file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if args.dump_graphs:
        chains = sorted({c for n in names for c in bundle.cluster_scenarios[n].chains})
        _dump_graphs(bundle, chains, out or Path("."))

    options = EngineOptions(max_drain_factor=args.max_drain_factor)
    for name in names:
        for i in range(args.repeat):
            try:
                result = Simulation(bundle, name, options).run()
            except ScenarioError as exc:
                print(f"chainsim: {name}: {exc}", file=sys.stderr)
                return EXIT_SCENARIO
            except SimulationError as exc:
                print(f"chainsim: {name}: simulation failed: {exc}", file=sys.stderr)
                return EXIT_SIMULATION
            log.info("%s: %d requests, %d events, %.3f s wall, peak RSS %.1f MB",
                     name, len(result.requests), result.events, result.wall_seconds, _peak_rss_mb())
            doc = results.build_document(result, max_drain_factor=args.max_drain_factor)
            stem = name if args.repeat == 1 else f"{name}.run{i + 1}"
            if out is None:
                if args.format in ("json", "both"):
                    sys.stdout.write(results.to_json(doc))
                if args.format in ("csv", "both"):
                    sys.stdout.write(results.export_csv(doc))
                continue
            if args.format in ("json", "both"):
                (out / f"{stem}.json").write_text(results.to_json(doc))
            if args.format in ("csv", "both"):
                (out / f"{stem}.csv").write_text(results.export_csv(doc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
