"""Write the bundled scenario documents to scenarios/ as JSON."""

import argparse
import json
from pathlib import Path

from chainsim import fixtures


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default=Path(__file__).resolve().parent.parent / "scenarios", type=Path)
    p.add_argument("--seed", type=int, default=1, help="seed of the large random chain")
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    docs = {
        "reference.json": fixtures.reference_document(),
        "suite.json": fixtures.suite_document(),
        "large_chain.json": fixtures.large_chain_document(seed=args.seed),
    }
    for name, doc in docs.items():
        (args.out / name).write_text(json.dumps(doc, indent=1) + "\n")
        print(args.out / name)


if __name__ == "__main__":
    main()
