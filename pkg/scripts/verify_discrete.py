"""Run the randomized invariant suites over several seeds and tabulate the outcome.

    python3 scripts/verify_discrete.py [--seeds 5] [--count 200]
"""

import argparse
import json

from genbounds.verify import run_verify


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--json", action="store_true", help="print the raw reports")
    args = ap.parse_args()

    reports = [run_verify("discrete", seed=s, count=args.count) for s in range(args.seeds)]
    if args.json:
        print(json.dumps(reports, indent=2))
        return
    names = [p["name"] for p in reports[0]["properties"]]
    width = max(map(len, names))
    print(f"{'property':<{width}}  " + " ".join(f"s{s:<3}" for s in range(args.seeds)))
    for k, name in enumerate(names):
        cells = " ".join(("ok  " if r["properties"][k]["pass"] else "FAIL") for r in reports)
        print(f"{name:<{width}}  {cells}")
    for s, r in enumerate(reports):
        for p in r["properties"]:
            if not p["pass"]:
                print(f"seed {s} {p['name']}: {p['detail']}")


if __name__ == "__main__":
    main()
