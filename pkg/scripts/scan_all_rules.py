"""Exhaustive alpha for every rule, pairs up to n=6 and triples up to n=5."""
import argparse
import time

from matchfix.distribution import format_fraction
from matchfix.manipulation import scan_alpha, scan_limit
from matchfix.rules import rule_registry


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--max-k", type=int, default=3)
    args = ap.parse_args()
    print(f"{'rule':18s} {'k':>2s} {'n':>2s} {'alpha':>8s}  witness")
    for k in range(2, args.max_k + 1):
        for rule in rule_registry():
            for n in range(max(3, k), scan_limit(k) + 1):
                start = time.perf_counter()
                res = scan_alpha(rule, n, k, jobs=args.jobs)
                w = res.witness
                print(f"{rule.name:18s} {k:2d} {n:2d} {format_fraction(res.alpha):>8s}  "
                      f"bits={w.base.bits} coalition={w.coalition.members} ({time.perf_counter() - start:.1f}s)",
                      flush=True)


if __name__ == "__main__":
    main()
