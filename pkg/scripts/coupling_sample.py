"""Run the bracket coupling on seeded random tournaments and tally failed checks.

Tournament ``s`` is the same one ``matchfix coupling-verify --n N --samples S
--seed SEED`` checks.
"""
import argparse
import time
from collections import Counter

from matchfix.cli import _seeded_tournament
from matchfix.coupling import verify_tournament


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    failed = Counter()
    pairs = bad_pairs = shared = 0
    worst = None
    start = time.perf_counter()
    for s in range(args.samples):
        t = _seeded_tournament(args.n, args.seed, s)
        for rec in verify_tournament(t):
            pairs += 1
            bad_pairs += not rec.passed
            shared += rec.shared_images
            failed.update(name for name, ok in rec.checks.items() if not ok)
            ratio = rec.bad / rec.total
            if worst is None or ratio > worst[0]:
                worst = (ratio, t.bits, rec.i, rec.j)
        print(f"tournament {s}: {pairs} pairs so far, {bad_pairs} failing ({time.perf_counter() - start:.0f}s)", flush=True)
    print(f"pairs checked: {pairs}, failing: {bad_pairs}")
    print(f"failures by check: {dict(failed) or 'none'}")
    print(f"brackets lying in both images: {shared}")
    print(f"largest bad fraction: {float(worst[0]):.4f} (tournament bits {worst[1]}, i={worst[2]}, j={worst[3]})")


if __name__ == "__main__":
    main()
