"""Every rule on the superman-kryptonite tournament, next to the known closed forms."""
import argparse
from fractions import Fraction

from matchfix.distribution import format_fraction
from matchfix.manipulation import caterpillar_bound_variants, pair_gain, superman_kryptonite_bound
from matchfix.rules import rule_registry
from matchfix.tournament import generate_witness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=7)
    args = ap.parse_args()
    for n in range(4, args.max_n + 1):
        t = generate_witness("superman_kryptonite", n)
        print(f"n={n}")
        for rule in rule_registry():
            d = rule(t)
            gain = pair_gain(rule, t, 0, n - 1).total_gain
            bound, name = superman_kryptonite_bound(rule.name, n)
            line = (f"  {rule.name:18s} r_1={format_fraction(d[0]):>8s} r_n={format_fraction(d[n - 1]):>8s} "
                    f"gain={format_fraction(gain):>8s}")
            if name != "0":
                line += f"  [{name} = {format_fraction(bound)}: {'equal' if gain == bound else 'differs'}]"
            print(line)
        for label, value in caterpillar_bound_variants(n).items():
            hit = pair_gain(next(r for r in rule_registry() if r.name == "caterpillar"), t, 0, n - 1).total_gain == value
            print(f"  caterpillar {label}: {format_fraction(value)} {'matches' if hit else 'does not match'}")


if __name__ == "__main__":
    main()
