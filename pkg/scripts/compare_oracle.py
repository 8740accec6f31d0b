"""Compare SMT and brute-force optima on random small instances.

    python scripts/compare_oracle.py --count 60 --seed 2024
"""

import argparse
import random
from collections import Counter

from ocalign.conformance import AlignConfig, align_trace, object_types_of
from ocalign.log_model import trace_graphs
from ocalign.synthetic import FAMILIES, random_instance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=60)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--dialect", choices=["native", "iterative"])
    args = ap.parse_args()

    rng = random.Random(args.seed)
    tally: Counter = Counter()
    for k in range(args.count):
        inst = random_instance(rng, FAMILIES[k % len(FAMILIES)])
        types = object_types_of(inst.anet, inst.log.universe.objects)
        for t in trace_graphs(inst.log):
            cfg = AlignConfig(bound=inst.n, extra_objects=inst.extra, mode="both", dialect=args.dialect)
            r = align_trace(inst.anet, t, types, cfg)
            agree = r.cost == r.oracle_cost and r.ok
            tally[(inst.family, "agree" if agree else "DISAGREE")] += 1
            if not agree:
                print(f"{inst.family} {sorted(t.component)}: smt {r.cost} oracle {r.oracle_cost} {r.problems}")
    for (family, verdict), count in sorted(tally.items()):
        print(f"{family:15} {verdict:9} {count}")


if __name__ == "__main__":
    main()
