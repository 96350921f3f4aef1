"""Oracle-versus-monitor sweep: the exhaustive small family plus random charts.

    python scripts/run_equivalence_sweep.py [--charts 200] [--traces 1000] [--seed 1]
"""

import argparse
import sys

from cesc.sweep import SweepConfig, exhaustive_part, random_part


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--charts", type=int, default=200)
    ap.add_argument("--traces", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--skip-exhaustive", action="store_true")
    args = ap.parse_args()
    cfg = SweepConfig(max_n=args.max_n, random_charts=args.charts,
                      traces_per_chart=args.traces, seed=args.seed)
    ok = True
    if not args.skip_exhaustive:
        fam = exhaustive_part(cfg)
        print(f"exhaustive: {fam.charts} charts, {fam.traces} traces, "
              f"{len(fam.mismatches)} counterexamples, {fam.seconds:.1f}s")
        for m in fam.mismatches:
            print("  " + m)
        ok &= fam.ok
    rnd = random_part(cfg)
    print(f"random: {rnd.charts} charts, {rnd.traces} traces, {rnd.matches} expected verdicts, "
          f"{len(rnd.mismatches)} mismatches, {rnd.seconds:.1f}s")
    for m in rnd.mismatches:
        print("  " + m)
    ok &= rnd.ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
