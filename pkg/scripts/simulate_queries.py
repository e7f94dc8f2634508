"""Empirical failure rate of the sampling search on a two-bloc instance.

Prints the sample size, per-mode query counts and how often the survivor
misses the eps-PVC, next to the delta target.
"""

import argparse
import math
import random
from fractions import Fraction

from pvcore.profile import AlternativeDistribution, two_bloc
from pvcore.pvc import critical_epsilon
from pvcore.querysim import OracleEnvironment, compute_tau, find_epsilon_pvc_element


def weighted_fixture(n, m, seed):
    rng = random.Random(seed)
    raw = [rng.randint(1, 10) for _ in range(m)]
    d = AlternativeDistribution(tuple(Fraction(w, sum(raw)) for w in raw))
    return two_bloc(n, m, Fraction(1, 2), seed=seed + 4, phi=0.5), d


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--voters", type=int, default=100)
    ap.add_argument("--alts", type=int, default=40)
    ap.add_argument("--epsilon", type=Fraction, default=Fraction(1, 5))
    ap.add_argument("--delta", type=Fraction, default=Fraction(1, 10))
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--mode", choices=("min", "pairwise"), default="min")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    p, d = weighted_fixture(args.voters, args.alts, args.seed)
    tau = compute_tau(args.epsilon, args.delta)
    print(f"tau = {tau}  (eps={args.epsilon}, delta={args.delta})")
    crit = {}
    misses = 0
    for run in range(args.runs):
        env = OracleEnvironment(p, d, seed=run)
        res = find_epsilon_pvc_element(env, args.epsilon, args.delta, args.mode, seed=10_000 + run)
        if res.survivor not in crit:
            crit[res.survivor] = critical_epsilon(p, d, res.survivor).value
        misses += crit[res.survivor] > args.epsilon
    print(f"queries per run: {res.trace.to_json()}")
    rate = misses / args.runs
    slack = 3 * math.sqrt(float(args.delta * (1 - args.delta)) / args.runs)
    print(f"failure rate {rate:.3f} over {args.runs} runs (target <= {float(args.delta):.3f} + {slack:.3f})")
    worst = max(crit.values())
    print(f"distinct survivors {len(crit)}, worst critical eps {float(worst):.4f}")


if __name__ == "__main__":
    main()
