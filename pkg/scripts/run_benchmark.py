"""Replicated subsampling benchmark: mean critical epsilon per voting rule.

    python scripts/run_benchmark.py --config scripts/configs/ordering.json --out results/ordering
"""

import argparse
import time
from pathlib import Path

from pvcore import harness

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(HERE / "configs" / "ordering.json"))
    ap.add_argument("--out", default="results/ordering")
    ap.add_argument("--seed", type=int, help="override the master seed")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.workers = args.workers
    t0 = time.perf_counter()
    records = harness.run_experiment(cfg)
    summaries = harness.write_outputs(records, args.out)
    print(f"{len(records)} records in {time.perf_counter() - t0:.1f}s -> {args.out}")
    print(f"{'rule':<10} {'mean':>8} {'p99':>8} {'<0.01':>7}")
    for s in sorted(summaries, key=lambda s: s.mean):
        print(f"{s.rule:<10} {float(s.mean):8.4f} {float(s.p99):8.4f} {float(s.frac_lt_001):7.1%}")


if __name__ == "__main__":
    main()
