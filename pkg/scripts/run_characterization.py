#!/usr/bin/env python3
"""Characterize the alignment workload: per-stage breakdowns for the four
scheduling/preset design points, on one seeded desk-scale dataset.

Usage: python scripts/run_characterization.py [--rows N] [--fragment-len N] ...
Prints a stage-share table per design point plus match rate and compute
efficiency, and highlights the preset bottleneck and the effect of gang
presets.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mtjpim import perf
from mtjpim.kernels import AlignmentRunConfig, run_alignment_workload
from mtjpim.perf import STAGES


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=32)
    ap.add_argument("--fragment-len", type=int, default=300)
    ap.add_argument("--pattern-len", type=int, default=50)
    ap.add_argument("--n-patterns", type=int, default=8)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--profile", default="near_term")
    args = ap.parse_args()

    base = AlignmentRunConfig(
        profile=args.profile, rows=args.rows, cols=4096,
        fragment_len=args.fragment_len, pattern_len=args.pattern_len,
        n_patterns=args.n_patterns, seed=args.seed, mutation_rate=0.02)

    for policy in ("naive", "naive_opt", "oracular", "oracular_opt"):
        _, ledger, n = run_alignment_workload(base.replace(policy=policy))
        rep = perf.throughput(ledger, n)
        bd = perf.breakdown(ledger)
        print(f"\n== {policy} ({args.profile}, {args.rows} rows, "
              f"{args.n_patterns} patterns)")
        print(f"   match rate {rep.match_rate_per_s:10.3f} patt/s   "
              f"power {rep.power_mw:8.4f} mW   "
              f"efficiency {rep.compute_efficiency:10.3f} patt/s/mW")
        print(f"   {'stage':18s} {'energy%':>9s} {'latency%':>9s}")
        for s in STAGES:
            print(f"   {s:18s} {bd[s]['energy_share']:9.2%} "
                  f"{bd[s]['latency_share']:9.2%}")
        preset_l = (bd["preset_match"]["latency_share"]
                    + bd["preset_score"]["latency_share"])
        preset_e = (bd["preset_match"]["energy_share"]
                    + bd["preset_score"]["energy_share"])
        print(f"   presets combined: {preset_e:.2%} energy, {preset_l:.2%} latency")


if __name__ == "__main__":
    main()
