#!/usr/bin/env python3
"""Sensitivity experiments: pattern length, technology point, and the bulk
bitwise micro-benchmark. Emits plot-ready CSV to stdout or --out-dir.

Usage: python scripts/run_sensitivity.py [--out-dir DIR] [--quick]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mtjpim import perf
from mtjpim.kernels import AlignmentRunConfig
from mtjpim.profiles import shipped_profile


def emit(out_dir, name, text):
    if out_dir is None:
        print(f"# {name}\n{text}")
    else:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / name).write_text(text)
        print(f"wrote {out_dir / name}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", type=Path, default=None)
    ap.add_argument("--quick", action="store_true",
                    help="smaller fragments, faster run")
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()

    frag = 350 if args.quick else 650
    lengths = [50, 100, 150] if args.quick else [100, 200, 300]
    base = AlignmentRunConfig(rows=2, cols=4096, fragment_len=frag,
                              pattern_len=lengths[0], n_patterns=1,
                              seed=args.seed, policy="naive_opt",
                              mutation_rate=0.0)

    rows = ["pattern_len,match_rate_per_s,power_mw,compute_efficiency"]
    for v, rep in perf.sweep(base, "pattern_len", lengths):
        rows.append(f"{v},{rep.match_rate_per_s!r},{rep.power_mw!r},"
                    f"{rep.compute_efficiency!r}")
    emit(args.out_dir, "sweep_pattern_length.csv", "\n".join(rows) + "\n")

    rows = ["profile,match_rate_per_s,power_mw,compute_efficiency"]
    tech_base = base.replace(fragment_len=300, pattern_len=50, rows=8,
                             policy="oracular_opt", n_patterns=4)
    for v, rep in perf.sweep(tech_base, "profile", ["near_term", "long_term"]):
        rows.append(f"{v},{rep.match_rate_per_s!r},{rep.power_mw!r},"
                    f"{rep.compute_efficiency!r}")
    emit(args.out_dir, "sweep_profile.csv", "\n".join(rows) + "\n")

    rows = ["op,bit_ops_per_s,power_mw"]
    for op, rep in perf.bulk_bitwise_bench(shipped_profile("near_term"),
                                           rows=64, bits=256).items():
        rows.append(f"{op},{rep.match_rate_per_s!r},{rep.power_mw!r}")
    emit(args.out_dir, "bulk_bitwise.csv", "\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
