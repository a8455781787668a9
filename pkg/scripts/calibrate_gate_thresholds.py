#!/usr/bin/env python3
"""Derive the per-direction switching thresholds shipped in the configs.

The divider model leaves one effective switching current per flip direction
(0->1 for preset-0 gates, 1->0 for preset-1 gates). For each direction this
script intersects, over all windowed gates of that preset, the interval of
thresholds for which the gate's truth table holds at its documented window
midpoint, and prints the interval midpoint. Those midpoints are the values
frozen under ``switching_thresholds_ua`` in configs/*.json.

Run after editing device constants:  python scripts/calibrate_gate_thresholds.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mtjpim import device
from mtjpim.profiles import shipped_profile, shipped_profile_names


def feasible_threshold(profile, preset):
    lo, hi = 0.0, float("inf")
    binding = {}
    for name in device.standard_gate_names(profile):
        fam = device.GATE_FAMILIES[name]
        if fam.preset != preset:
            continue
        v_mid = profile.window_midpoint(name)
        switching = [k for k, b in enumerate(fam.truth_by_ones) if b != preset]
        j = max(switching)
        i_keep = device.output_current(j, fam.n_inputs, preset, v_mid, profile)
        hi = min(hi, i_keep)
        if j + 1 <= fam.n_inputs:
            i_stay = device.output_current(j + 1, fam.n_inputs, preset, v_mid, profile)
            lo = max(lo, i_stay)
        binding[name] = (lo, hi)
    return lo, hi, binding


def main():
    for name in shipped_profile_names():
        profile = shipped_profile(name)
        print(f"== {name}")
        for preset, label in ((0, "p_to_ap"), (1, "ap_to_p")):
            lo, hi, _ = feasible_threshold(profile, preset)
            if lo >= hi:
                print(f"  {label}: INFEASIBLE (lo {lo*1e6:.6f} uA >= hi {hi*1e6:.6f} uA)")
                continue
            mid = 0.5 * (lo + hi)
            print(f"  {label}: feasible ({lo*1e6:.6f}, {hi*1e6:.6f}) uA "
                  f"-> midpoint {mid*1e6:.6f} uA "
                  f"({mid/profile.i_crit_a:.4f} x i_crit)")


if __name__ == "__main__":
    main()
