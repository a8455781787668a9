"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured quantities (run with -s or -v to see them).

Criterion 5 asserts the documented 188-adder budget for a 100-bit reduction
tree. A pairwise tree with 50 first-level adders performs 99 two-input
additions (each addition reduces the operand count by exactly one), and the
minimum consistent one-bit-adder cost of any such tree is 192; the natural
promote-the-odd-operand schedule costs 194. The 188 budget therefore
corresponds to a 98-addition schedule no correct tree can realise, and this
check is expected to fail. It is kept as stated rather than weakened.
"""

import itertools

import numpy as np

from mtjpim import device, gates, isa, kernels, perf, scheduler
from mtjpim.array import ArrayGeometry, ArrayState
from mtjpim.kernels import AlignmentRunConfig
from mtjpim.perf import Stage
from mtjpim.profiles import shipped_profile

NEAR = shipped_profile("near_term")
LONG = shipped_profile("long_term")
PROFILES = (NEAR, LONG)
GATE_SET = ("inv", "copy", "nor", "maj3", "maj5", "th4")


def _report(num, text):
    print(f"ACCEPTANCE {num:02d} PASS: {text}")


# -- 1: gate truth tables at documented window midpoints -----------------------------

def test_c01_gate_truth_tables_at_window_midpoints():
    checked = 0
    for profile in PROFILES:
        for name in GATE_SET:
            spec = device.make_gate(name, profile)   # documented midpoint
            fam = device.GATE_FAMILIES[name]
            for bits in itertools.product((0, 1), repeat=fam.n_inputs):
                got = device.evaluate_gate(bits, spec, profile)
                assert got == fam.truth_by_ones[sum(bits)], (profile.name, name, bits)
                checked += 1
    _report(1, f"{checked} truth-table entries exact at both profiles' midpoints")


# -- 2: XOR single-step infeasibility --------------------------------------------------

def test_c02_xor_single_step_infeasible():
    fam = device.GATE_FAMILIES["xor"]
    for profile in PROFILES:
        for preset in (0, 1):
            win = device.solve_voltage_window(fam.truth_by_ones, preset, 2, profile)
            assert win is None, (profile.name, preset)
    _report(2, "no single-step XOR window exists for either preset, both profiles")


# -- 3: solved window ordering ---------------------------------------------------------

def test_c03_window_midpoint_ordering():
    for profile in PROFILES:
        mid = {g: device.solve_gate_window(g, profile).midpoint
               for g in ("inv", "copy", "nor", "maj3", "maj5")}
        assert mid["inv"] > mid["nor"] > mid["maj3"] > mid["maj5"], profile.name
        assert mid["copy"] > mid["nor"], profile.name
    _report(3, "inv/copy > nor > maj3 > maj5 midpoint ordering holds, both profiles")


# -- 4: composite XOR and full adder ---------------------------------------------------

def test_c04_composite_xor_and_adder_exact():
    for a, b in itertools.product((0, 1), repeat=2):
        arr = ArrayState(1, 8, profile=NEAR)
        arr.cells[0, 0], arr.cells[0, 1] = a, b
        gates.execute_sequence(gates.xor_sequence(0, 1, 2, 3, 4), arr)
        assert arr.cells[0, 4] == a ^ b
    for a, b, c in itertools.product((0, 1), repeat=3):
        arr = ArrayState(1, 8, profile=NEAR)
        arr.cells[0, 0], arr.cells[0, 1], arr.cells[0, 2] = a, b, c
        gates.execute_sequence(gates.full_adder_sequence(0, 1, 2, 3, 4, 5, 6), arr)
        assert 2 * int(arr.cells[0, 6]) + int(arr.cells[0, 5]) == a + b + c
    _report(4, "3-step XOR (4/4 cases) and 4-step adder (8/8 cases) exact")


# -- 5: reduction-tree budget ----------------------------------------------------------

def test_c05_reduction_tree_budget_100_bits():
    n = 100
    width = gates.score_width(n)
    seq = gates.reduction_tree(list(range(n)), n + width,
                               list(range(n, n + width)))
    assert width == 7
    invocations = int(seq.adder_invocations)
    assert invocations == 188, (
        f"tree uses {invocations} one-bit adders; the 188 budget implies a "
        "98-addition schedule, but any pairwise tree over 100 bits performs "
        "99 additions (minimum consistent cost 192)")
    _report(5, "100-bit tree compiles to 188 one-bit adders and a 7-bit score")


# -- 6: alignment oracle equivalence ---------------------------------------------------

def test_c06_alignment_oracle_equivalence():
    rows, frag_len, plen = 128, 1000, 100
    cfg = AlignmentRunConfig(rows=rows, cols=4096, fragment_len=frag_len,
                             pattern_len=plen, n_patterns=rows, seed=11,
                             policy="oracular_opt", mutation_rate=0.02)
    reference, patterns = kernels.generate_workload(cfg)
    stride = frag_len - (plen - 1)
    # replace a few patterns with exact seam-straddling windows
    patterns = list(patterns)
    rng = np.random.default_rng(5)
    for i in range(0, rows, 16):
        seam = (i + 1) * stride
        pos = seam - plen // 2
        patterns[i] = reference[pos:pos + plen]
    cfg = cfg.replace(reference=reference, patterns=tuple(patterns))
    records, ledger, _ = kernels.run_alignment_workload(cfg)

    geometry = ArrayGeometry(1, rows, 4096)
    folded, _ = kernels.layout_reference(reference, frag_len, geometry, plen)
    assert len({(r.pattern_id, r.row) for r in records}) >= 100
    cache = {}
    for rec in records:
        key = (rec.pattern_id, rec.row)
        if key not in cache:
            cache[key] = kernels.sliding_scores(folded.fragments[rec.row],
                                                patterns[rec.pattern_id])
        assert rec.score == int(cache[key][rec.loc]), rec
    seam_ids = set(range(0, rows, 16))
    assert all(max(r.score for r in records if r.pattern_id == pid) == plen
               for pid in seam_ids)
    _report(6, f"{len(records)} score records all equal the sliding-window "
               f"oracle ({len(cache)} pattern/fragment instances, seams included)")


# -- 7: preset dominance in the unoptimized run ----------------------------------------

def test_c07_preset_dominance_unoptimized():
    cfg = AlignmentRunConfig(rows=64, cols=2048, fragment_len=300,
                             pattern_len=50, n_patterns=1, seed=21,
                             policy="naive", mutation_rate=0.0)
    _, ledger, _ = kernels.run_alignment_workload(cfg)
    e_share = ledger.preset_energy_j() / ledger.total_energy_j
    l_share = ledger.preset_latency_s() / ledger.total_latency_s
    w = ledger.entries[Stage.WRITE_PATTERNS]
    w_e = w.energy_j / ledger.total_energy_j
    w_l = w.latency_s / ledger.total_latency_s
    assert l_share > 0.90, l_share
    assert 0.30 <= e_share <= 0.60, e_share
    assert w_e < 0.01 and w_l < 0.01, (w_e, w_l)
    _report(7, f"unoptimized run: preset latency {l_share:.2%}, preset energy "
               f"{e_share:.2%}, writes {max(w_e, w_l):.3%}")


# -- 8: preset coalescing invariants ---------------------------------------------------

def test_c08_preset_coalescing_energy_and_latency():
    rows = 32
    base = AlignmentRunConfig(rows=rows, cols=2048, fragment_len=100,
                              pattern_len=20, n_patterns=2, seed=31,
                              policy="naive", mutation_rate=0.01)
    rec_row, led_row, _ = kernels.run_alignment_workload(base)
    rec_gang, led_gang, _ = kernels.run_alignment_workload(
        base.replace(policy="naive_opt"))
    assert rec_row == rec_gang
    assert led_row.total_energy_j == led_gang.total_energy_j   # exact identity
    factor = led_row.preset_latency_s() / led_gang.preset_latency_s()
    assert abs(factor - rows) <= 0.1 * rows, factor

    # program-level pass: fusing full-column preset sweeps preserves state
    rng = np.random.default_rng(2)
    prog = []
    for col, val in ((5, 0), (6, 1)):
        prog += [isa.MicroInstruction("preset_row", (col,), row=r, value=val)
                 for r in range(8)]
        prog.append(isa.MicroInstruction("nor" if val == 0 else "maj3",
                                         (col, 0, 1) if val == 0 else (col, 0, 1, 2)))
    fused = scheduler.coalesce_presets(prog, rows=8)
    assert sum(1 for m in fused if m.op == "preset_gang") == 2
    for _ in range(50):
        init = rng.integers(0, 2, size=(8, 16), dtype=np.uint8)
        a1 = ArrayState(8, 16, profile=NEAR)
        a2 = ArrayState(8, 16, profile=NEAR)
        a1.cells[:] = init.copy()
        a2.cells[:] = init.copy()
        isa.smc_run(prog, a1)
        isa.smc_run(fused, a2)
        assert np.array_equal(a1.cells, a2.cells)
    _report(8, f"energy identical, preset latency factor {factor:.2f} "
               f"(rows={rows}), 50/50 differential states equal")


# -- 9: policy monotonicity -------------------------------------------------------------

def test_c09_policy_throughput_monotonicity():
    for seed in (41, 42, 43):
        cfg = AlignmentRunConfig(rows=16, cols=2048, fragment_len=160,
                                 pattern_len=40, n_patterns=10, seed=seed,
                                 policy="naive_opt", mutation_rate=0.03)
        rec_n, led_n, n = kernels.run_alignment_workload(cfg)
        rec_o, led_o, _ = kernels.run_alignment_workload(
            cfg.replace(policy="oracular_opt"))
        tp_n = perf.throughput(led_n, n).match_rate_per_s
        tp_o = perf.throughput(led_o, n).match_rate_per_s
        assert tp_o > tp_n, (seed, tp_o, tp_n)

        def best(records):
            out = {}
            for r in records:
                out[r.pattern_id] = max(out.get(r.pattern_id, -1), r.score)
            return out

        assert best(rec_n) == best(rec_o), seed
    _report(9, f"oracular/naive match-rate ratio {tp_o / tp_n:.1f}x on the last "
               "workload; best-score sets identical on all three")


# -- 10: technology sensitivity ----------------------------------------------------------

def test_c10_technology_throughput_ratio():
    cfg = AlignmentRunConfig(rows=16, cols=2048, fragment_len=300,
                             pattern_len=50, n_patterns=8, seed=51,
                             policy="oracular_opt", mutation_rate=0.02)
    _, led_near, n = kernels.run_alignment_workload(cfg)
    _, led_long, _ = kernels.run_alignment_workload(cfg.replace(profile="long_term"))
    ratio = (perf.throughput(led_long, n).match_rate_per_s
             / perf.throughput(led_near, n).match_rate_per_s)
    assert 1.5 <= ratio <= 3.0, ratio
    _report(10, f"long-term/near-term throughput ratio {ratio:.2f}")


# -- 11: pattern-length sensitivity --------------------------------------------------------

def test_c11_compute_efficiency_decreases_with_pattern_length():
    base = AlignmentRunConfig(rows=2, cols=4096, fragment_len=650,
                              pattern_len=100, n_patterns=1, seed=61,
                              policy="naive_opt", mutation_rate=0.0)
    points = perf.sweep(base, "pattern_len", [100, 200, 300])
    eff = [rep.compute_efficiency for _, rep in points]
    assert eff[0] > eff[1] > eff[2], eff
    _report(11, "compute efficiency strictly decreases: "
                + " > ".join(f"{e:.3e}" for e in eff))


# -- 12: maximum row width ------------------------------------------------------------------

def test_c12_max_row_width_and_delay():
    rep = device.max_row_width(NEAR)
    assert 1000 <= rep.cells <= 4000, rep.cells
    assert 0.017 / 3 <= rep.delay_overhead_fraction <= 0.017 * 3, rep
    _report(12, f"near-term max row width {rep.cells} cells, wire delay "
                f"{rep.delay_overhead_fraction:.4f} of switching time")


# -- 13: bulk bitwise comparability ----------------------------------------------------------

def test_c13_bulk_bitwise_throughput_within_2x():
    reports = perf.bulk_bitwise_bench(NEAR, ops=("not", "or", "nand"),
                                      rows=64, bits=256)
    rates = {op: r.match_rate_per_s for op, r in reports.items()}
    hi, lo = max(rates.values()), min(rates.values())
    assert hi / lo <= 2.0, rates
    _report(13, "NOT/OR/NAND bulk throughputs within "
                f"{hi / lo:.3f}x of each other")


# -- 14: byte-identical reproducibility --------------------------------------------------------

def test_c14_reproducible_outputs(tmp_path):
    from mtjpim.cli import main
    runs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc = main(["align", "--rows", "6", "--cols", "2048",
                   "--fragment-len", "60", "--pattern-len", "12",
                   "--n-patterns", "4", "--policy", "oracular_opt",
                   "--seed", "7", "--out-dir", str(out)])
        assert rc == 0
        runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        rc = main(["variation", "--deltas=-10,0,10", "--out-dir", str(out)])
        assert rc == 0
        runs[-1]["variation.json"] = (out / "variation.json").read_bytes()
    assert runs[0] == runs[1]
    _report(14, f"two seeded runs produced byte-identical artifacts "
                f"({', '.join(sorted(runs[0]))})")
