import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtjpim import isa, kernels
from mtjpim.array import ArrayGeometry, ArrayState
from mtjpim.perf import StageLedger
from mtjpim.scheduler import (
    SchedulerError,
    build_kmer_index,
    coalesce_presets,
    kmer_cache_file,
    kmer_schedule,
    load_kmer_index,
    save_kmer_index,
    schedule_naive,
    schedule_oracular,
)

GEO = ArrayGeometry(1, 4, 64)


# -- coalesce_presets ------------------------------------------------------------

def _rowwise_program(rows):
    steps = []
    for r in range(rows):
        steps.append(isa.MicroInstruction("preset_row", (5,), row=r, value=0))
    steps.append(isa.MicroInstruction("nor", (5, 0, 1)))
    for r in range(rows):
        steps.append(isa.MicroInstruction("preset_row", (6,), row=r, value=1))
    steps.append(isa.MicroInstruction("maj3", (6, 0, 1, 2)))
    return steps


def test_coalesce_replaces_full_sweeps_with_gang(near):
    prog = _rowwise_program(4)
    out = coalesce_presets(prog, rows=4)
    assert [m.op for m in out] == ["preset_gang", "nor", "preset_gang", "maj3"]
    # same columns, same values: identical preset cells
    assert out[0].cols == (5,) and out[0].value == 0


def test_coalesce_preserves_state_on_random_programs(near):
    rng = np.random.default_rng(21)
    rows = 4
    for trial in range(50):
        prog = _rowwise_program(rows)
        fused = coalesce_presets(prog, rows)
        init = rng.integers(0, 2, size=(rows, 16), dtype=np.uint8)
        a1 = ArrayState(rows, 16, profile=near)
        a2 = ArrayState(rows, 16, profile=near)
        a1.cells[:] = init
        a2.cells[:] = init
        isa.smc_run(prog, a1)
        isa.smc_run(fused, a2)
        assert np.array_equal(a1.cells, a2.cells)


def test_coalesce_preserves_preset_cell_count_and_cuts_latency(near):
    rows = 8
    prog = _rowwise_program(rows)
    fused = coalesce_presets(prog, rows)

    def run(p):
        arr = ArrayState(rows, 16, profile=near, ledger=StageLedger())
        isa.smc_run(p, arr)
        return arr.ledger

    l_row, l_gang = run(prog), run(fused)
    # identical cell count x write energy; only float summation order differs
    assert l_row.preset_energy_j() == pytest.approx(l_gang.preset_energy_j(),
                                                    rel=1e-12)
    assert l_gang.total_latency_s < l_row.total_latency_s
    ratio = l_row.preset_latency_s() / l_gang.preset_latency_s()
    assert ratio == pytest.approx(rows, rel=1e-9)


@st.composite
def _preset_logic_programs(draw):
    """Programs of full-column row-wise preset sweeps plus logic on them,
    with valid preset discipline."""
    rows = draw(st.integers(2, 5))
    blocks = draw(st.integers(1, 4))
    prog = []
    free_cols = list(range(4, 14))
    for _ in range(blocks):
        gate = draw(st.sampled_from(["nor", "maj3", "not"]))
        out = draw(st.sampled_from(free_cols))
        val = 0 if gate in ("nor", "not") else 1
        sweep = [isa.MicroInstruction("preset_row", (out,), row=r, value=val)
                 for r in range(rows)]
        if draw(st.booleans()):
            sweep.reverse()   # order within the sweep must not matter
        prog += sweep
        ins = {"nor": (0, 1), "maj3": (0, 1, 2), "not": (0,)}[gate]
        prog.append(isa.MicroInstruction(gate, (out, *ins)))
    return rows, prog


@settings(deadline=None, max_examples=40)
@given(_preset_logic_programs(), st.integers(0, 2 ** 31))
def test_coalesce_semantics_property(rows_prog, seed):
    from mtjpim.profiles import shipped_profile
    near = shipped_profile("near_term")
    rows, prog = rows_prog
    fused = coalesce_presets(prog, rows)

    def preset_cells(ms):
        return sum(len(m.cols) * (rows if m.op == "preset_gang" else 1)
                   for m in ms if m.op.startswith("preset"))

    assert preset_cells(prog) == preset_cells(fused)
    rng = np.random.default_rng(seed)
    init = rng.integers(0, 2, size=(rows, 16), dtype=np.uint8)
    a1 = ArrayState(rows, 16, profile=near)
    a2 = ArrayState(rows, 16, profile=near)
    a1.cells[:] = init.copy()
    a2.cells[:] = init.copy()
    isa.smc_run(prog, a1)
    isa.smc_run(fused, a2)
    assert np.array_equal(a1.cells, a2.cells)


def test_coalesce_leaves_partial_sweeps_alone():
    prog = [isa.MicroInstruction("preset_row", (5,), row=0, value=0),
            isa.MicroInstruction("preset_row", (5,), row=1, value=0)]
    assert coalesce_presets(prog, rows=4) == prog


def test_coalesce_without_presets_is_identity():
    prog = [isa.MicroInstruction("nand", (3, 1, 2))]
    assert coalesce_presets(prog, rows=4) == prog


# -- naive schedule ----------------------------------------------------------------

def test_naive_single_pattern_fills_all_rows():
    s = schedule_naive(["ACGT"], GEO)
    assert s.n_rounds == 1
    assert all(q == (0,) for q in s.queues.values())
    assert len(s.queues) == 4


def test_naive_round_count_is_pool_size():
    for geo in (GEO, ArrayGeometry(2, 8, 64)):
        s = schedule_naive(list("abcdefg"), geo)
        assert s.n_rounds == 7
        for q in s.queues.values():
            assert q == tuple(range(7))


def test_naive_rejects_empty_pool():
    with pytest.raises(SchedulerError):
        schedule_naive([], GEO)


# -- oracular schedule --------------------------------------------------------------

def test_oracular_sends_exact_substring_to_its_row():
    frags = ("AAAACCCC", "GGGGTTTT", "ACACACAC", "TGTGTGTG")
    folded = kernels.FoldedReference(frags, 0, GEO)
    pats = ["GGTT", "ACAC"]
    oracle = kernels.exact_best_rows(folded, pats)
    s = schedule_oracular(pats, GEO, oracle)
    assert s.queues[(0, 1)] == (0,)
    assert 1 in s.queues[(0, 2)]


def test_oracular_miss_raises():
    with pytest.raises(SchedulerError):
        schedule_oracular(["AC"], GEO, lambda pid: [])


def test_naive_pairs_superset_of_oracular():
    frags = ("AAAACCCC", "GGGGTTTT", "ACACACAC", "TGTGTGTG")
    folded = kernels.FoldedReference(frags, 0, GEO)
    pats = ["GGTT", "ACAC", "AAAA"]
    oracle = kernels.exact_best_rows(folded, pats)
    naive_pairs = schedule_naive(pats, GEO).pairs()
    orac_pairs = schedule_oracular(pats, GEO, oracle).pairs()
    assert orac_pairs <= naive_pairs


def test_schedules_are_deterministic():
    frags = ("AAAACCCC", "GGGGTTTT", "ACACACAC", "TGTGTGTG")
    folded = kernels.FoldedReference(frags, 0, GEO)
    pats = ["GGTT", "ACAC"]
    oracle = kernels.exact_best_rows(folded, pats)
    a = schedule_oracular(pats, GEO, oracle)
    b = schedule_oracular(pats, GEO, oracle)
    assert a.to_json() == b.to_json()


# -- k-mer schedule ----------------------------------------------------------------

def test_kmer_full_length_exact_pattern_hits_true_rows():
    frags = ("AAAACCCC", "GGGGTTTT", "ACACACAC", "TGTGTGTG")
    idx = build_kmer_index(frags, GEO, k=4)
    s = kmer_schedule(["GGTT"], idx, GEO, seed_positions=(0,))
    hit_rows = [loc for loc, q in s.queues.items() if q]
    assert hit_rows == [(0, 1)]


def test_kmer_recall_of_true_rows_for_clean_patterns(near):
    rng = np.random.default_rng(3)
    ref = "".join("ACGT"[i] for i in rng.integers(0, 4, 2000))
    geo = ArrayGeometry(1, 17, 4096)
    folded, _ = kernels.layout_reference(ref, 160, geo, 40)
    idx = build_kmer_index(folded.fragments, geo, k=12)
    pats = []
    for i in range(24):
        pos = int(rng.integers(0, len(ref) - 40))
        pats.append(ref[pos:pos + 40])
    oracle = kernels.exact_best_rows(folded, pats)
    s = kmer_schedule(pats, idx, geo)
    recalled = 0
    for pid in range(len(pats)):
        best = set(oracle(pid))
        assigned = {a * geo.rows + r for (a, r), q in s.queues.items() if pid in q}
        if best & assigned:
            recalled += 1
    assert recalled == len(pats)   # mutation-free patterns: full recall


def test_kmer_fallback_broadcast_for_missing_patterns():
    frags = ("AAAAAAAA", "CCCCCCCC", "GGGGGGGG", "TTTTTTTT")
    idx = build_kmer_index(frags, GEO, k=4)
    s = kmer_schedule(["ACGT"], idx, GEO, fallback_broadcast=True)
    assert all(0 in q for q in s.queues.values())   # routed everywhere


def test_kmer_rejects_k_longer_than_pattern():
    frags = ("AAAACCCC",)
    idx = build_kmer_index(frags, GEO, k=6)
    with pytest.raises(SchedulerError):
        kmer_schedule(["ACGT"], idx, GEO)


def test_kmer_index_locations_unique_and_complete():
    frags = ("ACGTAC", "GTACGT")
    idx = build_kmer_index(frags, GEO, k=3)
    total = sum(len(v) for v in idx.locations.values())
    assert total == sum(len(f) - 3 + 1 for f in frags)


def test_kmer_cache_roundtrip(tmp_path):
    frags = ("ACGTACGT", "TTTTACGT")
    idx = build_kmer_index(frags, GEO, k=4)
    path = kmer_cache_file(tmp_path, idx.reference_digest, idx.k)
    save_kmer_index(idx, path)
    back = load_kmer_index(path)
    assert back.k == idx.k
    assert back.reference_digest == idx.reference_digest
    assert back.locations == dict(idx.locations)


def test_kmer_cache_rejects_foreign_files(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"not an index")
    with pytest.raises(SchedulerError):
        load_kmer_index(p)
