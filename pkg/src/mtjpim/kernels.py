"""Application kernels: two-phase sliding-window alignment plus the four
benchmark workloads (bit count, string match, stream-cipher XOR, word count).

The alignment maps a long reference onto array rows by folding it into
fragments (with seam replication so patterns straddling a row boundary are
still found), writes one pattern per row per round according to the
scheduling policy, and for every offset runs the match phase (per character:
two 3-step XOR comparisons merged by a NOR) followed by the reduction-tree
score phase, reading out one score per row per iteration (score-buffer mode)
or parking every score in the row (store-all mode).

Byte-character workloads (string match, cipher, word count) reuse the same
machinery with 8-bit cells and an 8-input NOR merge.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import device, gates, isa, scheduler
from .array import ArrayGeometry, ArrayState, RegionLayout
from .perf import Stage, StageLedger
from .profiles import TechnologyProfile, shipped_profile

__all__ = [
    "KernelError",
    "DNA_ALPHABET",
    "encode_text",
    "decode_text",
    "ScoreRecord",
    "FoldedReference",
    "layout_reference",
    "sliding_scores",
    "exact_best_rows",
    "run_alignment",
    "AlignmentRunConfig",
    "generate_workload",
    "run_alignment_workload",
    "kernel_bitcount",
    "kernel_stringmatch",
    "kernel_rc4",
    "kernel_wordcount",
    "rc4_keystream",
    "read_fasta",
    "read_sequences",
    "records_to_csv",
]


class KernelError(ValueError):
    pass


# -- encodings -----------------------------------------------------------------

DNA_ALPHABET = "ACGT"   # A=00, C=01, G=10, T=11 (high bit first)
_DNA_CODE = {c: i for i, c in enumerate(DNA_ALPHABET)}


def _char_codes(s: str, char_bits: int) -> np.ndarray:
    if char_bits == 2:
        try:
            return np.array([_DNA_CODE[c] for c in s], dtype=np.uint8)
        except KeyError as e:
            raise KernelError(f"not a DNA character: {e}") from None
    if char_bits == 8:
        return np.frombuffer(s.encode("latin-1"), dtype=np.uint8).copy()
    raise KernelError(f"unsupported character width {char_bits}")


def encode_text(s: str, char_bits: int = 2) -> np.ndarray:
    """Bit array (high bit of each character first) for array storage."""
    codes = _char_codes(s, char_bits)
    bits = np.zeros(len(codes) * char_bits, dtype=np.uint8)
    for b in range(char_bits):
        bits[b::char_bits] = (codes >> (char_bits - 1 - b)) & 1
    return bits


def decode_text(bits: Sequence[int], char_bits: int = 2) -> str:
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) % char_bits:
        raise KernelError("bit string length not a multiple of the character width")
    codes = np.zeros(len(bits) // char_bits, dtype=np.intp)
    for b in range(char_bits):
        codes = (codes << 1) | bits[b::char_bits]
    if char_bits == 2:
        return "".join(DNA_ALPHABET[c] for c in codes)
    return bytes(int(c) for c in codes).decode("latin-1")


# -- reference folding ------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ScoreRecord:
    """Similarity score of one evaluated (pattern, row, offset) alignment."""

    pattern_id: int
    row: int          # global row index: array * rows + row
    loc: int          # alignment offset within the fragment
    score: int


@dataclass(frozen=True)
class FoldedReference:
    """The reference folded over rows, with seam replication.

    Consecutive fragments overlap by ``overlap`` characters so an alignment
    straddling a row boundary is fully contained in the next row.
    """

    fragments: tuple[str, ...]
    overlap: int
    geometry: ArrayGeometry

    def __post_init__(self):
        if len(self.fragments) > self.geometry.arrays * self.geometry.rows:
            raise KernelError("more fragments than rows in the geometry")

    def reconstruct(self) -> str:
        parts = [self.fragments[0]] if self.fragments else []
        parts += [f[self.overlap:] for f in self.fragments[1:]]
        return "".join(parts)

    def row_location(self, global_row: int) -> tuple[int, int]:
        return divmod(global_row, self.geometry.rows)


def layout_reference(reference: str, fragment_len: int,
                     geometry: ArrayGeometry, pattern_len: int,
                     char_bits: int = 2, overlap: int | None = None,
                     output_mode: str = "score_buffer"
                     ) -> tuple[FoldedReference, RegionLayout]:
    """Fold the reference into per-row fragments and size the compartments.

    The default overlap of pattern_len - 1 characters guarantees seam
    coverage. Shorter fragments occupy more rows. The returned layout places
    fragment, pattern, score and scratch compartments; the score compartment
    holds one score (score-buffer mode) or one per alignment (store-all).
    """
    if pattern_len < 1:
        raise KernelError("pattern must not be empty")
    if fragment_len < pattern_len:
        raise KernelError(
            f"fragment length {fragment_len} shorter than pattern {pattern_len}")
    if overlap is None:
        overlap = pattern_len - 1
    if not 0 <= overlap < fragment_len:
        raise KernelError("overlap must lie in [0, fragment_len)")
    stride = fragment_len - overlap
    if len(reference) <= fragment_len:
        fragments = [reference]
    else:
        fragments = [reference[s:s + fragment_len]
                     for s in range(0, len(reference) - overlap, stride)]
    total_rows = geometry.arrays * geometry.rows
    if len(fragments) > total_rows:
        raise KernelError(
            f"reference needs {len(fragments)} rows, geometry offers {total_rows}")

    n_align = fragment_len - pattern_len + 1
    score_w = gates.score_width(pattern_len)
    score_cells = score_w * (n_align if output_mode == "store_all" else 1)
    f_stop = fragment_len * char_bits
    p_stop = f_stop + pattern_len * char_bits
    s_stop = p_stop + score_cells
    scratch_cells = (3 * char_bits + pattern_len
                     + gates.tree_scratch_cells(pattern_len))
    layout = RegionLayout(fragment=(0, f_stop), pattern=(f_stop, p_stop),
                          score=(p_stop, s_stop),
                          scratch=(s_stop, s_stop + scratch_cells))
    if layout.cols_needed > geometry.cols:
        raise KernelError(
            f"layout needs {layout.cols_needed} columns, geometry has {geometry.cols}")
    layout.validate(geometry.cols, pattern_len)
    folded = FoldedReference(tuple(fragments), overlap, geometry)
    return folded, layout


# -- software oracle ---------------------------------------------------------------

def sliding_scores(fragment: str, pattern: str, char_bits: int = 2) -> np.ndarray:
    """Character-match counts of the pattern at every offset of the fragment.

    Independent of the array path: a direct windowed character comparison.
    """
    f = _char_codes(fragment, char_bits)
    p = _char_codes(pattern, char_bits)
    if len(f) < len(p):
        return np.zeros(0, dtype=np.intp)
    windows = np.lib.stride_tricks.sliding_window_view(f, len(p))
    return (windows == p).sum(axis=1)


def exact_best_rows(folded: FoldedReference, patterns: Sequence[str],
                    char_bits: int = 2) -> Callable[[int], list[int]]:
    """Perfect-information oracle: global rows reaching each pattern's best score."""
    best: dict[int, list[int]] = {}
    for pid, pat in enumerate(patterns):
        per_row = []
        for g, frag in enumerate(folded.fragments):
            s = sliding_scores(frag, pat, char_bits)
            per_row.append(int(s.max()) if len(s) else -1)
        top = max(per_row)
        best[pid] = [g for g, v in enumerate(per_row) if v == top]
    return lambda pid: best[pid]


# -- the alignment runner -------------------------------------------------------------

_POLICIES = ("naive", "naive_opt", "oracular", "oracular_opt", "kmer", "kmer_opt")


def _make_schedule(policy: str, folded: FoldedReference,
                   patterns: Sequence[str], char_bits: int,
                   oracle=None, kmer_k: int = 12) -> scheduler.ScheduleAssignment:
    base = policy.removesuffix("_opt")
    if base == "naive":
        return scheduler.schedule_naive(patterns, folded.geometry)
    if base == "oracular":
        if oracle is None:
            oracle = exact_best_rows(folded, patterns, char_bits)
        return scheduler.schedule_oracular(patterns, folded.geometry, oracle)
    if base == "kmer":
        index = scheduler.build_kmer_index(folded.fragments, folded.geometry, kmer_k)
        return scheduler.kmer_schedule(patterns, index, folded.geometry)
    raise KernelError(f"unknown policy {policy!r} (use one of {_POLICIES})")


def run_alignment(folded: FoldedReference, layout: RegionLayout,
                  patterns: Sequence[str], profile: TechnologyProfile,
                  policy: str = "naive", output_mode: str = "score_buffer",
                  char_bits: int = 2, *, oracle=None, kmer_k: int = 12,
                  strict: bool = True
                  ) -> tuple[list[ScoreRecord], StageLedger]:
    """Run the two-phase matching for a whole pattern pool under a policy.

    Returns one ScoreRecord per evaluated (pattern, row, offset) plus the
    merged per-stage ledger. Policies ending in ``_opt`` use gang presets;
    the others preset row by row.
    """
    if output_mode not in ("score_buffer", "store_all"):
        raise KernelError(f"unknown output mode {output_mode!r}")
    if not patterns:
        raise KernelError("no patterns to schedule")
    plen = len(patterns[0])
    if any(len(p) != plen for p in patterns):
        raise KernelError("patterns must share one length")
    preset_mode = "gang" if policy.endswith("_opt") else "rowwise"
    schedule = _make_schedule(policy, folded, patterns, char_bits, oracle, kmer_k)

    plan = isa.plan_alignment(layout, plen, char_bits)
    geometry = folded.geometry
    score_w = gates.score_width(plen)
    n_align = plan.max_alignments()
    frag_of_global = dict(enumerate(folded.fragments))

    records: list[ScoreRecord] = []
    ledgers: list[StageLedger] = []
    gate_cache: dict[str, device.GateSpec] = {}
    t_write_access = (profile.write_latency_s
                      + profile.periphery.write_access().latency_s)

    # Per-offset tree sequences: in store-all mode the final sums land in the
    # per-offset score slot, otherwise every offset reuses the same slot.
    if output_mode == "score_buffer":
        trees = [plan.tree] * n_align
    else:
        trees = []
        for loc in range(n_align):
            base = layout.score[0] + loc * score_w
            mapping = {layout.score[0] + i: base + i for i in range(score_w)}
            trees.append(gates.retarget(plan.tree, mapping))

    for a in range(geometry.arrays):
        rows_here = {g - a * geometry.rows: g
                     for g in frag_of_global
                     if a * geometry.rows <= g < (a + 1) * geometry.rows}
        if not rows_here:
            continue
        ledger = StageLedger()
        arr = ArrayState(geometry.rows, geometry.cols, profile=profile,
                         layout=layout, ledger=ledger, strict=strict)
        for r, g in rows_here.items():
            arr.write_bits(r, layout.fragment[0],
                           encode_text(frag_of_global[g], char_bits),
                           stage=Stage.WRITE_PATTERNS)

        for rnd in range(schedule.n_rounds):
            assigns = {loc[1]: pid
                       for loc, pid in schedule.round_assignments(rnd).items()
                       if loc[0] == a}
            assigns = {r: pid for r, pid in assigns.items() if r in rows_here}
            if not assigns:
                continue
            for r, pid in sorted(assigns.items()):
                arr.write_bits(r, layout.pattern[0],
                               encode_text(patterns[pid], char_bits),
                               stage=Stage.WRITE_PATTERNS)
            if not policy.startswith("naive"):
                # Scheduling decisions: energy always accounted, latency only
                # beyond what the pattern writes already mask.
                n_dec = len(assigns)
                t_sched = n_dec * profile.schedule_decision_latency_s
                t_masked = n_dec * t_write_access
                ledger.add(Stage.SCHEDULE_OVERHEAD,
                           n_dec * profile.schedule_decision_energy_j,
                           max(0.0, t_sched - t_masked), ops=n_dec)

            weights = 1 << np.arange(score_w)
            assign_list = sorted(assigns.items())
            trusted = False
            for loc in range(n_align):
                gates.execute_sequence(
                    isa.match_phase_steps(plan, loc), arr,
                    preset_mode=preset_mode, preset_stage=Stage.PRESET_MATCH,
                    gate_stage=Stage.MATCH_OPS, gate_cache=gate_cache,
                    trusted=trusted)
                gates.execute_sequence(
                    trees[loc], arr,
                    preset_mode=preset_mode, preset_stage=Stage.PRESET_SCORE,
                    gate_stage=Stage.ADD_OPS, gate_cache=gate_cache,
                    trusted=trusted)
                trusted = output_mode == "score_buffer"
                if output_mode == "score_buffer":
                    block = arr.read_block(layout.score[0], score_w,
                                           stage=Stage.SCORE_READOUT)
                    scores = block @ weights
                    for r, pid in assign_list:
                        frag = frag_of_global[rows_here[r]]
                        if loc <= len(frag) - plen:
                            records.append(ScoreRecord(pid, rows_here[r], loc,
                                                       int(scores[r])))
            if output_mode == "store_all":
                block = arr.read_block(layout.score[0], score_w * n_align,
                                       stage=Stage.SCORE_READOUT)
                weights = 1 << np.arange(score_w)
                for loc in range(n_align):
                    seg = block[:, loc * score_w:(loc + 1) * score_w]
                    scores = seg @ weights
                    for r, pid in sorted(assigns.items()):
                        frag = frag_of_global[rows_here[r]]
                        if loc <= len(frag) - plen:
                            records.append(ScoreRecord(pid, rows_here[r], loc,
                                                       int(scores[r])))
        ledgers.append(ledger)

    total = StageLedger().merge(ledgers)
    records.sort(key=lambda rec: (rec.pattern_id, rec.row, rec.loc))
    return records, total


def alignment_step_law(pattern_len: int, fragment_len: int,
                       char_bits: int = 2) -> dict[str, int]:
    """Closed-form per-pass operation counts for one row's full sweep.

    Per alignment the match phase spends pattern_len * (3 * char_bits + 1)
    logic steps (char_bits XOR triples plus the merge gate) and the score
    phase 4 adder steps per 1-bit adder invocation; every logic step has
    exactly one preset cell, plus the tree's constant-zero column.
    """
    n_align = fragment_len - pattern_len + 1
    match_steps = pattern_len * (3 * char_bits + 1)
    tree_steps = (4 * gates.tree_adder_count(pattern_len)
                  if pattern_len > 1 else 1)
    per_align = match_steps + tree_steps
    return {
        "alignments": n_align,
        "match_steps_per_alignment": match_steps,
        "tree_steps_per_alignment": tree_steps,
        "logic_steps_per_alignment": per_align,
        "preset_cells_per_alignment": per_align + 1,   # + the tree's zero cell
        "total_logic_steps": n_align * per_align,
    }


# -- generated workloads ------------------------------------------------------------

@dataclass(frozen=True)
class AlignmentRunConfig:
    """Seeded, self-contained description of one alignment experiment."""

    profile: str = "near_term"
    arrays: int = 1
    rows: int = 16
    cols: int = 4096
    fragment_len: int = 300
    pattern_len: int = 50
    n_patterns: int = 8
    mutation_rate: float = 0.02
    policy: str = "oracular_opt"
    output_mode: str = "score_buffer"
    seed: int = 1
    kmer_k: int = 12
    sample_mode: str = "spread"   # spread: pattern i from row i's span; uniform
    reference: str | None = None
    patterns: tuple[str, ...] | None = None

    def replace(self, **kw) -> "AlignmentRunConfig":
        # Changing the workload shape invalidates any explicit sequences.
        if {"pattern_len", "fragment_len", "rows", "arrays", "seed"} & kw.keys():
            kw.setdefault("reference", None)
            kw.setdefault("patterns", None)
        return dataclasses.replace(self, **kw)


def _random_dna(rng: np.random.Generator, n: int) -> str:
    return "".join(DNA_ALPHABET[i] for i in rng.integers(0, 4, size=n))


def mutate(pattern: str, rate: float, rng: np.random.Generator,
           alphabet: str = DNA_ALPHABET) -> str:
    out = list(pattern)
    for i in range(len(out)):
        if rng.random() < rate:
            out[i] = alphabet[rng.integers(0, len(alphabet))]
    return "".join(out)


def generate_workload(cfg: AlignmentRunConfig) -> tuple[str, tuple[str, ...]]:
    """Reference and patterns for a config: patterns are mutated samples of
    the reference, drawn from evenly spread positions."""
    rng = np.random.default_rng(cfg.seed)
    total_rows = cfg.arrays * cfg.rows
    stride = cfg.fragment_len - (cfg.pattern_len - 1)
    ref_len = stride * (total_rows - 1) + cfg.fragment_len
    reference = cfg.reference or _random_dna(rng, ref_len)
    if cfg.patterns is not None:
        return reference, cfg.patterns
    patterns = []
    for i in range(cfg.n_patterns):
        if cfg.sample_mode == "spread":
            # One pattern per row span keeps oracular rounds short and makes
            # every position (including row seams) reachable.
            r = i % total_rows
            lo = r * stride
            hi = min(lo + stride, len(reference) - cfg.pattern_len + 1)
            pos = int(rng.integers(lo, max(hi, lo + 1)))
        else:
            pos = int(rng.integers(0, len(reference) - cfg.pattern_len + 1))
        patterns.append(mutate(reference[pos:pos + cfg.pattern_len],
                               cfg.mutation_rate, rng))
    return reference, tuple(patterns)


def run_alignment_workload(cfg: AlignmentRunConfig
                           ) -> tuple[list[ScoreRecord], StageLedger, int]:
    profile = shipped_profile(cfg.profile)
    reference, patterns = generate_workload(cfg)
    geometry = ArrayGeometry(cfg.arrays, cfg.rows, cfg.cols)
    folded, layout = layout_reference(reference, cfg.fragment_len, geometry,
                                      cfg.pattern_len,
                                      output_mode=cfg.output_mode)
    records, ledger = run_alignment(folded, layout, patterns, profile,
                                    policy=cfg.policy,
                                    output_mode=cfg.output_mode,
                                    kmer_k=cfg.kmer_k)
    return records, ledger, len(patterns)


# -- benchmark kernels ----------------------------------------------------------------

def kernel_bitcount(vectors: Sequence[int], width: int = 32,
                    profile: TechnologyProfile | None = None
                    ) -> tuple[list[int], StageLedger]:
    """Count the ones of each fixed-width vector, all rows in parallel."""
    profile = profile or shipped_profile("near_term")
    if not vectors:
        raise KernelError("no vectors")
    if any(v < 0 or v >= (1 << width) for v in vectors):
        raise KernelError(f"vectors must fit {width} bits")
    rows = len(vectors)
    score_w = gates.score_width(width)
    scratch = gates.tree_scratch_cells(width)
    cols = width + score_w + scratch
    ledger = StageLedger()
    arr = ArrayState(rows, cols, profile=profile, ledger=ledger)
    for r, v in enumerate(vectors):
        arr.write_bits(r, 0, [(v >> i) & 1 for i in range(width)],
                       stage=Stage.WRITE_PATTERNS)
    tree = gates.reduction_tree(list(range(width)), width + score_w,
                                list(range(width, width + score_w)),
                                scratch_stop=cols)
    gates.execute_sequence(tree, arr, preset_mode="gang",
                           preset_stage=Stage.PRESET_SCORE,
                           gate_stage=Stage.ADD_OPS)
    block = arr.read_block(width, score_w, stage=Stage.SCORE_READOUT)
    weights = 1 << np.arange(score_w)
    return [int(x) for x in block @ weights], ledger


def kernel_stringmatch(words: Sequence[str], query: str,
                       profile: TechnologyProfile | None = None,
                       rows: int | None = None
                       ) -> tuple[int, list[ScoreRecord], StageLedger]:
    """Count exact occurrences of a query string across corpus words.

    One word per row (8-bit characters); every in-word offset is scored, and
    an occurrence is a window matching on all characters.
    """
    profile = profile or shipped_profile("near_term")
    if not words:
        raise KernelError("empty corpus")
    if not query:
        raise KernelError("empty query")
    seg_len = max(max(len(w) for w in words), len(query))
    rows = rows or len(words)
    if len(words) > rows:
        raise KernelError("more words than rows")
    padded = tuple(w.ljust(seg_len, "\x00") for w in words)
    geometry = ArrayGeometry(1, rows, _byte_cols(seg_len, len(query)))
    folded = FoldedReference(padded, 0, geometry)
    _, layout = layout_reference("x" * seg_len, seg_len, geometry, len(query),
                                 char_bits=8, overlap=0)
    records, ledger = run_alignment(folded, layout, [query], profile,
                                    policy="naive_opt", char_bits=8)
    # Windows that slide into a word's padding are not real occurrences.
    hits = sum(1 for rec in records
               if rec.score == len(query)
               and rec.loc + len(query) <= len(words[rec.row]))
    return hits, records, ledger


def _byte_cols(seg_len: int, qlen: int) -> int:
    return (8 * seg_len + 8 * qlen + gates.score_width(qlen)
            + 24 + qlen + gates.tree_scratch_cells(qlen) + 8)


def rc4_keystream(key: bytes, n: int) -> bytes:
    """Classic RC4 key schedule + PRGA, host side."""
    if not key:
        raise KernelError("empty cipher key")
    s = list(range(256))
    j = 0
    for i in range(256):
        j = (j + s[i] + key[i % len(key)]) % 256
        s[i], s[j] = s[j], s[i]
    out = bytearray()
    i = j = 0
    for _ in range(n):
        i = (i + 1) % 256
        j = (j + s[i]) % 256
        s[i], s[j] = s[j], s[i]
        out.append(s[(s[i] + s[j]) % 256])
    return bytes(out)


def kernel_rc4(text: bytes, key: bytes,
               profile: TechnologyProfile | None = None,
               bytes_per_row: int = 16) -> tuple[bytes, StageLedger]:
    """Stream-cipher pass: XOR the keystream into the text, rows in parallel."""
    profile = profile or shipped_profile("near_term")
    if not text:
        raise KernelError("empty text")
    ks = rc4_keystream(key, len(text))
    rows = -(-len(text) // bytes_per_row)
    w = 8 * bytes_per_row
    cols = 3 * w + 2
    ledger = StageLedger()
    arr = ArrayState(rows, cols, profile=profile, ledger=ledger)

    def bits_of(chunk: bytes) -> list[int]:
        return [(byte >> (7 - b)) & 1 for byte in chunk for b in range(8)]

    for r in range(rows):
        t = text[r * bytes_per_row:(r + 1) * bytes_per_row]
        k = ks[r * bytes_per_row:(r + 1) * bytes_per_row]
        arr.write_bits(r, 0, bits_of(t), stage=Stage.WRITE_PATTERNS)
        arr.write_bits(r, w, bits_of(k), stage=Stage.WRITE_PATTERNS)
    s1, s2 = 3 * w, 3 * w + 1
    for i in range(w):
        seq = gates.xor_sequence(i, w + i, s1, s2, 2 * w + i)
        gates.execute_sequence(seq, arr, preset_mode="gang",
                               preset_stage=Stage.PRESET_MATCH,
                               gate_stage=Stage.MATCH_OPS)
    out = bytearray()
    for r in range(rows):
        n_bytes = min(bytes_per_row, len(text) - r * bytes_per_row)
        bits = arr.read_bits(r, 2 * w, 8 * n_bytes, stage=Stage.SCORE_READOUT)
        for i in range(n_bytes):
            out.append(int("".join(str(b) for b in bits[8 * i:8 * i + 8]), 2))
    return bytes(out), ledger


def kernel_wordcount(words: Sequence[str], queries: Sequence[str],
                     profile: TechnologyProfile | None = None
                     ) -> tuple[dict[str, int], StageLedger]:
    """Occurrence count of each query word over the corpus words.

    Words and queries are padded to a common width, so word equality is a
    single full-width alignment whose score reaches the padded length.
    """
    profile = profile or shipped_profile("near_term")
    if not words or not queries:
        raise KernelError("need corpus words and query words")
    w_len = max(max(len(w) for w in words), max(len(q) for q in queries))
    padded_words = tuple(w.ljust(w_len, "\x00") for w in words)
    padded_queries = [q.ljust(w_len, "\x00") for q in queries]
    geometry = ArrayGeometry(1, len(words), _byte_cols(w_len, w_len))
    folded = FoldedReference(padded_words, 0, geometry)
    _, layout = layout_reference("x" * w_len, w_len, geometry, w_len,
                                 char_bits=8, overlap=0)
    records, ledger = run_alignment(folded, layout, padded_queries, profile,
                                    policy="naive_opt", char_bits=8)
    counts = {q: 0 for q in queries}
    for rec in records:
        if rec.score == w_len:   # every padded character matched: equal words
            counts[queries[rec.pattern_id]] += 1
    return counts, ledger


# -- ingestion / emission ----------------------------------------------------------

def read_fasta(path: str | Path) -> list[tuple[str, str]]:
    entries: list[tuple[str, list[str]]] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            entries.append((line[1:].strip(), []))
        else:
            if not entries:
                entries.append(("", []))
            entries[-1][1].append(line.upper())
    return [(name, "".join(chunks)) for name, chunks in entries]


def read_sequences(path: str | Path) -> list[str]:
    """Sequences from a FASTA file or one-per-line plain text."""
    text = Path(path).read_text()
    if text.lstrip().startswith(">"):
        return [seq for _, seq in read_fasta(path)]
    return [line.strip().upper() for line in text.splitlines() if line.strip()]


def records_to_csv(records: Sequence[ScoreRecord]) -> str:
    lines = ["pattern_id,row,loc,score"]
    lines += [f"{r.pattern_id},{r.row},{r.loc},{r.score}" for r in records]
    return "\n".join(lines) + "\n"
