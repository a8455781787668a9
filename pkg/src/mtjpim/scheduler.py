"""Program-level preset coalescing and pattern-to-row scheduling policies.

``coalesce_presets`` rewrites a micro program so that full-column row-by-row
preset sweeps become single gang presets: the same cells are preset (energy
is unchanged to the last bit) while the preset latency drops by the row
count.

Scheduling policies decide which pattern each row matches in each round:
``naive`` broadcasts one pattern at a time to every row of every array,
``oracular`` uses a perfect-information oracle to send each pattern only to
its best rows, and ``kmer`` approximates the oracle with exact k-mer seed
hits against an index of the folded reference.
"""

from __future__ import annotations

import hashlib
import json
import pickle
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .array import ArrayGeometry
from .isa import MicroInstruction

__all__ = [
    "SchedulerError",
    "ScheduleAssignment",
    "coalesce_presets",
    "schedule_naive",
    "schedule_oracular",
    "KmerIndex",
    "build_kmer_index",
    "kmer_schedule",
    "save_kmer_index",
    "load_kmer_index",
    "kmer_cache_file",
]


class SchedulerError(ValueError):
    pass


# -- preset coalescing ---------------------------------------------------------

def coalesce_presets(program: Sequence[MicroInstruction],
                     rows: int) -> list[MicroInstruction]:
    """Fuse row-wise preset sweeps of whole columns into gang presets.

    A maximal run of consecutive ``preset_row`` micros that covers every row
    with the same columns and value writes exactly the cells of one gang
    preset, so the replacement preserves semantics bit for bit and the total
    count of preset cell-writes. Programs with no such runs come back
    unchanged.
    """
    out: list[MicroInstruction] = []
    i = 0
    n = len(program)
    while i < n:
        m = program[i]
        if m.op != "preset_row":
            out.append(m)
            i += 1
            continue
        j = i
        seen_rows = set()
        while (j < n and program[j].op == "preset_row"
               and program[j].cols == m.cols and program[j].value == m.value
               and program[j].row not in seen_rows):
            seen_rows.add(program[j].row)
            j += 1
        if seen_rows == set(range(rows)):
            out.append(MicroInstruction("preset_gang", m.cols, value=m.value,
                                        stage=m.stage))
        else:
            out.extend(program[i:j])
        i = j
    return out


# -- schedule assignments --------------------------------------------------------

@dataclass(frozen=True)
class ScheduleAssignment:
    """Ordered queue of pattern ids per (array, row); one entry per round."""

    policy: str
    geometry: ArrayGeometry
    queues: Mapping[tuple[int, int], tuple[int, ...]]

    @property
    def n_rounds(self) -> int:
        return max((len(q) for q in self.queues.values()), default=0)

    def round_assignments(self, rnd: int) -> dict[tuple[int, int], int]:
        return {loc: q[rnd] for loc, q in self.queues.items() if rnd < len(q)}

    def pairs(self) -> set[tuple[int, tuple[int, int]]]:
        return {(pid, loc) for loc, q in self.queues.items() for pid in q}

    def to_json(self, indent: int = 2) -> str:
        body = {
            "policy": self.policy,
            "geometry": {"arrays": self.geometry.arrays,
                         "rows": self.geometry.rows,
                         "cols": self.geometry.cols},
            "rounds": self.n_rounds,
            "queues": {f"{a}:{r}": list(q)
                       for (a, r), q in sorted(self.queues.items())},
        }
        return json.dumps(body, indent=indent, sort_keys=True)


def _check_no_duplicates(queues: dict) -> None:
    for loc, q in queues.items():
        if len(set(q)) != len(q):
            raise SchedulerError(f"duplicate pattern for row {loc}")


def schedule_naive(pool: Sequence, geometry: ArrayGeometry) -> ScheduleAssignment:
    """Broadcast schedule: round i sends pattern i to every row of every array."""
    if len(pool) == 0:
        raise SchedulerError("empty pattern pool")
    order = tuple(range(len(pool)))
    queues = {(a, r): order
              for a in range(geometry.arrays) for r in range(geometry.rows)}
    return ScheduleAssignment("naive", geometry, queues)


def schedule_oracular(pool: Sequence, geometry: ArrayGeometry,
                      oracle: Callable[[int], Sequence[int]]) -> ScheduleAssignment:
    """Perfect-information schedule: each pattern goes only to oracle rows.

    The oracle maps a pattern index to the global row indices worth matching
    (at desk scale, the argmax rows of an exact software aligner). Ties break
    toward the lowest (array, row) index; queues stay deterministic.
    """
    if len(pool) == 0:
        raise SchedulerError("empty pattern pool")
    queues: dict[tuple[int, int], list[int]] = {
        (a, r): [] for a in range(geometry.arrays) for r in range(geometry.rows)}
    for pid in range(len(pool)):
        rows = oracle(pid)
        if rows is None or len(rows) == 0:
            raise SchedulerError(f"oracle returned no rows for pattern {pid}")
        for g in sorted(set(rows)):
            loc = divmod(int(g), geometry.rows)
            if loc not in queues:
                raise SchedulerError(f"oracle row {g} outside geometry")
            queues[loc].append(pid)
    frozen = {loc: tuple(q) for loc, q in queues.items()}
    _check_no_duplicates(frozen)
    return ScheduleAssignment("oracular", geometry, frozen)


# -- k-mer filtering --------------------------------------------------------------

@dataclass(frozen=True)
class KmerIndex:
    """Exact k-mer locations over the folded reference fragments."""

    k: int
    reference_digest: str
    locations: Mapping[str, tuple[tuple[int, int, int], ...]]  # (array,row,offset)

    def lookup(self, kmer: str) -> tuple[tuple[int, int, int], ...]:
        return self.locations.get(kmer, ())


def build_kmer_index(fragments: Sequence[str], geometry: ArrayGeometry,
                     k: int) -> KmerIndex:
    """Index every full k-mer of every fragment, once per occurrence."""
    if k < 1:
        raise SchedulerError("k must be >= 1")
    locs: dict[str, list[tuple[int, int, int]]] = {}
    for g, frag in enumerate(fragments):
        a, r = divmod(g, geometry.rows)
        for off in range(len(frag) - k + 1):
            locs.setdefault(frag[off:off + k], []).append((a, r, off))
    digest = hashlib.sha256("\x1f".join(fragments).encode()).hexdigest()[:16]
    return KmerIndex(k, digest, {km: tuple(v) for km, v in locs.items()})


def kmer_schedule(pool: Sequence[str], index: KmerIndex,
                  geometry: ArrayGeometry,
                  seed_positions: Sequence[int] = (0,),
                  fallback_broadcast: bool = True) -> ScheduleAssignment:
    """Assign each pattern to rows holding an exact k-mer hit of its seeds.

    Patterns with no hit anywhere are routed to a full-broadcast round (every
    row) when ``fallback_broadcast`` is set, so no pattern goes unevaluated.
    """
    if len(pool) == 0:
        raise SchedulerError("empty pattern pool")
    queues: dict[tuple[int, int], list[int]] = {
        (a, r): [] for a in range(geometry.arrays) for r in range(geometry.rows)}
    for pid, pattern in enumerate(pool):
        if index.k > len(pattern):
            raise SchedulerError(
                f"k={index.k} longer than pattern {pid} ({len(pattern)} chars)")
        hits: set[tuple[int, int]] = set()
        for pos in seed_positions:
            if pos + index.k > len(pattern):
                continue
            for a, r, _off in index.lookup(pattern[pos:pos + index.k]):
                hits.add((a, r))
        if not hits:
            if not fallback_broadcast:
                continue
            hits = set(queues.keys())
        for loc in sorted(hits):
            queues[loc].append(pid)
    frozen = {loc: tuple(q) for loc, q in queues.items()}
    _check_no_duplicates(frozen)
    return ScheduleAssignment("kmer", geometry, frozen)


# -- index persistence -------------------------------------------------------------

_CACHE_MAGIC = b"mtjpim-kmer-v1\n"


def kmer_cache_file(directory: str | Path, reference_digest: str, k: int) -> Path:
    return Path(directory) / f"kmer_{reference_digest}_k{k}.bin"


def save_kmer_index(index: KmerIndex, path: str | Path) -> None:
    payload = pickle.dumps(
        {"k": index.k, "digest": index.reference_digest,
         "locations": dict(index.locations)},
        protocol=pickle.HIGHEST_PROTOCOL)
    Path(path).write_bytes(_CACHE_MAGIC + payload)


def load_kmer_index(path: str | Path) -> KmerIndex:
    blob = Path(path).read_bytes()
    if not blob.startswith(_CACHE_MAGIC):
        raise SchedulerError(f"{path}: not a k-mer index cache")
    raw = pickle.loads(blob[len(_CACHE_MAGIC):])
    return KmerIndex(raw["k"], raw["digest"], raw["locations"])
