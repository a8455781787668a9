"""Stage-resolved energy/latency accounting and derived performance reports.

Every array operation books its cost into one of eight execution stages
(pattern writes, the two preset stages, bitline activation, match and add
compute, score read-out, scheduling overhead). Ledgers merge associatively so
per-array accounting can be combined order-independently.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Stage",
    "STAGES",
    "StageLedger",
    "ThroughputReport",
    "LedgerError",
    "breakdown",
    "throughput",
    "sweep",
    "bulk_bitwise_bench",
]


class LedgerError(ValueError):
    pass


class Stage:
    """Execution stage names for ledger bookkeeping."""

    WRITE_PATTERNS = "write_patterns"
    PRESET_MATCH = "preset_match"
    BITLINE = "bitline"
    MATCH_OPS = "match_ops"
    PRESET_SCORE = "preset_score"
    ADD_OPS = "add_ops"
    SCORE_READOUT = "score_readout"
    SCHEDULE_OVERHEAD = "schedule_overhead"


STAGES: tuple[str, ...] = (
    Stage.WRITE_PATTERNS,
    Stage.PRESET_MATCH,
    Stage.BITLINE,
    Stage.MATCH_OPS,
    Stage.PRESET_SCORE,
    Stage.ADD_OPS,
    Stage.SCORE_READOUT,
    Stage.SCHEDULE_OVERHEAD,
)

PRESET_STAGES = (Stage.PRESET_MATCH, Stage.PRESET_SCORE)


@dataclass
class StageEntry:
    energy_j: float = 0.0
    latency_s: float = 0.0
    ops: int = 0

    def __iadd__(self, other: "StageEntry"):
        self.energy_j += other.energy_j
        self.latency_s += other.latency_s
        self.ops += other.ops
        return self


@dataclass
class StageLedger:
    """Per-stage (energy, latency, op count) accumulators."""

    entries: dict[str, StageEntry] = field(
        default_factory=lambda: {s: StageEntry() for s in STAGES})

    def add(self, stage: str, energy_j: float = 0.0, latency_s: float = 0.0,
            ops: int = 0) -> None:
        if stage not in self.entries:
            raise LedgerError(f"unknown stage {stage!r}")
        if energy_j < 0 or latency_s < 0 or ops < 0:
            raise LedgerError("ledger increments must be >= 0")
        e = self.entries[stage]
        e.energy_j += energy_j
        e.latency_s += latency_s
        e.ops += ops

    # -- aggregation -------------------------------------------------------

    @property
    def total_energy_j(self) -> float:
        return sum(e.energy_j for e in self.entries.values())

    @property
    def total_latency_s(self) -> float:
        return sum(e.latency_s for e in self.entries.values())

    @property
    def total_ops(self) -> int:
        return sum(e.ops for e in self.entries.values())

    def energy_j(self, stage: str) -> float:
        return self.entries[stage].energy_j

    def latency_s(self, stage: str) -> float:
        return self.entries[stage].latency_s

    def ops(self, stage: str) -> int:
        return self.entries[stage].ops

    def preset_energy_j(self) -> float:
        return sum(self.entries[s].energy_j for s in PRESET_STAGES)

    def preset_latency_s(self) -> float:
        return sum(self.entries[s].latency_s for s in PRESET_STAGES)

    def __add__(self, other: "StageLedger") -> "StageLedger":
        out = StageLedger()
        for s in STAGES:
            out.entries[s].energy_j = self.entries[s].energy_j + other.entries[s].energy_j
            out.entries[s].latency_s = self.entries[s].latency_s + other.entries[s].latency_s
            out.entries[s].ops = self.entries[s].ops + other.entries[s].ops
        return out

    def merge(self, others: Iterable["StageLedger"]) -> "StageLedger":
        out = self
        for o in others:
            out = out + o
        return out

    # -- export --------------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            s: {
                "energy_pj": e.energy_j * 1e12,
                "latency_ns": e.latency_s * 1e9,
                "ops": e.ops,
            }
            for s, e in self.entries.items()
        }
        d["total"] = {
            "energy_pj": self.total_energy_j * 1e12,
            "latency_ns": self.total_latency_s * 1e9,
            "ops": self.total_ops,
        }
        return d

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "energy_pj", "latency_ns", "ops"])
        for s in STAGES:
            e = self.entries[s]
            w.writerow([s, repr(e.energy_j * 1e12), repr(e.latency_s * 1e9), e.ops])
        return buf.getvalue()


# -- derived reports ---------------------------------------------------------

def breakdown(ledger: StageLedger) -> dict[str, dict[str, float]]:
    """Fractional energy and latency share per stage; shares each sum to 1."""
    te, tl = ledger.total_energy_j, ledger.total_latency_s
    if te <= 0 or tl <= 0:
        raise LedgerError("breakdown of an empty ledger")
    return {
        s: {
            "energy_share": ledger.entries[s].energy_j / te,
            "latency_share": ledger.entries[s].latency_s / tl,
        }
        for s in STAGES
    }


@dataclass(frozen=True)
class ThroughputReport:
    patterns: int
    match_rate_per_s: float
    power_mw: float
    compute_efficiency: float     # patterns per second per milliwatt
    total_energy_j: float
    total_latency_s: float
    stage_shares: Mapping[str, dict] | None = None

    def to_dict(self) -> dict:
        return {
            "patterns": self.patterns,
            "match_rate_per_s": self.match_rate_per_s,
            "power_mw": self.power_mw,
            "compute_efficiency_per_s_per_mw": self.compute_efficiency,
            "total_energy_pj": self.total_energy_j * 1e12,
            "total_latency_ns": self.total_latency_s * 1e9,
        }


def throughput(ledger: StageLedger, patterns_done: int,
               include_shares: bool = False) -> ThroughputReport:
    """Match rate, average power and compute efficiency for a finished run."""
    t = ledger.total_latency_s
    if t <= 0:
        raise LedgerError("throughput of a zero-latency ledger")
    rate = patterns_done / t
    power_mw = ledger.total_energy_j / t * 1e3
    return ThroughputReport(
        patterns=patterns_done,
        match_rate_per_s=rate,
        power_mw=power_mw,
        compute_efficiency=rate / power_mw,
        total_energy_j=ledger.total_energy_j,
        total_latency_s=t,
        stage_shares=breakdown(ledger) if include_shares else None,
    )


# -- sweeps ------------------------------------------------------------------

def sweep(base_config, axis: str, values: Sequence) -> list[tuple[object, ThroughputReport]]:
    """Run the alignment workload once per axis point and report throughput.

    ``axis`` is one of 'pattern_length', 'profile', 'rows'. The base config is
    a kernels.AlignmentRunConfig; each point re-runs the same seeded workload
    with one field replaced.
    """
    from . import kernels  # local import: kernels depends on this module

    points = []
    for v in values:
        cfg = base_config.replace(**{axis: v})
        _, ledger, n_patterns = kernels.run_alignment_workload(cfg)
        points.append((v, throughput(ledger, n_patterns)))
    return points


def bulk_bitwise_bench(profile, ops: Sequence[str] = ("not", "or", "nand"),
                       rows: int = 64, bits: int = 256) -> dict[str, ThroughputReport]:
    """Bulk single-step bitwise ops over a fixed bit-vector, one result per op.

    Each op processes a rows x bits operand block: per output column one gang
    preset plus one row-parallel logic step. Throughput is bit-operations per
    second.
    """
    from . import device
    from .array import ArrayState

    import numpy as np

    results = {}
    rng = np.random.default_rng(1234)
    block = rng.integers(0, 2, size=(rows, 3 * bits), dtype=np.uint8)
    gate_for_op = {"not": "inv", "copy": "copy", "or": "or", "nor": "nor",
                   "nand": "nand"}
    for op in ops:
        gate_name = gate_for_op[op]
        ledger = StageLedger()
        arr = ArrayState(rows, 3 * bits, profile=profile, ledger=ledger)
        arr.cells[:] = block
        spec = device.make_gate(gate_name, profile)
        out_base = 2 * bits
        for i in range(bits):
            arr.preset_gang([out_base + i], [spec.preset], stage=Stage.PRESET_MATCH)
            ins = (i,) if spec.n_inputs == 1 else (i, bits + i)
            arr.logic_step(spec, ins, out_base + i, stage=Stage.MATCH_OPS)
        results[op] = throughput(ledger, rows * bits)
    return results
