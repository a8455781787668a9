"""Executable instruction layer: micro-instructions, macro expansion, and the
substrate memory controller (SMC) loop.

Micro-instructions name an operation and column coordinates; logic micros
carry no data values (the data lives in the array). The first column operand
of a logic micro is the output, e.g. ``nand c3, c1, c2`` forms a NAND gate
with output column 3. Row-addressed operations put the row operand first.

The SMC decodes logic micros through a per-profile lookup table holding the
bias voltage and output preset of each operation (reads and writes need no
lookup), enforces the preset discipline in strict mode, drives the array, and
accounts cycles in units of one switching latency.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import device, gates
from .array import ArrayState, RegionLayout
from .perf import Stage, StageLedger

__all__ = [
    "MicroInstruction",
    "IsaError",
    "AsmError",
    "SmcError",
    "OpLookupEntry",
    "build_op_lookup",
    "assemble",
    "disassemble",
    "Macro",
    "WritePM",
    "ReadPM",
    "ReadDirPM",
    "PresetPM",
    "NandPM",
    "NorPM",
    "XorPM",
    "AddPM",
    "AlignMatchPM",
    "expand_macro",
    "AlignmentPlan",
    "plan_alignment",
    "match_phase_steps",
    "sequence_to_micros",
    "ProgramTrace",
    "TraceEntry",
    "smc_run",
]


class IsaError(ValueError):
    pass


class AsmError(IsaError):
    def __init__(self, msg: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


class SmcError(IsaError):
    pass


# -- micro-instructions -------------------------------------------------------

#: short mnemonics for single-step gates with dedicated micro opcodes
MNEMONIC_TO_GATE = {
    "not": "inv",
    "copy": "copy",
    "nor": "nor",
    "nand": "nand",
    "maj3": "maj3",
    "maj5": "maj5",
    "th4": "th4",
}
GATE_TO_MNEMONIC = {g: m for m, g in MNEMONIC_TO_GATE.items()}

MEMORY_OPS = ("read", "write")
PRESET_OPS = ("preset_gang", "preset_row")


@dataclass(frozen=True)
class MicroInstruction:
    """One executable micro-instruction.

    ``cols`` for logic ops is (output, inputs...); for presets it is the
    preset column list; for read/write the single start column. ``gate`` is
    set for the generic_gate form, naming a library gate without a dedicated
    mnemonic. ``stage`` is an accounting annotation only and is not part of
    the assembly encoding.
    """

    op: str
    cols: tuple[int, ...]
    row: int | None = None
    value: int | None = None            # preset value
    bits: tuple[int, ...] | None = None  # write payload
    width: int | None = None            # read width
    gate: str | None = None             # generic_gate target
    stage: str | None = field(default=None, compare=False)

    def gate_name(self) -> str | None:
        if self.op == "generic_gate":
            return self.gate
        return MNEMONIC_TO_GATE.get(self.op)

    def validate(self) -> None:
        if self.op == "read":
            if self.row is None or len(self.cols) != 1 or not self.width or self.width < 1:
                raise IsaError("read needs row, one column, width >= 1")
        elif self.op == "write":
            if self.row is None or len(self.cols) != 1 or not self.bits:
                raise IsaError("write needs row, one column, nonempty bits")
            if any(b not in (0, 1) for b in self.bits):
                raise IsaError("write bits must be 0/1")
        elif self.op in PRESET_OPS:
            if not self.cols or self.value not in (0, 1):
                raise IsaError(f"{self.op} needs columns and a 0/1 value")
            if self.op == "preset_row" and self.row is None:
                raise IsaError("preset_row needs a row")
        else:
            g = self.gate_name()
            if g is None or g not in device.GATE_FAMILIES:
                raise IsaError(f"unknown logic op {self.op!r}/{self.gate!r}")
            fam = device.GATE_FAMILIES[g]
            if len(self.cols) != fam.n_inputs + 1:
                raise IsaError(
                    f"{self.op}: needs 1 output + {fam.n_inputs} input columns")
            if len(set(self.cols)) != len(self.cols):
                raise IsaError(f"{self.op}: column collision")


def logic_micro(gate: str, out: int, inputs: Sequence[int],
                stage: str | None = None) -> MicroInstruction:
    """Encode a gate application, choosing the dedicated mnemonic when one exists."""
    cols = (out, *inputs)
    if gate in GATE_TO_MNEMONIC:
        return MicroInstruction(GATE_TO_MNEMONIC[gate], cols, stage=stage)
    if gate not in device.GATE_FAMILIES:
        raise IsaError(f"unknown gate {gate!r}")
    return MicroInstruction("generic_gate", cols, gate=gate, stage=stage)


# -- assembly text ------------------------------------------------------------

_TOKEN = re.compile(r"^(r\d+|c\d+|[01]+|\d+|[a-z_][a-z0-9_]*)$")


def disassemble(program: Sequence[MicroInstruction]) -> str:
    lines = []
    for m in program:
        if m.op == "read":
            lines.append(f"read r{m.row}, c{m.cols[0]}, {m.width}")
        elif m.op == "write":
            lines.append(f"write r{m.row}, c{m.cols[0]}, "
                         + "".join(str(b) for b in m.bits))
        elif m.op == "preset_gang":
            lines.append("preset_gang " + ", ".join(f"c{c}" for c in m.cols)
                         + f", {m.value}")
        elif m.op == "preset_row":
            lines.append(f"preset_row r{m.row}, "
                         + ", ".join(f"c{c}" for c in m.cols) + f", {m.value}")
        elif m.op == "generic_gate":
            lines.append(f"gate {m.gate}, " + ", ".join(f"c{c}" for c in m.cols))
        else:
            lines.append(f"{m.op} " + ", ".join(f"c{c}" for c in m.cols))
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_operands(rest: str, lineno: int) -> list[str]:
    ops = [t.strip() for t in rest.split(",")] if rest.strip() else []
    for t in ops:
        if not _TOKEN.match(t):
            raise AsmError(f"bad operand {t!r}", lineno, rest.find(t))
    return ops


def _col(tok: str, lineno: int) -> int:
    if not tok.startswith("c"):
        raise AsmError(f"expected column operand, got {tok!r}", lineno)
    return int(tok[1:])


def assemble(text: str) -> list[MicroInstruction]:
    """Parse assembly text into a micro program (inverse of ``disassemble``)."""
    program = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        op = parts[0]
        ops = _parse_operands(parts[1] if len(parts) > 1 else "", lineno)
        try:
            if op == "read":
                m = MicroInstruction("read", (_col(ops[1], lineno),),
                                     row=int(ops[0][1:]), width=int(ops[2]))
            elif op == "write":
                bits = tuple(int(ch) for ch in ops[2])
                m = MicroInstruction("write", (_col(ops[1], lineno),),
                                     row=int(ops[0][1:]), bits=bits)
            elif op == "preset_gang":
                cols = tuple(_col(t, lineno) for t in ops[:-1])
                m = MicroInstruction("preset_gang", cols, value=int(ops[-1]))
            elif op == "preset_row":
                cols = tuple(_col(t, lineno) for t in ops[1:-1])
                m = MicroInstruction("preset_row", cols, row=int(ops[0][1:]),
                                     value=int(ops[-1]))
            elif op == "gate":
                cols = tuple(_col(t, lineno) for t in ops[1:])
                m = MicroInstruction("generic_gate", cols, gate=ops[0])
            elif op in MNEMONIC_TO_GATE:
                cols = tuple(_col(t, lineno) for t in ops)
                m = MicroInstruction(op, cols)
            else:
                raise AsmError(f"unknown mnemonic {op!r}", lineno)
            m.validate()
        except AsmError:
            raise
        except (IsaError, ValueError, IndexError) as e:
            raise AsmError(str(e), lineno) from None
        program.append(m)
    return program


# -- gate sequences to micros ---------------------------------------------------

def sequence_to_micros(steps: gates.GateSequence | Iterable[gates.Step],
                       preset_mode: str = "gang", rows: int | None = None,
                       preset_stage: str | None = None,
                       gate_stage: str | None = None) -> list[MicroInstruction]:
    """Lower preset/gate steps into micro-instructions.

    Row-wise preset lowering needs the row count (one preset_row micro per
    row). Fused dual-output steps have no micro encoding; emit sequences in
    their default single-output form for the ISA path.
    """
    if isinstance(steps, gates.GateSequence):
        steps = steps.steps
    out: list[MicroInstruction] = []
    for step in steps:
        if isinstance(step, gates.PresetStep):
            by_value: dict[int, list[int]] = {}
            for c, v in zip(step.cols, step.values):
                by_value.setdefault(v, []).append(c)
            for v in sorted(by_value):
                cols = tuple(by_value[v])
                if preset_mode == "gang":
                    out.append(MicroInstruction("preset_gang", cols, value=v,
                                                stage=preset_stage))
                elif preset_mode == "rowwise":
                    if rows is None:
                        raise IsaError("row-wise preset lowering needs the row count")
                    out.extend(
                        MicroInstruction("preset_row", cols, row=r, value=v,
                                         stage=preset_stage)
                        for r in range(rows))
                else:
                    raise IsaError(f"unknown preset mode {preset_mode!r}")
        else:
            if len(step.outputs) != 1:
                raise IsaError("fused dual-output steps have no micro encoding")
            out.append(logic_micro(step.gate, step.outputs[0], step.inputs,
                                   stage=gate_stage))
    return out


# -- macro-instructions ----------------------------------------------------------

@dataclass(frozen=True)
class Macro:
    pass


@dataclass(frozen=True)
class WritePM(Macro):
    row: int
    col: int
    bits: tuple[int, ...]


@dataclass(frozen=True)
class ReadPM(Macro):
    row: int
    col: int
    width: int


@dataclass(frozen=True)
class ReadDirPM(Macro):
    """Direct read-back of a previously written variable (same expansion)."""
    row: int
    col: int
    width: int


@dataclass(frozen=True)
class PresetPM(Macro):
    """Preset ncell consecutive cells from ``col``.

    ``value`` presets every cell alike; ``bitmask`` (LSB = first column)
    presets each cell to its own bit. ``gang`` switches the expansion from
    per-row writes to whole-column gang presets.
    """
    col: int
    ncell: int
    value: int | None = None
    bitmask: int | None = None
    gang: bool = False


@dataclass(frozen=True)
class NandPM(Macro):
    out: int
    in0: int
    in1: int
    ncell: int


@dataclass(frozen=True)
class NorPM(Macro):
    out: int
    in0: int
    in1: int
    ncell: int


@dataclass(frozen=True)
class XorPM(Macro):
    out: int
    in0: int
    in1: int
    ncell: int


@dataclass(frozen=True)
class AddPM(Macro):
    """Population count of columns [start, end) into the score region."""
    start: int
    end: int
    result: int


@dataclass(frozen=True)
class AlignMatchPM(Macro):
    """One full alignment at fragment offset ``loc``: match phase + score phase."""
    loc: int
    pattern_len: int
    char_bits: int = 2


def _bitwise_lanes(macro, gate: str, preset_mode: str,
                   rows: int | None) -> list[MicroInstruction]:
    if macro.ncell < 1:
        raise IsaError(f"{gate}_pm of zero width")
    fam = device.GATE_FAMILIES[gate]
    micros: list[MicroInstruction] = []
    for i in range(macro.ncell):
        steps = (gates.PresetStep((macro.out + i,), (fam.preset,)),
                 gates.GateStep(gate, (macro.in0 + i, macro.in1 + i),
                                (macro.out + i,)))
        micros.extend(sequence_to_micros(steps, preset_mode, rows))
    return micros


def expand_macro(macro: Macro, layout: RegionLayout, rows: int | None = None,
                 preset_mode: str = "gang") -> list[MicroInstruction]:
    """Translate one macro-instruction into its micro sequence.

    Code generation is layout-deterministic: the same macro against the same
    layout always yields the identical micro list. Preset macros expand to
    per-row writes unless the gang flag is set.
    """
    if isinstance(macro, WritePM):
        if not macro.bits:
            raise IsaError("write_pm of zero width")
        m = MicroInstruction("write", (macro.col,), row=macro.row,
                             bits=tuple(macro.bits))
        m.validate()
        return [m]
    if isinstance(macro, (ReadPM, ReadDirPM)):
        if macro.width < 1:
            raise IsaError("read_pm of zero width")
        m = MicroInstruction("read", (macro.col,), row=macro.row, width=macro.width)
        m.validate()
        return [m]
    if isinstance(macro, PresetPM):
        if macro.ncell < 1:
            raise IsaError("preset of zero cells")
        if (macro.value is None) == (macro.bitmask is None):
            raise IsaError("preset needs exactly one of value/bitmask")
        if macro.value is not None:
            groups = {macro.value: list(range(macro.col, macro.col + macro.ncell))}
        else:
            groups = {0: [], 1: []}
            for i in range(macro.ncell):
                groups[(macro.bitmask >> i) & 1].append(macro.col + i)
            groups = {v: cs for v, cs in groups.items() if cs}
        micros = []
        if macro.gang:
            for v in sorted(groups):
                micros.append(MicroInstruction("preset_gang", tuple(groups[v]), value=v))
        else:
            if rows is None:
                raise IsaError("row-wise preset expansion needs the row count")
            for r in range(rows):
                for v in sorted(groups):
                    micros.append(MicroInstruction("preset_row", tuple(groups[v]),
                                                   row=r, value=v))
        return micros
    if isinstance(macro, NandPM):
        return _bitwise_lanes(macro, "nand", preset_mode, rows)
    if isinstance(macro, NorPM):
        return _bitwise_lanes(macro, "nor", preset_mode, rows)
    if isinstance(macro, XorPM):
        if macro.ncell < 1:
            raise IsaError("xor_pm of zero width")
        s_base = layout.scratch[0]
        micros = []
        for i in range(macro.ncell):
            seq = gates.xor_sequence(macro.in0 + i, macro.in1 + i,
                                     s_base, s_base + 1, macro.out + i)
            micros.extend(sequence_to_micros(seq, preset_mode, rows))
        return micros
    if isinstance(macro, AddPM):
        if macro.end <= macro.start:
            raise IsaError("add_pm over an empty range")
        n = macro.end - macro.start
        width = gates.score_width(n)
        seq = gates.reduction_tree(
            list(range(macro.start, macro.end)), layout.scratch[0],
            list(range(macro.result, macro.result + width)),
            scratch_stop=layout.scratch[1])
        return sequence_to_micros(seq, preset_mode, rows)
    if isinstance(macro, AlignMatchPM):
        plan = plan_alignment(layout, macro.pattern_len, macro.char_bits)
        micros = sequence_to_micros(match_phase_steps(plan, macro.loc),
                                    preset_mode, rows,
                                    preset_stage=Stage.PRESET_MATCH,
                                    gate_stage=Stage.MATCH_OPS)
        micros.extend(sequence_to_micros(plan.tree, preset_mode, rows,
                                         preset_stage=Stage.PRESET_SCORE,
                                         gate_stage=Stage.ADD_OPS))
        return micros
    raise IsaError(f"unknown macro {macro!r}")


# -- alignment plan (shared by macro expansion and the kernels fast path) ------

@dataclass(frozen=True)
class AlignmentPlan:
    """Column assignments for one alignment iteration under a layout.

    Per character: char_bits XOR lanes (each with its own s1/s2 temps and
    output column, preset as one batch together with the merge output) feed a
    merge gate that produces the match bit; the reduction tree then counts
    the match bits into the score compartment.
    """

    layout: RegionLayout
    pattern_len: int
    char_bits: int
    s1: tuple[int, ...]
    s2: tuple[int, ...]
    xout: tuple[int, ...]
    match_cols: tuple[int, ...]
    merge_gate: str
    tree: gates.GateSequence

    def fragment_col(self, loc: int, char_index: int, bit: int) -> int:
        return self.layout.fragment[0] + (loc + char_index) * self.char_bits + bit

    def pattern_col(self, char_index: int, bit: int) -> int:
        return self.layout.pattern[0] + char_index * self.char_bits + bit

    def max_alignments(self) -> int:
        frag_chars = (self.layout.fragment[1] - self.layout.fragment[0]) // self.char_bits
        return frag_chars - self.pattern_len + 1


_MERGE_GATES = {2: "nor", 4: "nor4", 8: "nor8"}


def plan_alignment(layout: RegionLayout, pattern_len: int,
                   char_bits: int = 2) -> AlignmentPlan:
    if char_bits not in _MERGE_GATES:
        raise IsaError(f"no merge gate for {char_bits}-bit characters")
    if pattern_len < 1:
        raise IsaError("pattern must have at least one character")
    s0, s_stop = layout.scratch
    s1 = tuple(s0 + 3 * b for b in range(char_bits))
    s2 = tuple(s0 + 3 * b + 1 for b in range(char_bits))
    xout = tuple(s0 + 3 * b + 2 for b in range(char_bits))
    match_base = s0 + 3 * char_bits
    match_cols = tuple(range(match_base, match_base + pattern_len))
    # One score slot exactly: a wider score region (store-all mode) holds one
    # slot per offset, and the tree must never spill past its own slot.
    slot = gates.score_width(pattern_len)
    if layout.score[1] - layout.score[0] < slot:
        raise IsaError(
            f"score region holds {layout.score[1] - layout.score[0]} bits, "
            f"needs {slot}")
    tree = gates.reduction_tree(
        list(match_cols), match_base + pattern_len,
        list(range(layout.score[0], layout.score[0] + slot)),
        scratch_stop=s_stop)
    return AlignmentPlan(layout, pattern_len, char_bits, s1, s2, xout,
                         match_cols, _MERGE_GATES[char_bits], tree)


def match_phase_steps(plan: AlignmentPlan, loc: int) -> list[gates.Step]:
    """Preset/gate steps of the match phase for the alignment at ``loc``.

    Each character costs char_bits 3-step XOR comparisons plus one merge
    gate, with one batched preset of all their output cells up front.
    """
    if not 0 <= loc < plan.max_alignments():
        raise IsaError(f"alignment offset {loc} out of range")
    cb = plan.char_bits
    steps: list[gates.Step] = []
    for ci in range(plan.pattern_len):
        match_col = plan.match_cols[ci]
        preset_cols = []
        preset_vals = []
        for b in range(cb):
            preset_cols += [plan.s1[b], plan.s2[b], plan.xout[b]]
            preset_vals += [0, 1, 0]
        preset_cols.append(match_col)
        preset_vals.append(0)
        steps.append(gates.PresetStep(tuple(preset_cols), tuple(preset_vals)))
        for b in range(cb):
            f = plan.fragment_col(loc, ci, b)
            p = plan.pattern_col(ci, b)
            steps.append(gates.GateStep("nor", (f, p), (plan.s1[b],)))
            steps.append(gates.GateStep("copy", (plan.s1[b],), (plan.s2[b],)))
            steps.append(gates.GateStep("th4", (f, p, plan.s1[b], plan.s2[b]),
                                        (plan.xout[b],)))
        steps.append(gates.GateStep(plan.merge_gate, plan.xout[:cb],
                                    (match_col,)))
    return steps


# -- the SMC controller --------------------------------------------------------

@dataclass(frozen=True)
class OpLookupEntry:
    """What the controller needs to fire one logic op: bias and preset."""

    v_bias: float
    preset: int


def build_op_lookup(profile) -> dict[str, OpLookupEntry]:
    """One entry per logic op the SMC can decode, keyed by gate name.

    Bias voltages default to the profile's documented window midpoints, or
    the solved-window midpoint for gates without a documented window.
    """
    table = {}
    for name, fam in device.GATE_FAMILIES.items():
        if name == "xor":
            continue  # no single-step realisation
        try:
            spec = device.make_gate(name, profile)
        except device.DeviceError:
            continue
        table[name] = OpLookupEntry(spec.v_bias, fam.preset)
    return table


@dataclass(frozen=True)
class TraceEntry:
    index: int
    micro: MicroInstruction
    cycles: int
    energy_j: float
    latency_s: float
    read_data: tuple[int, ...] | None = None


@dataclass
class ProgramTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    total_cycles: int = 0

    @property
    def total_energy_j(self) -> float:
        return sum(e.energy_j for e in self.entries)

    @property
    def total_latency_s(self) -> float:
        return sum(e.latency_s for e in self.entries)

    def reads(self) -> list[tuple[int, ...]]:
        return [e.read_data for e in self.entries if e.read_data is not None]

    def to_json(self, indent: int = 2) -> str:
        rows = []
        for e in self.entries:
            rows.append({
                "index": e.index,
                "op": e.micro.op,
                "gate": e.micro.gate,
                "cols": list(e.micro.cols),
                "row": e.micro.row,
                "cycles": e.cycles,
                "energy_pj": e.energy_j * 1e12,
                "latency_ns": e.latency_s * 1e9,
                "read_data": list(e.read_data) if e.read_data is not None else None,
            })
        return json.dumps({"instructions": rows,
                           "total_cycles": self.total_cycles}, indent=indent)


def _default_stage(m: MicroInstruction) -> str:
    if m.stage is not None:
        return m.stage
    if m.op in PRESET_OPS:
        return Stage.PRESET_MATCH
    if m.op == "write":
        return Stage.WRITE_PATTERNS
    if m.op == "read":
        return Stage.SCORE_READOUT
    return Stage.MATCH_OPS


def smc_run(program: Sequence[MicroInstruction], array: ArrayState,
            profile=None, *, strict: bool = True,
            record_trace: bool = True) -> ProgramTrace:
    """Decode and execute a micro program against an array.

    Logic ops are decoded through the lookup table (reads/writes bypass it);
    in strict mode every logic micro must be preceded by a preset of its
    output column that is still intact. Cycles are allocated per instruction
    as ceil(latency / switching_latency).
    """
    profile = profile or array.profile
    lookup = build_op_lookup(profile)
    quantum = profile.switching_latency_s
    ledger = array.ledger
    if ledger is None:
        ledger = array.ledger = StageLedger()
    trace = ProgramTrace()
    armed: dict[int, int] = {}
    spec_cache: dict[str, device.GateSpec] = {}

    for idx, m in enumerate(program):
        m.validate()
        stage = _default_stage(m)
        e0, t0 = ledger.total_energy_j, ledger.total_latency_s
        read_data = None

        if m.op == "read":
            read_data = tuple(int(b) for b in
                              array.read_bits(m.row, m.cols[0], m.width, stage=stage))
        elif m.op == "write":
            array.write_bits(m.row, m.cols[0], m.bits, stage=stage)
            for i in range(len(m.bits)):
                armed.pop(m.cols[0] + i, None)
        elif m.op == "preset_gang":
            array.preset_gang(m.cols, m.value, stage=stage)
            for c in m.cols:
                armed[c] = m.value
        elif m.op == "preset_row":
            array.preset_cells(m.row, m.cols, m.value, stage=stage)
            if m.row == array.rows - 1:
                for c in m.cols:
                    armed[c] = m.value   # armed once the sweep reaches the last row
        else:
            gname = m.gate_name()
            entry = lookup.get(gname)
            if entry is None:
                raise SmcError(f"lookup miss for op {m.op!r} ({gname!r})")
            spec = spec_cache.get(gname)
            if spec is None:
                spec = device.make_gate(gname, profile, v_bias=entry.v_bias)
                spec_cache[gname] = spec
            out = m.cols[0]
            if strict and armed.get(out) != entry.preset:
                raise SmcError(
                    f"instruction {idx}: output column {out} of {gname} has no "
                    f"intact preset to {entry.preset}")
            array.logic_step(spec, m.cols[1:], out, stage=stage)
            armed.pop(out, None)

        energy = ledger.total_energy_j - e0
        latency = ledger.total_latency_s - t0
        cycles = max(1, math.ceil(latency / quantum - 1e-12))
        trace.total_cycles += cycles
        if record_trace:
            trace.entries.append(TraceEntry(idx, m, cycles, energy, latency,
                                            read_data))
    return trace
