"""Composite multi-step gate constructions over array columns.

A GateSequence is a relocatable list of preset and single-gate steps. The
three shipped constructions are the 3-step XOR (NOR, COPY, then a 4-input
threshold), the 4-step majority-based full adder, and the population-count
reduction tree of 1-bit full adders used for similarity scores.

Tree accounting: pairing operands level by level (the unpaired operand of an
odd level is promoted unchanged), a level-L add of two L-bit partial sums
ripples through L full-adder positions and yields an (L+1)-bit result whose
top bit is the final carry cell. Missing low bits of a narrower operand are
taken from a constant-zero scratch column. ``tree_adder_count`` gives the
resulting closed-form invocation count, e.g. 194 one-bit adders for 100 input
bits with a 7-bit score.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import device

__all__ = [
    "PresetStep",
    "GateStep",
    "GateSequence",
    "SequenceError",
    "InsufficientScratchError",
    "xor_sequence",
    "full_adder_sequence",
    "reduction_tree",
    "tree_adder_count",
    "tree_scratch_cells",
    "score_width",
    "retarget",
    "execute_sequence",
]


class SequenceError(ValueError):
    pass


class InsufficientScratchError(SequenceError):
    pass


@dataclass(frozen=True)
class PresetStep:
    """Preset the listed columns to the paired values before later gates."""

    cols: tuple[int, ...]
    values: tuple[int, ...]

    def shifted(self, delta: int) -> "PresetStep":
        return PresetStep(tuple(c + delta for c in self.cols), self.values)


@dataclass(frozen=True)
class GateStep:
    """One single-step gate: library gate name, input and output columns."""

    gate: str
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]   # one column normally; two for fused dual-output

    def shifted(self, delta: int) -> "GateStep":
        return GateStep(self.gate,
                        tuple(c + delta for c in self.inputs),
                        tuple(c + delta for c in self.outputs))


Step = PresetStep | GateStep


@dataclass(frozen=True)
class GateSequence:
    steps: tuple[Step, ...]
    scratch_footprint: frozenset[int] = frozenset()
    adder_invocations: int = 0
    result_cols: tuple[int, ...] = ()

    def shifted(self, delta: int) -> "GateSequence":
        return GateSequence(
            steps=tuple(s.shifted(delta) for s in self.steps),
            scratch_footprint=frozenset(c + delta for c in self.scratch_footprint),
            adder_invocations=self.adder_invocations,
            result_cols=tuple(c + delta for c in self.result_cols),
        )

    def gate_steps(self) -> list[GateStep]:
        return [s for s in self.steps if isinstance(s, GateStep)]

    def preset_cells(self) -> int:
        return sum(len(s.cols) for s in self.steps if isinstance(s, PresetStep))

    def validate(self) -> None:
        """Check the preset discipline: each gate output is preset, with the
        right value, after any earlier write to that column."""
        preset_val: dict[int, int] = {}
        for step in self.steps:
            if isinstance(step, PresetStep):
                if len(step.cols) != len(step.values):
                    raise SequenceError("preset cols/values length mismatch")
                for c, v in zip(step.cols, step.values):
                    preset_val[c] = v
            else:
                fam = device.GATE_FAMILIES[step.gate]
                if len(step.inputs) != fam.n_inputs:
                    raise SequenceError(f"{step.gate}: arity mismatch")
                if set(step.inputs) & set(step.outputs):
                    raise SequenceError(f"{step.gate}: reads a column it writes")
                for oc in step.outputs:
                    if preset_val.get(oc) != fam.preset:
                        raise SequenceError(
                            f"{step.gate}: output column {oc} not preset to "
                            f"{fam.preset} before use")
                    preset_val.pop(oc)


def _distinct(*cols: int, what: str) -> None:
    if len(set(cols)) != len(cols):
        raise SequenceError(f"{what}: columns must be distinct, got {cols}")


def xor_sequence(in0: int, in1: int, s1: int, s2: int, out: int,
                 fuse_copy: bool = False) -> GateSequence:
    """3-step XOR: s1 = NOR(a, b); s2 = COPY(s1); out = TH4(a, b, s1, s2).

    With ``fuse_copy`` the first two steps merge into one dual-output NOR,
    trading the documented 3-step shape for a 2-step one.
    """
    _distinct(in0, in1, s1, s2, out, what="xor")
    if fuse_copy:
        steps: tuple[Step, ...] = (
            PresetStep((s1, s2, out), (0, 0, 0)),
            GateStep("nor", (in0, in1), (s1, s2)),
            GateStep("th4", (in0, in1, s1, s2), (out,)),
        )
    else:
        steps = (
            PresetStep((s1, s2, out), (0, 1, 0)),
            GateStep("nor", (in0, in1), (s1,)),
            GateStep("copy", (s1,), (s2,)),
            GateStep("th4", (in0, in1, s1, s2), (out,)),
        )
    return GateSequence(steps, frozenset((s1, s2)), result_cols=(out,))


def full_adder_sequence(in0: int, in1: int, cin: int, s1: int, s2: int,
                        sum_col: int, cout: int) -> GateSequence:
    """4-step full adder: carry by MAJ3, sum by MAJ5 over inverted carry.

    cout = MAJ3(a, b, cin); s1 = INV(cout); s2 = COPY(s1);
    sum = MAJ5(a, b, cin, s1, s2).
    """
    _distinct(in0, in1, cin, s1, s2, sum_col, cout, what="full_adder")
    steps: tuple[Step, ...] = (
        PresetStep((cout, s1, s2, sum_col), (1, 0, 1, 1)),
        GateStep("maj3", (in0, in1, cin), (cout,)),
        GateStep("inv", (cout,), (s1,)),
        GateStep("copy", (s1,), (s2,)),
        GateStep("maj5", (in0, in1, cin, s1, s2), (sum_col,)),
    )
    return GateSequence(steps, frozenset((s1, s2)),
                        adder_invocations=1, result_cols=(sum_col, cout))


def score_width(n_bits: int) -> int:
    """Bits needed to hold the population count of an n-bit string."""
    if n_bits < 1:
        raise SequenceError("need at least one input bit")
    return math.floor(math.log2(n_bits)) + 1


def _pair_up(operands: list) -> tuple[list, object | None]:
    pairs = [(operands[i], operands[i + 1]) for i in range(0, len(operands) - 1, 2)]
    leftover = operands[-1] if len(operands) % 2 else None
    return pairs, leftover


def tree_adder_count(n_bits: int) -> int:
    """Closed-form count of 1-bit adder invocations of the reduction tree.

    Level by level, operands pair up (odd one promoted) and each add ripples
    over the wider operand's bit-width:
    100 -> 50x1 + 25x2 + 12x3 + 6x4 + 3x5 + 2x6 + 1x7 = 194.
    """
    widths = [1] * n_bits
    total = 0
    while len(widths) > 1:
        nxt = []
        pairs, leftover = _pair_up(widths)
        for a, b in pairs:
            w = max(a, b)
            total += w
            nxt.append(w + 1)
        if leftover is not None:
            nxt.append(leftover)
        widths = nxt
    return total


class _ScratchPool:
    """Deterministic smallest-first column allocator over the scratch region."""

    def __init__(self, base: int, stop: int | None):
        self.base = base
        self.stop = stop
        self.next_fresh = base
        self.free: list[int] = []
        self.peak = base

    def alloc(self) -> int:
        if self.free:
            return heapq.heappop(self.free)
        c = self.next_fresh
        if self.stop is not None and c >= self.stop:
            raise InsufficientScratchError(
                f"reduction tree needs more than {self.stop - self.base} scratch columns")
        self.next_fresh += 1
        self.peak = max(self.peak, self.next_fresh)
        return c

    def release(self, col: int) -> None:
        if col >= self.base:
            heapq.heappush(self.free, col)


def reduction_tree(match_cols: Sequence[int], scratch_base: int,
                   score_cols: Sequence[int],
                   scratch_stop: int | None = None) -> GateSequence:
    """Population count of the match columns into the score columns.

    Emits the full preset + gate step stream of a binary tree of ripple adds
    built from 1-bit full adders. Scratch columns are recycled once the
    partial sums they hold have been consumed; ``tree_scratch_cells`` reports
    the footprint this requires.
    """
    n = len(match_cols)
    if n < 1:
        raise SequenceError("reduction tree needs at least one match bit")
    need_score = score_width(n)
    score_cols = list(score_cols)
    if len(score_cols) < need_score:
        raise SequenceError(
            f"score range has {len(score_cols)} columns, needs {need_score}")

    pool = _ScratchPool(scratch_base + 3, scratch_stop)
    zero_col = scratch_base
    t1, t2 = scratch_base + 1, scratch_base + 2
    steps: list[Step] = [PresetStep((zero_col,), (0,))]
    adders = 0

    def fa(a: int, b: int, cin: int, sum_col: int, cout: int):
        nonlocal adders
        sub = full_adder_sequence(a, b, cin, t1, t2, sum_col, cout)
        steps.extend(sub.steps)
        adders += 1

    def ripple_add(a_cols: list[int], b_cols: list[int],
                   sum_dest: list[int] | None) -> list[int]:
        """Add two partial sums (LSB-first column lists); returns result cols.

        ``sum_dest`` supplies the sum columns (used to land the final result
        in the score compartment); otherwise sums come from the pool.
        """
        w = max(len(a_cols), len(b_cols))
        carry = zero_col
        sums: list[int] = []
        for i in range(w):
            a = a_cols[i] if i < len(a_cols) else zero_col
            b = b_cols[i] if i < len(b_cols) else zero_col
            s = sum_dest[i] if sum_dest is not None else pool.alloc()
            last = i == w - 1
            if last and sum_dest is not None and w < len(sum_dest):
                c = sum_dest[w]   # final carry is the result's top bit
            else:
                c = pool.alloc()
            fa(a, b, carry, s, c)
            if carry != zero_col:
                pool.release(carry)   # consumed by this position
            carry = c
            sums.append(s)
        for col in a_cols + b_cols:
            pool.release(col)
        return sums + [carry]

    operands: list[list[int]] = [[c] for c in match_cols]
    if n == 1:
        # degenerate tree: copy the single bit into the score LSB
        steps.append(PresetStep((score_cols[0],), (1,)))
        steps.append(GateStep("copy", (match_cols[0],), (score_cols[0],)))
        result = [score_cols[0]]
    else:
        while len(operands) > 1:
            pairs, leftover = _pair_up(operands)
            final_level = len(pairs) == 1 and leftover is None
            nxt = []
            for a, b in pairs:
                dest = score_cols if final_level else None
                nxt.append(ripple_add(a, b, dest))
            if leftover is not None:
                nxt.append(leftover)
            operands = nxt
        result = operands[0]

    # Sum bits beyond the score width are the impossible high carries; they
    # live in scratch and stay 0 for any input.
    seq = GateSequence(
        steps=tuple(steps),
        scratch_footprint=frozenset(range(scratch_base, pool.peak)),
        adder_invocations=adders,
        result_cols=tuple(result[:len(score_cols)]),
    )
    seq.validate()
    return seq


def tree_scratch_cells(n_bits: int) -> int:
    """Scratch footprint (columns) of ``reduction_tree`` for n input bits."""
    if n_bits == 1:
        return 3
    seq = reduction_tree(list(range(n_bits)), 10 ** 6,
                         list(range(n_bits, n_bits + score_width(n_bits))))
    return len(seq.scratch_footprint)


def retarget(seq: GateSequence, mapping: dict[int, int]) -> GateSequence:
    """Substitute columns throughout a sequence (e.g. move its result slot)."""

    def sub(c: int) -> int:
        return mapping.get(c, c)

    steps: list[Step] = []
    for step in seq.steps:
        if isinstance(step, PresetStep):
            steps.append(PresetStep(tuple(sub(c) for c in step.cols), step.values))
        else:
            steps.append(GateStep(step.gate,
                                  tuple(sub(c) for c in step.inputs),
                                  tuple(sub(c) for c in step.outputs)))
    return GateSequence(
        steps=tuple(steps),
        scratch_footprint=frozenset(sub(c) for c in seq.scratch_footprint),
        adder_invocations=seq.adder_invocations,
        result_cols=tuple(sub(c) for c in seq.result_cols),
    )


def execute_sequence(seq: GateSequence | Iterable[Step], array, *,
                     preset_mode: str = "gang",
                     preset_stage: str | None = None,
                     gate_stage: str | None = None,
                     gate_cache: dict | None = None,
                     trusted: bool = False) -> None:
    """Run a sequence on an array, booking presets and gates to the given stages.

    ``trusted`` forwards to the array's fast path for sequences whose shape
    has already been validated (re-runs of the same plan).
    """
    from .perf import Stage

    preset_stage = preset_stage or Stage.PRESET_MATCH
    gate_stage = gate_stage or Stage.MATCH_OPS
    cache = gate_cache if gate_cache is not None else {}
    steps = seq.steps if isinstance(seq, GateSequence) else seq
    for step in steps:
        if type(step) is PresetStep:
            array.preset(step.cols, step.values, preset_mode, stage=preset_stage)
        else:
            spec = cache.get(step.gate)
            if spec is None:
                spec = device.make_gate(step.gate, array.profile)
                cache[step.gate] = spec
            out = step.outputs[0] if len(step.outputs) == 1 else step.outputs
            array.logic_step(spec, step.inputs, out, stage=gate_stage,
                             trusted=trusted)
