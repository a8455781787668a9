"""The 2-D cell grid: memory accesses, presets, and the row-parallel logic step.

One logic step applies the same gate to the same columns of every row at
once; that is the array's only compute primitive. The step consults the
device module's analog response (current threshold against the calibrated
switching current), never the gate's nominal truth table, so a misconfigured
bias voltage produces wrong bits here exactly as it would in hardware.

Cost accounting (booked into a perf.StageLedger when one is attached):

* addressed row write/read: per-bit cell energy plus decoder/precharge (and
  sense-amp/mux for reads) periphery, one row-access latency
* gang preset: per column, all rows at once; one switching time plus the
  bitline-driver activation, cell energy = rows x write energy
* row-wise preset: per column, one row write per row; same cell energy as the
  gang preset of the same cells (the two modes differ only in latency)
* logic step: one switching time (match/add stage) plus one bitline-driver
  activation (bitline stage); energy is the resistive dissipation
  v_bias * I_out * t_switch summed over rows
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import device
from .perf import Stage, StageLedger
from .profiles import TechnologyProfile

__all__ = [
    "ArrayError",
    "PresetContractError",
    "ComputeExclusivityError",
    "RowWidthWarning",
    "ArrayGeometry",
    "RegionLayout",
    "ArrayState",
]


class ArrayError(ValueError):
    pass


class PresetContractError(ArrayError):
    """A logic step fired on an output column that was not preset."""


class ComputeExclusivityError(ArrayError):
    """Memory access or a second logic step issued during an active step."""


class RowWidthWarning(UserWarning):
    """Array wider than the wire analysis supports for this profile."""


@dataclass(frozen=True)
class ArrayGeometry:
    """How many independent arrays, and the shape of each."""

    arrays: int
    rows: int
    cols: int

    def __post_init__(self):
        if self.arrays < 1 or self.rows < 1 or self.cols < 1:
            raise ArrayError("geometry must be positive in all dimensions")


@dataclass(frozen=True)
class RegionLayout:
    """Per-row compartment map: half-open column ranges."""

    fragment: tuple[int, int]
    pattern: tuple[int, int]
    score: tuple[int, int]
    scratch: tuple[int, int]

    def __post_init__(self):
        prev_stop = 0
        for name, (start, stop) in self.regions().items():
            if not (0 <= start <= stop):
                raise ArrayError(f"layout region {name} malformed: ({start}, {stop})")
            if start < prev_stop:
                raise ArrayError(f"layout region {name} overlaps its predecessor")
            prev_stop = stop

    def regions(self) -> dict[str, tuple[int, int]]:
        return {"fragment": self.fragment, "pattern": self.pattern,
                "score": self.score, "scratch": self.scratch}

    @property
    def cols_needed(self) -> int:
        return self.scratch[1]

    def width(self, region: str) -> int:
        start, stop = self.regions()[region]
        return stop - start

    def validate(self, cols: int, pattern_len: int | None = None) -> None:
        if self.cols_needed > cols:
            raise ArrayError(
                f"layout needs {self.cols_needed} columns, array has {cols}")
        if pattern_len is not None:
            need = math.floor(math.log2(pattern_len)) + 1
            if self.width("score") < need:
                raise ArrayError(
                    f"score region holds {self.width('score')} bits, "
                    f"needs at least {need} for {pattern_len}-character patterns")


_row_width_cache: dict[tuple, int] = {}


def _profile_row_width(profile: TechnologyProfile) -> int:
    key = profile.cache_key()
    if key not in _row_width_cache:
        try:
            _row_width_cache[key] = device.max_row_width(profile).cells
        except device.DeviceError:
            _row_width_cache[key] = profile.row_width_cap
    return _row_width_cache[key]


class ArrayState:
    """One array instance: the bit grid plus cost bookkeeping."""

    def __init__(self, rows: int, cols: int, *,
                 profile: TechnologyProfile,
                 layout: RegionLayout | None = None,
                 ledger: StageLedger | None = None,
                 strict: bool = True):
        if rows < 1 or cols < 1:
            raise ArrayError("array must have at least one row and column")
        self.rows = rows
        self.cols = cols
        self.profile = profile
        self.layout = layout
        self.ledger = ledger
        self.strict = strict
        self.cells = np.zeros((rows, cols), dtype=np.uint8)
        self._in_step = False
        self._lut_cache: dict[int, tuple] = {}
        if layout is not None:
            layout.validate(cols)
        limit = _profile_row_width(profile)
        if cols > limit:
            warnings.warn(
                f"{cols} columns exceeds the {limit}-cell row-width analysis "
                f"for profile {profile.name}", RowWidthWarning, stacklevel=2)

    # -- bookkeeping helpers -------------------------------------------------

    def _book(self, stage: str, energy_j: float, latency_s: float, ops: int = 1):
        if self.ledger is not None:
            self.ledger.add(stage, energy_j, latency_s, ops)

    def _check_cols(self, cols: Sequence[int]):
        for c in cols:
            if not 0 <= c < self.cols:
                raise ArrayError(f"column {c} out of bounds (cols={self.cols})")

    def _check_idle(self):
        if self._in_step:
            raise ComputeExclusivityError(
                "memory access attempted during an active logic step")

    # -- memory configuration --------------------------------------------------

    def write_bits(self, row: int, start_col: int, bits: Sequence[int],
                   stage: str = Stage.WRITE_PATTERNS) -> None:
        self._check_idle()
        if not 0 <= row < self.rows:
            raise ArrayError(f"row {row} out of bounds")
        n = len(bits)
        if n == 0:
            return
        if start_col < 0 or start_col + n > self.cols:
            raise ArrayError("write range out of bounds")
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.max(initial=0) > 1:
            raise ArrayError("bits must be 0/1")
        self.cells[row, start_col:start_col + n] = arr
        acc = self.profile.periphery.write_access()
        self._book(stage, n * self.profile.write_energy_j + acc.energy_j,
                   self.profile.write_latency_s + acc.latency_s)

    def read_bits(self, row: int, start_col: int, n: int,
                  stage: str = Stage.SCORE_READOUT) -> np.ndarray:
        self._check_idle()
        if not 0 <= row < self.rows:
            raise ArrayError(f"row {row} out of bounds")
        if n == 0:
            return np.zeros(0, dtype=np.uint8)
        if n < 0 or start_col < 0 or start_col + n > self.cols:
            raise ArrayError("read range out of bounds")
        out = self.cells[row, start_col:start_col + n].copy()
        acc = self.profile.periphery.read_access()
        self._book(stage, n * self.profile.read_energy_j + acc.energy_j,
                   self.profile.read_latency_s + acc.latency_s)
        return out

    def read_block(self, start_col: int, n: int,
                   stage: str = Stage.SCORE_READOUT) -> np.ndarray:
        """Read the same column range from every row (one access per row)."""
        self._check_idle()
        if n < 0 or start_col < 0 or start_col + n > self.cols:
            raise ArrayError("read range out of bounds")
        out = self.cells[:, start_col:start_col + n].copy()
        acc = self.profile.periphery.read_access()
        self._book(stage,
                   self.rows * (n * self.profile.read_energy_j + acc.energy_j),
                   self.rows * (self.profile.read_latency_s + acc.latency_s),
                   ops=self.rows)
        return out

    # -- presets ---------------------------------------------------------------

    @staticmethod
    def _normalize_preset(cols, values):
        cols = [cols] if isinstance(cols, (int, np.integer)) else list(cols)
        if isinstance(values, (int, np.integer)):
            values = [int(values)] * len(cols)
        else:
            values = [int(v) for v in values]
        if len(values) != len(cols):
            raise ArrayError("preset values must match columns")
        if any(v not in (0, 1) for v in values):
            raise ArrayError("preset values must be 0/1")
        return cols, values

    def preset_gang(self, cols, values, stage: str = Stage.PRESET_MATCH) -> None:
        """Preset whole columns across all rows at once (parallel-copy cost).

        Each column costs one switching time plus one bitline-driver
        activation; cell energy equals that of writing the same cells.
        """
        self._check_idle()
        cols, values = self._normalize_preset(cols, values)
        self._check_cols(cols)
        self.cells[:, cols] = np.asarray(values, dtype=np.uint8)[None, :]
        k = len(cols)
        bl = self.profile.periphery.bitline_driver
        self._book(stage,
                   k * self.rows * self.profile.write_energy_j,
                   k * (self.profile.switching_latency_s + bl.latency_s),
                   ops=k)

    def preset_rowwise(self, cols, values, stage: str = Stage.PRESET_MATCH) -> None:
        """Preset columns through standard row writes, one row at a time.

        Same cells, same energy as the gang preset; latency scales with the
        row count (one row write per row per column).
        """
        self._check_idle()
        cols, values = self._normalize_preset(cols, values)
        self._check_cols(cols)
        self.cells[:, cols] = np.asarray(values, dtype=np.uint8)[None, :]
        k = len(cols)
        self._book(stage,
                   k * self.rows * self.profile.write_energy_j,
                   k * self.rows * self.profile.write_latency_s,
                   ops=k * self.rows)

    def preset_cells(self, row: int, cols, values,
                     stage: str = Stage.PRESET_MATCH) -> None:
        """Preset cells of a single row through standard writes (one per cell)."""
        self._check_idle()
        if not 0 <= row < self.rows:
            raise ArrayError(f"row {row} out of bounds")
        cols, values = self._normalize_preset(cols, values)
        self._check_cols(cols)
        self.cells[row, cols] = np.asarray(values, dtype=np.uint8)
        k = len(cols)
        self._book(stage, k * self.profile.write_energy_j,
                   k * self.profile.write_latency_s, ops=k)

    def preset(self, cols, values, mode: str, stage: str = Stage.PRESET_MATCH) -> None:
        if mode == "gang":
            self.preset_gang(cols, values, stage)
        elif mode == "rowwise":
            self.preset_rowwise(cols, values, stage)
        else:
            raise ArrayError(f"unknown preset mode {mode!r}")

    # -- logic -------------------------------------------------------------------

    def begin_logic_step(self) -> None:
        if self._in_step:
            raise ComputeExclusivityError("a logic step is already active")
        self._in_step = True

    def complete_logic_step(self) -> None:
        self._in_step = False

    def _gate_luts(self, spec: device.GateSpec):
        luts = self._lut_cache.get(id(spec))
        if luts is None or luts[0] is not spec:
            bits_p, currents_p = device.gate_response(spec, self.profile)
            luts = (spec, np.asarray(bits_p, dtype=np.uint8),
                    np.asarray(currents_p))
            self._lut_cache[id(spec)] = luts
        return luts[1], luts[2]

    def logic_step(self, spec: device.GateSpec, input_cols: Sequence[int],
                   output_col, stage: str = Stage.MATCH_OPS,
                   trusted: bool = False) -> None:
        """Apply one gate to the same columns of every row, in parallel.

        Inputs are non-destructive. In strict mode every row's output cell
        must hold the gate's preset value; in permissive mode mis-preset
        outputs are evaluated from their actual state (threshold and flip
        direction of that state), letting wrong values propagate.

        ``trusted`` skips the arity/bounds/collision validation for steps
        already validated once (hot loops re-running a fixed sequence); the
        preset contract is still enforced.
        """
        out_cols = ([output_col] if isinstance(output_col, (int, np.integer))
                    else list(output_col))
        in_cols = input_cols if trusted else list(input_cols)
        if not trusted:
            if len(in_cols) != spec.n_inputs:
                raise ArrayError(
                    f"{spec.name}: expected {spec.n_inputs} input columns, "
                    f"got {len(in_cols)}")
            all_cols = in_cols + out_cols
            if len(set(all_cols)) != len(all_cols):
                raise ArrayError(f"{spec.name}: column collision in {all_cols}")
            self._check_cols(all_cols)
        self.begin_logic_step()
        try:
            cells = self.cells
            out0 = cells[:, out_cols[0]]
            preset_ok = not np.any(out0 != spec.preset)
            if self.strict:
                if not preset_ok:
                    bad = int(np.argmax(out0 != spec.preset))
                    raise PresetContractError(
                        f"{spec.name}: output column {out_cols[0]} not preset to "
                        f"{spec.preset} in row {bad}")
                for oc in out_cols[1:]:
                    if np.any(cells[:, oc] != spec.preset):
                        raise PresetContractError(
                            f"{spec.name}: output column {oc} not preset to "
                            f"{spec.preset}")

            if spec.n_inputs == 1:
                k = cells[:, in_cols[0]]
            else:
                k = cells[:, in_cols].sum(axis=1, dtype=np.uint8)
            lut_bits, lut_curr = self._gate_luts(spec)
            if preset_ok:
                out_bits = lut_bits[k]
                kcounts = np.bincount(k, minlength=spec.n_inputs + 1)
                current_sum = float(kcounts @ lut_curr)
            else:
                bits_o, currents_o = device.gate_response_for_state(
                    spec, self.profile, 1 - spec.preset)
                alt_bits = np.asarray(bits_o, dtype=np.uint8)
                alt_curr = np.asarray(currents_o)
                at_preset = out0 == spec.preset
                out_bits = np.where(at_preset, lut_bits[k], alt_bits[k]).astype(np.uint8)
                current_sum = float(np.where(at_preset, lut_curr[k], alt_curr[k]).sum())

            for oc in out_cols:
                cells[:, oc] = out_bits

            if self.ledger is not None:
                t_sw = self.profile.switching_latency_s
                self.ledger.add(stage, spec.v_bias * current_sum * t_sw, t_sw, 1)
                bl = self.profile.periphery.bitline_driver
                self.ledger.add(Stage.BITLINE, bl.energy_j, bl.latency_s, 1)
        finally:
            self.complete_logic_step()

    # -- snapshots ---------------------------------------------------------------

    def snapshot(self) -> np.ndarray:
        return self.cells.copy()

    def restore(self, snap: np.ndarray) -> None:
        if snap.shape != self.cells.shape:
            raise ArrayError("snapshot shape mismatch")
        self.cells[:] = snap

    def to_bytes(self) -> bytes:
        header = f"mtjpim {self.rows} {self.cols}\n".encode()
        return header + np.packbits(self.cells, axis=None).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes, *, profile: TechnologyProfile) -> "ArrayState":
        nl = blob.index(b"\n")
        magic, rows, cols = blob[:nl].split()
        if magic != b"mtjpim":
            raise ArrayError("not an array dump")
        rows, cols = int(rows), int(cols)
        arr = cls(rows, cols, profile=profile)
        flat = np.unpackbits(np.frombuffer(blob[nl + 1:], dtype=np.uint8),
                             count=rows * cols)
        arr.cells[:] = flat.reshape(rows, cols)
        return arr

    def to_hex(self) -> str:
        lines = []
        for r in range(self.rows):
            packed = np.packbits(self.cells[r])
            lines.append(packed.tobytes().hex())
        return "\n".join(lines) + "\n"
