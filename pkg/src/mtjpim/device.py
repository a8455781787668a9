"""MTJ cell and resistive-divider gate physics.

A gate is formed by biasing the bit-select lines of the input cells at a
common voltage while the output cell's line is grounded; all participating
cells connect to the shared logic line. The input MTJs act as parallel
resistors from the bias rail to the logic-line node, the output MTJ (held at
its preset state for the whole step) connects that node to ground, and the
output flips to the complement of its preset exactly when the magnitude of
the current through it exceeds the switching threshold.

Because all gates of interest are symmetric in their inputs, the network
current depends only on the number of logic-1 inputs, which makes the whole
model a one-dimensional family I_k(v) = v / D_k with D_k the series-parallel
resistance for k high inputs. D_k is strictly increasing in k, so I_k is
strictly decreasing: feasible single-step gates are exactly those whose
switching set is a prefix of the ones-count order, and their bias windows
follow in closed form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .profiles import TechnologyProfile

__all__ = [
    "GateSpec",
    "VoltageWindow",
    "VariationReport",
    "RowWidthReport",
    "DeviceError",
    "GATE_FAMILIES",
    "mtj_resistance",
    "gate_output_current",
    "evaluate_gate",
    "gate_response",
    "gate_response_for_state",
    "solve_voltage_window",
    "solve_gate_window",
    "make_gate",
    "standard_gate_names",
    "variation_sweep",
    "xor_infeasibility_trace",
    "max_row_width",
]


class DeviceError(ValueError):
    """Raised on contract violations in the device model."""


# -- gate family definitions -------------------------------------------------
# Truth values as a function of the number of logic-1 inputs (all shipped
# gates are commutative). ``preset`` is the required output state before the
# step fires.

def _truth(n: int, fn) -> tuple[int, ...]:
    return tuple(int(fn(k, n)) for k in range(n + 1))


@dataclass(frozen=True)
class GateFamily:
    name: str
    n_inputs: int
    preset: int
    truth_by_ones: tuple[int, ...]


GATE_FAMILIES: dict[str, GateFamily] = {}


def _register(name: str, n: int, preset: int, fn) -> None:
    GATE_FAMILIES[name] = GateFamily(name, n, preset, _truth(n, fn))


_register("inv", 1, 0, lambda k, n: k == 0)
_register("copy", 1, 1, lambda k, n: k == 1)
_register("nor", 2, 0, lambda k, n: k == 0)
_register("nor4", 4, 0, lambda k, n: k == 0)
_register("nor8", 8, 0, lambda k, n: k == 0)
_register("nand", 2, 0, lambda k, n: k < n)
_register("or", 2, 1, lambda k, n: k >= 1)
_register("maj3", 3, 1, lambda k, n: 2 * k > n)
_register("maj5", 5, 1, lambda k, n: 2 * k > n)
# 4-input threshold: high only when more than two inputs are 0.
_register("th4", 4, 0, lambda k, n: (n - k) > 2)
# XOR kept in the table for the infeasibility analysis; it has no single-step
# realisation (its switching set is not a ones-count prefix).
_register("xor", 2, 0, lambda k, n: k == 1)

#: Gates with a documented operating window, in window-midpoint order.
WINDOWED_GATE_ORDER = ("inv", "copy", "nor", "maj3", "maj5", "th4")


def standard_gate_names(profile: TechnologyProfile) -> tuple[str, ...]:
    """The profile's windowed gate set, falling back to the standard six."""
    names = tuple(n for n in WINDOWED_GATE_ORDER if n in profile.gate_windows)
    return names or WINDOWED_GATE_ORDER


@dataclass(frozen=True)
class GateSpec:
    """A single-step in-array gate at a chosen operating point."""

    name: str
    n_inputs: int
    preset: int
    v_bias: float
    truth_by_ones: tuple[int, ...]

    def __post_init__(self):
        if len(self.truth_by_ones) != self.n_inputs + 1:
            raise DeviceError(f"{self.name}: truth table must have n_inputs+1 entries")
        if self.v_bias <= 0:
            raise DeviceError(f"{self.name}: v_bias must be > 0")

    def truth(self, inputs: Sequence[int]) -> int:
        return self.truth_by_ones[sum(1 for b in inputs if b)]


class VoltageWindow(tuple):
    """Closed operating interval (v_min, v_max) in volts."""

    __slots__ = ()

    def __new__(cls, v_min: float, v_max: float):
        return super().__new__(cls, (v_min, v_max))

    @property
    def v_min(self) -> float:
        return self[0]

    @property
    def v_max(self) -> float:
        return self[1]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self[0] + self[1])

    def overlaps(self, other: "VoltageWindow") -> bool:
        # Closed-interval test: a shared endpoint counts as an overlap.
        return self.v_min <= other.v_max and other.v_min <= self.v_max


# -- core nodal solve --------------------------------------------------------

def mtj_resistance(state: int, profile: TechnologyProfile) -> float:
    """Resistance (ohm) of one MTJ in the given logic state."""
    if state not in (0, 1):
        raise DeviceError(f"cell state must be 0 or 1, got {state!r}")
    return profile.mtj_resistance_ohm(state)


def _branch_resistance(state: int, profile: TechnologyProfile) -> float:
    return profile.mtj_resistance_ohm(state) + profile.series_resistance_ohm


def divider_resistance(k_ones: int, n_inputs: int, preset: int,
                       profile: TechnologyProfile,
                       wire_ohm: float = 0.0) -> float:
    """Total resistance seen by the bias rail for k high inputs.

    Parallel input branches in series with the (optional) logic-line wire and
    the output branch. With the output grounded this one number determines the
    output current: I = v / D.
    """
    if not (0 <= k_ones <= n_inputs):
        raise DeviceError("k_ones out of range")
    g_in = (k_ones / _branch_resistance(1, profile)
            + (n_inputs - k_ones) / _branch_resistance(0, profile))
    return 1.0 / g_in + wire_ohm + _branch_resistance(preset, profile)


def output_current(k_ones: int, n_inputs: int, preset: int, v_bias: float,
                   profile: TechnologyProfile, wire_ohm: float = 0.0) -> float:
    return v_bias / divider_resistance(k_ones, n_inputs, preset, profile, wire_ohm)


def gate_output_current(inputs: Sequence[int], output_preset: int,
                        v_bias: float, profile: TechnologyProfile) -> float:
    """Current (ampere) through the output MTJ for one input assignment."""
    if len(inputs) == 0:
        raise DeviceError("gate needs at least one input")
    if len(inputs) > profile.max_fan_in:
        raise DeviceError(
            f"fan-in {len(inputs)} exceeds profile limit {profile.max_fan_in}")
    if v_bias <= 0:
        raise DeviceError("v_bias must be > 0")
    k = sum(1 for b in inputs if b)
    return output_current(k, len(inputs), output_preset, v_bias, profile)


@lru_cache(maxsize=4096)
def _response_by_ones(profile_key: tuple, n_inputs: int, preset: int,
                      v_bias: float, r_p: float, r_ap: float, r_s: float,
                      threshold: float) -> tuple[tuple[int, ...], tuple[float, ...]]:
    bits = []
    currents = []
    g1 = 1.0 / (r_ap + r_s)
    g0 = 1.0 / (r_p + r_s)
    r_out = (r_ap if preset else r_p) + r_s
    for k in range(n_inputs + 1):
        g_in = k * g1 + (n_inputs - k) * g0
        i = v_bias / (1.0 / g_in + r_out)
        currents.append(i)
        bits.append((1 - preset) if i > threshold else preset)
    return tuple(bits), tuple(currents)


def gate_response(spec: GateSpec, profile: TechnologyProfile):
    """Analog response of a gate: output bit and current per ones-count.

    This is the memoised form of the per-step evaluation the array performs;
    it is derived from the divider currents and the switching threshold, never
    from the gate's nominal truth table, so a misconfigured bias voltage shows
    up as wrong output bits.
    """
    threshold = profile.switch_threshold_a(spec.preset)
    return _response_by_ones(profile.cache_key(), spec.n_inputs, spec.preset,
                             spec.v_bias, profile.r_p_ohm, profile.r_ap_ohm,
                             profile.series_resistance_ohm, threshold)


def gate_response_for_state(spec: GateSpec, profile: TechnologyProfile,
                            state: int):
    """Analog response if the output cell holds ``state`` instead of its preset.

    Used by the array's permissive mode to propagate the consequences of a
    missing preset: the divider sees the actual output resistance and the flip
    direction (hence threshold) of the actual state.
    """
    threshold = profile.switch_threshold_a(state)
    return _response_by_ones(profile.cache_key(), spec.n_inputs, state,
                             spec.v_bias, profile.r_p_ohm, profile.r_ap_ohm,
                             profile.series_resistance_ohm, threshold)


def evaluate_gate(inputs: Sequence[int], spec: GateSpec,
                  profile: TechnologyProfile) -> int:
    """Evaluate one gate step: threshold the output current magnitude."""
    if len(inputs) != spec.n_inputs:
        raise DeviceError(
            f"{spec.name}: expected {spec.n_inputs} inputs, got {len(inputs)}")
    bits, _ = gate_response(spec, profile)
    return bits[sum(1 for b in inputs if b)]


# -- window solving ----------------------------------------------------------

def solve_voltage_window(truth_by_ones: Sequence[int], preset: int,
                         n_inputs: int, profile: TechnologyProfile,
                         threshold_a: float | None = None) -> VoltageWindow | None:
    """Maximal bias interval realising the truth table, or None if infeasible.

    The output current strictly decreases as the ones-count k grows, so the
    set of input classes that must flip the output has to be a prefix
    {0, ..., j} of the ones-count order (equivalently a prefix of the currents
    sorted descending). The window follows from inverting I_j(v) and
    I_{j+1}(v) at the switching threshold.
    """
    truth = tuple(int(b) for b in truth_by_ones)
    if len(truth) != n_inputs + 1:
        raise DeviceError("truth table must have one entry per ones-count")
    switching = {k for k, b in enumerate(truth) if b != preset}
    if not switching:
        return None  # constant gate: no bias distinguishes it
    j = max(switching)
    if switching != set(range(j + 1)):
        return None  # non-monotone threshold, e.g. XOR
    thr = threshold_a if threshold_a is not None else profile.switch_threshold_a(preset)
    v_min = thr * divider_resistance(j, n_inputs, preset, profile)
    if j + 1 > n_inputs:
        return VoltageWindow(v_min, math.inf)
    v_max = thr * divider_resistance(j + 1, n_inputs, preset, profile)
    return VoltageWindow(v_min, v_max)


def solve_gate_window(name: str, profile: TechnologyProfile,
                      threshold_a: float | None = None) -> VoltageWindow | None:
    fam = GATE_FAMILIES[name]
    return solve_voltage_window(fam.truth_by_ones, fam.preset, fam.n_inputs,
                                profile, threshold_a)


def make_gate(name: str, profile: TechnologyProfile,
              v_bias: float | None = None) -> GateSpec:
    """Instantiate a library gate at an operating point.

    The bias defaults to the profile's documented window midpoint when the
    profile carries one for this gate, otherwise to the solved-window
    midpoint.
    """
    fam = GATE_FAMILIES[name]
    if v_bias is None:
        if name in profile.gate_windows:
            v_bias = profile.window_midpoint(name)
        else:
            win = solve_gate_window(name, profile)
            if win is None or math.isinf(win.v_max):
                raise DeviceError(f"{name}: no finite operating window")
            v_bias = win.midpoint
    return GateSpec(name, fam.n_inputs, fam.preset, v_bias, fam.truth_by_ones)


def xor_infeasibility_trace(profile: TechnologyProfile) -> dict:
    """Explain why a single-step XOR cannot exist, for both presets.

    Returns the ordered currents at a reference bias and the switching set
    each preset would require, which is not a prefix of the ones-count order.
    """
    fam = GATE_FAMILIES["xor"]
    v_ref = profile.window_midpoint("nor") if "nor" in profile.gate_windows else 1.0
    out = {"v_ref": v_ref, "presets": {}}
    for preset in (0, 1):
        currents = [output_current(k, 2, preset, v_ref, profile) for k in range(3)]
        need = sorted(k for k in range(3) if fam.truth_by_ones[k] != preset)
        prefix = need == list(range(len(need)))
        out["presets"][preset] = {
            "currents_a": currents,
            "required_switching_ones_counts": need,
            "is_prefix_of_current_order": prefix,
            "window": solve_voltage_window(fam.truth_by_ones, preset, 2, profile),
        }
    return out


# -- process variation -------------------------------------------------------

@dataclass(frozen=True)
class VariationReport:
    """Re-solved gate windows after scaling the switching current."""

    scenario: float                                  # signed fraction on i_crit
    windows: Mapping[str, VoltageWindow]
    overlaps: tuple[tuple[str, str], ...]            # pairs with intersecting windows


def variation_sweep(profile: TechnologyProfile,
                    deltas: Sequence[float],
                    gate_names: Sequence[str] | None = None) -> list[VariationReport]:
    """Re-solve all gate windows under scaled switching currents.

    Each delta scales the switching thresholds by (1 + delta); switching
    currents are device currents, so calibrated per-direction thresholds scale
    together with i_crit.
    """
    names = tuple(gate_names) if gate_names else standard_gate_names(profile)
    reports = []
    for delta in deltas:
        if not -0.5 <= delta <= 0.5:
            raise DeviceError(f"variation delta {delta} outside +/-50%")
        scale = 1.0 + delta
        windows: dict[str, VoltageWindow] = {}
        for name in names:
            fam = GATE_FAMILIES[name]
            thr = profile.switch_threshold_a(fam.preset) * scale
            win = solve_voltage_window(fam.truth_by_ones, fam.preset,
                                       fam.n_inputs, profile, threshold_a=thr)
            if win is not None:
                windows[name] = win
        overlaps = tuple(
            (a, b)
            for a, b in itertools.combinations(sorted(windows), 2)
            if windows[a].overlaps(windows[b])
        )
        reports.append(VariationReport(delta, windows, overlaps))
    return reports


# -- maximum row width -------------------------------------------------------

@dataclass(frozen=True)
class RowWidthReport:
    cells: int
    delay_overhead_fraction: float
    wire_resistance_ohm: float
    v_bias: float
    gate: str


def max_row_width(profile: TechnologyProfile,
                  v_bias: float | None = None,
                  gate: str = "nor") -> RowWidthReport:
    """Largest input-to-output cell separation that still switches the output.

    Models the logic line between a two-input gate's (adjacent) inputs and its
    output as a chain of per-cell wire segments and grows the separation until
    the output current for the weakest must-switch input state drops below the
    conservative i_crit * margin bound. Also reports the wire RC delay at that
    separation as a fraction of the MTJ switching time.
    """
    if v_bias is None:
        v_bias = profile.row_width_v_bias
    if profile.gate_windows and not any(
            lo <= v_bias <= hi for lo, hi in profile.gate_windows.values()):
        raise DeviceError(
            f"v_bias {v_bias} V lies outside every gate window of {profile.name}")
    fam = GATE_FAMILIES[gate]
    switching = [k for k, b in enumerate(fam.truth_by_ones) if b != fam.preset]
    if not switching:
        raise DeviceError(f"{gate}: gate never switches, no terminating condition")
    k_weakest = max(switching)   # most conservative state that must still flip
    thr = profile.i_crit_a * profile.i_crit_margin
    r_seg = profile.wire_segment_resistance_ohm

    base = divider_resistance(k_weakest, fam.n_inputs, fam.preset, profile)
    if v_bias / base <= thr:
        return RowWidthReport(0, 0.0, 0.0, v_bias, gate)
    if r_seg == 0.0:
        # no attenuation: bounded only by the configured geometry cap
        return RowWidthReport(profile.row_width_cap, 0.0, 0.0, v_bias, gate)

    # I(d) = v / (base + d * r_seg) > thr  <=>  d < (v/thr - base) / r_seg
    d_max = int(math.floor((v_bias / thr - base) / r_seg))
    d_max = min(max(d_max, 0), profile.row_width_cap)
    r_wire = d_max * r_seg
    c_wire = d_max * profile.wire_segment_capacitance_f
    delay = 0.5 * r_wire * c_wire   # distributed-RC (Elmore) delay of the line
    return RowWidthReport(d_max, delay / profile.switching_latency_s,
                          r_wire, v_bias, gate)
