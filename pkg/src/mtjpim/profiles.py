"""Technology profiles: every device and periphery constant for one MTJ technology point.

Profiles ship as JSON config files (``configs/near_term.json``,
``configs/long_term.json``). The JSON carries the values in their customary
units (kOhm, uA, ns, pJ) so the files read like a datasheet; this module
converts everything to SI (ohm, ampere, second, joule) on load and validates
the structural invariants.

Calibration fields (per-direction switching thresholds, wire model, bitline
driver cost) are configuration, not device physics: their provenance is
documented in the ``notes`` entries of the shipped configs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

__all__ = [
    "EnergyLatency",
    "PeripheryOverheads",
    "TechnologyProfile",
    "ProfileError",
    "load_profile",
    "shipped_profile",
    "shipped_profile_names",
]

_CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


class ProfileError(ValueError):
    """Raised when a profile config is malformed or violates an invariant."""


@dataclass(frozen=True)
class EnergyLatency:
    """One (energy, latency) cost pair per activation, SI units."""

    energy_j: float
    latency_s: float

    def __post_init__(self):
        if self.energy_j < 0 or self.latency_s < 0:
            raise ProfileError("energy/latency pairs must be >= 0")


@dataclass(frozen=True)
class PeripheryOverheads:
    """Per-activation overheads of the array periphery.

    The bitline driver is charged once per row-parallel step; decoder, mux,
    sense amplifier and precharge apply to addressed row accesses.
    """

    row_decoder: EnergyLatency
    mux: EnergyLatency
    sense_amplifier: EnergyLatency
    precharge: EnergyLatency
    bitline_driver: EnergyLatency

    def read_access(self) -> EnergyLatency:
        """Total overhead of one addressed row read."""
        e = (self.row_decoder.energy_j + self.mux.energy_j
             + self.sense_amplifier.energy_j + self.precharge.energy_j)
        t = (self.row_decoder.latency_s + self.mux.latency_s
             + self.sense_amplifier.latency_s + self.precharge.latency_s)
        return EnergyLatency(e, t)

    def write_access(self) -> EnergyLatency:
        """Total overhead of one addressed row write."""
        e = self.row_decoder.energy_j + self.precharge.energy_j
        t = self.row_decoder.latency_s + self.precharge.latency_s
        return EnergyLatency(e, t)


@dataclass(frozen=True)
class TechnologyProfile:
    """All constants for one technology point, SI units throughout."""

    name: str
    mtj_diameter_m: float
    tmr: float                      # ratio, e.g. 1.33 for 133%
    ra_product_ohm_um2: float
    i_crit_a: float                 # 50%-switching reference current
    i_crit_margin: float            # conservative multiplier on i_crit
    switching_latency_s: float
    r_p_ohm: float                  # parallel state, logic 0
    r_ap_ohm: float                 # anti-parallel state, logic 1
    write_latency_s: float
    read_latency_s: float
    write_energy_j: float           # per bit
    read_energy_j: float            # per bit
    gate_windows: Mapping[str, tuple[float, float]]   # volts, per gate name
    periphery: PeripheryOverheads
    wire_segment_resistance_ohm: float
    wire_segment_capacitance_f: float = 0.0
    series_resistance_ohm: float = 0.0   # access-transistor on-resistance per cell
    # Calibrated switching thresholds by direction of the output flip.
    # When absent, evaluation falls back to i_crit * i_crit_margin.
    i_switch_p_ap_a: float | None = None   # 0 -> 1 flips (preset-0 gates)
    i_switch_ap_p_a: float | None = None   # 1 -> 0 flips (preset-1 gates)
    max_fan_in: int = 8
    row_width_cap: int = 4096
    row_width_v_bias: float = 1.0
    schedule_decision_latency_s: float = 0.0
    schedule_decision_energy_j: float = 0.0
    notes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.r_ap_ohm > self.r_p_ohm > 0):
            raise ProfileError(f"{self.name}: need r_ap > r_p > 0")
        tmr_from_r = (self.r_ap_ohm - self.r_p_ohm) / self.r_p_ohm
        if abs(tmr_from_r - self.tmr) / self.tmr >= 0.01:
            raise ProfileError(
                f"{self.name}: TMR {self.tmr:.4f} inconsistent with "
                f"(r_ap - r_p)/r_p = {tmr_from_r:.4f}")
        if self.i_crit_margin < 1.0:
            raise ProfileError(f"{self.name}: i_crit_margin must be >= 1")
        if self.i_crit_a <= 0 or self.switching_latency_s <= 0:
            raise ProfileError(f"{self.name}: i_crit and switching latency must be > 0")
        for gate, (lo, hi) in self.gate_windows.items():
            if not (0 < lo <= hi):
                raise ProfileError(f"{self.name}: bad window for {gate}: ({lo}, {hi})")
        if self.wire_segment_resistance_ohm < 0 or self.series_resistance_ohm < 0:
            raise ProfileError(f"{self.name}: resistances must be >= 0")

    # -- derived accessors -------------------------------------------------

    def mtj_resistance_ohm(self, state: int) -> float:
        return self.r_ap_ohm if state else self.r_p_ohm

    def switch_threshold_a(self, preset: int) -> float:
        """Current magnitude above which an output with this preset flips.

        A preset-0 output flips 0 -> 1 (P to AP); a preset-1 output flips
        1 -> 0 (AP to P). Calibrated per-direction thresholds take priority;
        otherwise the conservative i_crit * margin bound applies.
        """
        cal = self.i_switch_p_ap_a if preset == 0 else self.i_switch_ap_p_a
        if cal is not None:
            return cal
        return self.i_crit_a * self.i_crit_margin

    def window_midpoint(self, gate: str) -> float:
        lo, hi = self.gate_windows[gate]
        return 0.5 * (lo + hi)

    def cache_key(self) -> tuple:
        """Hashable identity for memoising per-profile derived tables."""
        return (self.name, self.r_p_ohm, self.r_ap_ohm, self.i_crit_a,
                self.i_crit_margin, self.series_resistance_ohm,
                self.i_switch_p_ap_a, self.i_switch_ap_p_a)


# -- JSON loading ----------------------------------------------------------

_NS = 1e-9
_PJ = 1e-12
_UA = 1e-6
_KOHM = 1e3
_FF = 1e-15


def _pair(d: dict, ctx: str) -> EnergyLatency:
    try:
        return EnergyLatency(d["energy_pj"] * _PJ, d["latency_ns"] * _NS)
    except KeyError as e:
        raise ProfileError(f"periphery entry {ctx} missing {e}") from None


def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise ProfileError(f"profile config: missing '{key}' in {ctx}")
    return d[key]


def load_profile(path: str | Path) -> TechnologyProfile:
    """Load and validate one technology profile from a JSON config file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ProfileError(f"cannot read profile {path}: {e}") from None
    return profile_from_dict(raw)


def profile_from_dict(raw: dict) -> TechnologyProfile:
    mtj = _require(raw, "mtj", "profile")
    mem = _require(raw, "memory", "profile")
    peri_raw = _require(raw, "periphery", "profile")
    wire = raw.get("wire", {})
    limits = raw.get("limits", {})
    sched = raw.get("scheduling", {})

    windows = {
        name: (float(lo), float(hi))
        for name, (lo, hi) in _require(raw, "gate_windows_v", "profile").items()
    }
    periphery = PeripheryOverheads(
        row_decoder=_pair(_require(peri_raw, "row_decoder", "periphery"), "row_decoder"),
        mux=_pair(_require(peri_raw, "mux", "periphery"), "mux"),
        sense_amplifier=_pair(_require(peri_raw, "sense_amplifier", "periphery"), "sense_amplifier"),
        precharge=_pair(_require(peri_raw, "precharge", "periphery"), "precharge"),
        bitline_driver=_pair(_require(peri_raw, "bitline_driver", "periphery"), "bitline_driver"),
    )
    thresholds = raw.get("switching_thresholds_ua", {})

    return TechnologyProfile(
        name=_require(raw, "name", "profile"),
        mtj_diameter_m=float(_require(mtj, "diameter_nm", "mtj")) * 1e-9,
        tmr=float(_require(mtj, "tmr_pct", "mtj")) / 100.0,
        ra_product_ohm_um2=float(_require(mtj, "ra_product_ohm_um2", "mtj")),
        i_crit_a=float(_require(mtj, "i_crit_ua", "mtj")) * _UA,
        i_crit_margin=float(_require(mtj, "i_crit_margin", "mtj")),
        switching_latency_s=float(_require(mtj, "switching_latency_ns", "mtj")) * _NS,
        r_p_ohm=float(_require(mtj, "r_p_kohm", "mtj")) * _KOHM,
        r_ap_ohm=float(_require(mtj, "r_ap_kohm", "mtj")) * _KOHM,
        write_latency_s=float(_require(mem, "write_latency_ns", "memory")) * _NS,
        read_latency_s=float(_require(mem, "read_latency_ns", "memory")) * _NS,
        write_energy_j=float(_require(mem, "write_energy_pj", "memory")) * _PJ,
        read_energy_j=float(_require(mem, "read_energy_pj", "memory")) * _PJ,
        gate_windows=windows,
        periphery=periphery,
        wire_segment_resistance_ohm=float(wire.get("segment_resistance_ohm", 0.0)),
        wire_segment_capacitance_f=float(wire.get("segment_capacitance_ff", 0.0)) * _FF,
        series_resistance_ohm=float(raw.get("series_resistance_ohm", 0.0)),
        i_switch_p_ap_a=(float(thresholds["p_to_ap"]) * _UA
                         if "p_to_ap" in thresholds else None),
        i_switch_ap_p_a=(float(thresholds["ap_to_p"]) * _UA
                         if "ap_to_p" in thresholds else None),
        max_fan_in=int(limits.get("max_fan_in", 8)),
        row_width_cap=int(limits.get("row_width_cap", 4096)),
        row_width_v_bias=float(limits.get("row_width_v_bias", 1.0)),
        schedule_decision_latency_s=float(sched.get("decision_latency_ns", 1.0)) * _NS,
        schedule_decision_energy_j=float(sched.get("decision_energy_pj", 0.5)) * _PJ,
        notes=dict(raw.get("notes", {})),
    )


def shipped_profile_names() -> list[str]:
    return sorted(p.stem for p in _CONFIG_DIR.glob("*.json"))


def shipped_profile(name: str) -> TechnologyProfile:
    """Load one of the repo's shipped profiles by name (e.g. 'near_term')."""
    path = _CONFIG_DIR / f"{name}.json"
    if not path.exists():
        raise ProfileError(
            f"no shipped profile '{name}' (have: {', '.join(shipped_profile_names())})")
    return load_profile(path)
