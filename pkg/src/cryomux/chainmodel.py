"""Behavioral model of the SP4T cryogenic RF multiplexer.

Models the digital programming protocols (serial shift-register and
parallel combinational modes), the port-gating transmission envelope with
finite rise time, static/dynamic power dissipation, and a cooling-budget
planner for channel-count estimates.

Conventions chosen here and kept throughout:
  * Ports are the strings "RF1".."RF4"; the control word is 2 bits (D1, D0).
  * Serial words are clocked in D1-first: of the last two bits shifted into
    the register, the earlier one is D1 and the later one is D0.
  * The default word-to-port map is (0,0)->RF1, (0,1)->RF2, (1,0)->RF3,
    (1,1)->RF4; only the first two assignments are fixed by the hardware,
    the rest is a documented convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, ModeViolationError, ProtocolError

PORTS = ("RF1", "RF2", "RF3", "RF4")

DEFAULT_PORT_MAP: dict[tuple[int, int], str] = {
    (0, 0): "RF1",
    (0, 1): "RF2",
    (1, 0): "RF3",
    (1, 1): "RF4",
}

# 10-90% rise time of a first-order response is ln(9) time constants.
_RISE_TO_TAU = 1.0 / math.log(9.0)


def _check_port_map(port_map: Mapping[tuple[int, int], str]) -> None:
    if set(port_map.keys()) != set(DEFAULT_PORT_MAP.keys()):
        raise ConfigError("port_map must assign all four 2-bit words")
    if sorted(port_map.values()) != sorted(PORTS):
        raise ConfigError("port_map must be a bijection onto RF1..RF4")


@dataclass(frozen=True)
class MuxModel:
    """Multiplexer behavioral parameters.

    v_threshold      : turn-on voltage (V)
    static_coeff     : cubic coefficient of core static power above
                       threshold (W/V^3), anchored so the total at 0.7 V
                       is 0.60 uW including the ESD share
    esd_static       : constant ESD-clamp leakage above threshold (W)
    subthreshold_leak: static power below threshold (W), default 0
    dyn_coeff        : dynamic dissipation per switch event (J/Hz/V^2),
                       parallel mode (full RF-switch gate charge)
    dyn_coeff_serial : same with only the digital logic toggling
    isolation_db     : worst-case port-to-port isolation (positive dB)
    insertion_loss_db: through-path loss (positive dB)
    rise_time        : 10-90% switching rise/fall time (s)
    port_map         : (D1, D0) -> RF port assignment
    """

    v_threshold: float = 0.6
    static_coeff: float = 2.3e-4
    esd_static: float = 0.37e-6
    subthreshold_leak: float = 0.0
    dyn_coeff: float = 1.0e-12
    dyn_coeff_serial: float = 0.26e-12
    isolation_db: float = 30.0
    insertion_loss_db: float = 2.3
    rise_time: float = 2.6e-9
    port_map: Mapping[tuple[int, int], str] = field(
        default_factory=lambda: dict(DEFAULT_PORT_MAP)
    )

    def __post_init__(self):
        if self.v_threshold <= 0:
            raise ConfigError("v_threshold must be positive")
        if self.isolation_db < 0 or self.insertion_loss_db < 0:
            raise ConfigError("isolation and insertion loss must be >= 0 dB")
        if self.rise_time < 0:
            raise ConfigError("rise_time must be >= 0")
        if not self.dyn_coeff_serial < self.dyn_coeff:
            raise ConfigError("serial-only switching must dissipate less than parallel")
        _check_port_map(self.port_map)

    @classmethod
    def from_anchor(
        cls,
        v_threshold: float,
        anchor_v: float,
        anchor_power: float,
        esd_static: float = 0.0,
        **kwargs,
    ) -> "MuxModel":
        """Anchor the cubic so total static power hits anchor_power at anchor_v.

        Used for the projected low-threshold device variant, where the
        published 30 nW at 0.3 V presumes a redesign rather than the
        measured curve.
        """
        if anchor_v <= v_threshold:
            raise ConfigError("anchor voltage must lie above threshold")
        coeff = (anchor_power - esd_static) / (anchor_v - v_threshold) ** 3
        return cls(
            v_threshold=v_threshold,
            static_coeff=coeff,
            esd_static=esd_static,
            **kwargs,
        )

    def static_power(self, v_dd: float) -> float:
        """Static dissipation (W): leakage below threshold, cubic above."""
        if v_dd < 0:
            raise ValueError("v_dd must be >= 0")
        if v_dd < self.v_threshold:
            return self.subthreshold_leak
        over = v_dd - self.v_threshold
        return self.subthreshold_leak + self.esd_static + self.static_coeff * over**3

    def dynamic_power(self, switch_rate: float, v_dd: float, mode: str = "parallel") -> float:
        """Switching dissipation (W): coeff * v_dd^2 * rate."""
        if switch_rate < 0:
            raise ValueError("switch_rate must be >= 0")
        if mode == "parallel":
            coeff = self.dyn_coeff
        elif mode == "serial_digital_only":
            coeff = self.dyn_coeff_serial
        else:
            raise ValueError(f"unknown switching mode {mode!r}")
        return coeff * v_dd * v_dd * switch_rate

    def floor_amplitude(self) -> float:
        """Leakage amplitude to an unselected port, 10^(-isolation/20)."""
        return 10.0 ** (-self.isolation_db / 20.0)

    def insertion_amplitude(self) -> float:
        """Amplitude transmission of the selected path, 10^(-IL/20)."""
        return 10.0 ** (-self.insertion_loss_db / 20.0)

    def to_dict(self) -> dict:
        return {
            "v_threshold_v": self.v_threshold,
            "static_coeff_w_per_v3": self.static_coeff,
            "esd_static_w": self.esd_static,
            "subthreshold_leak_w": self.subthreshold_leak,
            "dyn_coeff_j_per_hz_v2": self.dyn_coeff,
            "dyn_coeff_serial_j_per_hz_v2": self.dyn_coeff_serial,
            "isolation_db": self.isolation_db,
            "insertion_loss_db": self.insertion_loss_db,
            "rise_time_s": self.rise_time,
            "port_map": {f"{d1}{d0}": port for (d1, d0), port in self.port_map.items()},
        }

    @classmethod
    def from_dict(cls, cfg: Mapping) -> "MuxModel":
        """Build from a JSON-style mapping with unit-suffixed keys."""
        known = {
            "v_threshold_v": "v_threshold",
            "static_coeff_w_per_v3": "static_coeff",
            "esd_static_w": "esd_static",
            "subthreshold_leak_w": "subthreshold_leak",
            "dyn_coeff_j_per_hz_v2": "dyn_coeff",
            "dyn_coeff_serial_j_per_hz_v2": "dyn_coeff_serial",
            "isolation_db": "isolation_db",
            "insertion_loss_db": "insertion_loss_db",
            "rise_time_s": "rise_time",
        }
        kwargs = {}
        for key, value in cfg.items():
            if key in known:
                kwargs[known[key]] = float(value)
            elif key == "port_map":
                kwargs["port_map"] = {
                    (int(word[0]), int(word[1])): port for word, port in value.items()
                }
            else:
                raise ConfigError(f"unknown MuxModel key {key!r}")
        return cls(**kwargs)


def low_threshold_mux(**kwargs) -> MuxModel:
    """Projected low-threshold device: 30 nW total static at 0.3 V bias."""
    return MuxModel.from_anchor(
        v_threshold=0.2, anchor_v=0.3, anchor_power=30e-9, esd_static=0.0, **kwargs
    )


# ---------------------------------------------------------------------------
# Digital programming state machine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MuxDigitalState:
    """Digital state of the programming interface (pure value semantics).

    mode is derived from PS: high selects serial programming through the
    shift register, low selects combinational parallel control.
    """

    ps: int
    le: int = 0
    shift_register: tuple[int, int] = (0, 0)
    latched_word: tuple[int, int] = (0, 0)
    selected_port: str = "RF1"
    port_map: Mapping[tuple[int, int], str] = field(
        default_factory=lambda: dict(DEFAULT_PORT_MAP)
    )

    def __post_init__(self):
        _check_port_map(self.port_map)

    @property
    def mode(self) -> str:
        return "serial" if self.ps else "parallel"

    @classmethod
    def serial(cls, port_map: Mapping | None = None) -> "MuxDigitalState":
        pm = dict(port_map) if port_map is not None else dict(DEFAULT_PORT_MAP)
        return cls(ps=1, selected_port=pm[(0, 0)], port_map=pm)

    @classmethod
    def parallel(cls, port_map: Mapping | None = None) -> "MuxDigitalState":
        pm = dict(port_map) if port_map is not None else dict(DEFAULT_PORT_MAP)
        return cls(ps=0, selected_port=pm[(0, 0)], port_map=pm)


def _as_bits(stream: Sequence[int], name: str) -> tuple[int, ...]:
    bits = tuple(int(b) for b in stream)
    if any(b not in (0, 1) for b in bits):
        raise ProtocolError(f"{name} must contain only bits")
    return bits


def program_serial(
    state: MuxDigitalState,
    clk_edges: Sequence[int],
    serin: Sequence[int],
    le_pulse: int | None = None,
) -> MuxDigitalState:
    """Clock a serial bit stream into the shift register.

    clk_edges and serin are equal-length slot sequences: a 1 in clk_edges
    marks a rising clock edge at that slot, shifting the serin bit of the
    same slot into the register. le_pulse, when given, is the slot index
    after which the latch-enable line pulses high, committing the register
    contents to the latched word and updating the selected port (-1 latches
    before any clocking, len(clk_edges) after the final slot).
    """
    if state.mode != "serial":
        raise ModeViolationError("serial programming requires PS high")
    clk = _as_bits(clk_edges, "clk_edges")
    dat = _as_bits(serin, "serin")
    if len(clk) != len(dat):
        raise ProtocolError(
            f"stream length mismatch: {len(clk)} clock slots vs {len(dat)} data bits"
        )
    if le_pulse is not None and not (-1 <= le_pulse <= len(clk)):
        raise ProtocolError("le_pulse index outside the stream")

    reg = state.shift_register
    word = state.latched_word
    port = state.selected_port

    if le_pulse == -1:
        word = reg
        port = state.port_map[word]
    for slot, (edge, bit) in enumerate(zip(clk, dat)):
        if edge:
            reg = (reg[1], bit)
        if le_pulse == slot:
            word = reg
            port = state.port_map[word]
    return replace(state, shift_register=reg, latched_word=word, selected_port=port, le=0)


def program_parallel(state: MuxDigitalState, d1: int, d0: int, le: int = 1) -> MuxDigitalState:
    """Drive the parallel control lines (combinational, no clock).

    With LE high the selected port follows (D1, D0) immediately; with LE
    low the chip is deselected and the stored port is held.
    """
    if state.mode != "parallel":
        raise ModeViolationError("parallel programming requires PS low")
    d1, d0, le = int(d1), int(d0), int(le)
    if le:
        port = state.port_map[(d1, d0)]
        return replace(state, selected_port=port, latched_word=(d1, d0), le=1)
    return replace(state, le=0)


def active_port(state: MuxDigitalState, le_low_policy: str = "hold") -> str | None:
    """RF-wise active port. With LE low in parallel mode, the default
    policy holds the last selected port; 'all_off' reports no active port."""
    if state.mode == "parallel" and not state.le:
        if le_low_policy == "all_off":
            return None
        if le_low_policy != "hold":
            raise ConfigError(f"unknown le_low_policy {le_low_policy!r}")
    return state.selected_port


# ---------------------------------------------------------------------------
# Port gating envelope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GatingSchedule:
    """Time-ordered port selections and the leakage floor they gate against.

    events is a sequence of (time_s, port): at each time the multiplexer
    switches to the given port. Before the first event no port is selected
    and every port sits at the leakage floor.
    """

    events: tuple[tuple[float, str], ...]
    floor_amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "events", tuple((float(t), p) for t, p in self.events))
        times = [t for t, _ in self.events]
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ConfigError("schedule events must be strictly increasing in time")
        for _, port in self.events:
            if port not in PORTS:
                raise ConfigError(f"unknown port {port!r}")
        if not 0.0 < self.floor_amplitude <= 1.0:
            raise ConfigError("floor_amplitude must lie in (0, 1]")

    @classmethod
    def from_mux(cls, mux: MuxModel, events: Sequence[tuple[float, str]]) -> "GatingSchedule":
        return cls(events=tuple(events), floor_amplitude=mux.floor_amplitude())

    def to_dict(self) -> dict:
        return {
            "events": [[t, port] for t, port in self.events],
            "floor_amplitude": self.floor_amplitude,
        }

    @classmethod
    def from_dict(cls, cfg: Mapping) -> "GatingSchedule":
        unknown = set(cfg) - {"events", "floor_amplitude"}
        if unknown:
            raise ConfigError(f"unknown GatingSchedule keys {sorted(unknown)}")
        return cls(
            events=tuple((float(t), str(port)) for t, port in cfg.get("events", ())),
            floor_amplitude=float(cfg["floor_amplitude"]),
        )


def _knot_levels(schedule: GatingSchedule, target_port: str):
    times = np.array([t for t, _ in schedule.events])
    levels = np.array(
        [1.0 if port == target_port else schedule.floor_amplitude for _, port in schedule.events]
    )
    return times, levels


def gating_envelope(
    schedule: GatingSchedule,
    target_port: str,
    t: float | np.ndarray,
    rise_time: float,
) -> float | np.ndarray:
    """Transmission amplitude factor toward target_port at time t.

    Values lie in [floor_amplitude, 1]. Transitions follow a first-order
    exponential whose 10-90% rise time equals rise_time; rise_time = 0
    gives an ideal step (right-continuous at event times).
    """
    if target_port not in PORTS:
        raise ConfigError(f"unknown port {target_port!r}")
    if rise_time < 0:
        raise ConfigError("rise_time must be >= 0")
    t_arr = np.asarray(t, dtype=float)
    floor = schedule.floor_amplitude
    if not schedule.events:
        out = np.full_like(t_arr, floor)
        return float(out) if np.isscalar(t) else out

    times, levels = _knot_levels(schedule, target_port)
    idx = np.searchsorted(times, t_arr, side="right") - 1

    if rise_time == 0.0:
        out = np.where(idx < 0, floor, levels[np.clip(idx, 0, None)])
        return float(out) if np.isscalar(t) else out

    tau = rise_time * _RISE_TO_TAU
    # value approached from the left at each event time, chained recursively
    y_at = np.empty(len(times))
    y = floor
    for k in range(len(times)):
        if k > 0:
            y = levels[k - 1] + (y - levels[k - 1]) * math.exp(-(times[k] - times[k - 1]) / tau)
        y_at[k] = y
    safe = np.clip(idx, 0, None)
    target = levels[safe]
    start = y_at[safe]
    decay = np.exp(-(t_arr - times[safe]) / tau)
    out = np.where(idx < 0, floor, target + (start - target) * decay)
    return float(out) if np.isscalar(t) else out


class EnvelopeModulator:
    """Callable time -> [floor, 1] for one target port of a schedule.

    Exposes the schedule's event times as breakpoints so integrators can
    align their step grid with the discontinuities.
    """

    def __init__(self, schedule: GatingSchedule, target_port: str, rise_time: float):
        self.schedule = schedule
        self.target_port = target_port
        self.rise_time = rise_time
        self.breakpoints = tuple(t for t, _ in schedule.events)

    def __call__(self, t):
        return gating_envelope(self.schedule, self.target_port, t, self.rise_time)


def power_sweep_csv(mux: MuxModel, voltages: Sequence[float], path) -> None:
    """Write the static power curve as (v_dd_v, power_w, unit) CSV rows."""
    lines = ["v_dd_v,power_w,unit"]
    for v in voltages:
        lines.append(f"{float(v)!r},{mux.static_power(float(v))!r},W")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def envelope_csv(
    schedule: GatingSchedule,
    target_port: str,
    rise_time: float,
    times: Sequence[float],
    path,
) -> None:
    """Write a gating envelope as (time_s, amplitude, unit) CSV rows."""
    lines = ["time_s,amplitude,unit"]
    for t in times:
        value = gating_envelope(schedule, target_port, float(t), rise_time)
        lines.append(f"{float(t)!r},{value!r},dimensionless")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Cooling budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoolingBudget:
    """Available cooling power and the per-channel dissipation (W)."""

    cooling_power: float
    per_channel_power: float

    def __post_init__(self):
        if self.cooling_power <= 0 or self.per_channel_power <= 0:
            raise ConfigError("cooling budget fields must be strictly positive")


def qubit_capacity(budget: CoolingBudget) -> int:
    """Number of channels that fit the budget: floor(cooling / per-channel).

    A one-ulp relative guard keeps exact ratios from flooring down."""
    ratio = budget.cooling_power / budget.per_channel_power
    return int(math.floor(ratio * (1.0 + 1e-12)))


def per_channel_budget(cooling_power: float, qubit_count: int) -> float:
    """Inverse query: dissipation allowed per channel for a target count."""
    if cooling_power <= 0 or qubit_count <= 0:
        raise ConfigError("cooling power and qubit count must be positive")
    return cooling_power / qubit_count
