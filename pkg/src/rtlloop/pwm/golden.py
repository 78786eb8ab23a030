"""Behavioral model of the three-phase complementary PWM generator.

Per phase: up counter -> comparator against (resolution - duty) -> DFF ->
dead-time shift register, with the main output the AND of the DFF output and
its delayed copy and the complement the NOR of the two.  Phases 2 and 3 start
counting once the previous counter reaches the phase threshold, held by a
set-dominant latch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from ..sim.trace import Trace

PHASES = 3


@dataclass(frozen=True)
class PwmConfig:
    width: int = 8
    dead_cycles: int = 4
    phase: int = 85

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("counter width must be positive")
        if not 0 < self.phase < self.resolution:
            raise ValueError(f"phase threshold must be in (0, {self.resolution})")
        if not 0 <= self.dead_cycles < self.resolution:
            raise ValueError(f"dead cycles must be in [0, {self.resolution})")

    @property
    def resolution(self) -> int:
        return 1 << self.width


@dataclass(frozen=True)
class PwmInputs:
    reset: bool = False      # asserted (the pin itself is active low)
    enable: bool = True
    duty: int = 0


@dataclass(frozen=True)
class PwmState:
    c: tuple = (0, 0, 0)         # counters
    en: tuple = (0, 0)           # stored phase enables for phases 2, 3
    q: tuple = (0, 0, 0)         # registered comparator outputs
    s: tuple = (0, 0, 0)         # dead-time shift registers, bit 0 newest


@dataclass(frozen=True)
class PwmOutputs:
    pwm: tuple
    pwm_n: tuple

    def word(self, which: str) -> int:
        bits = self.pwm if which == "pwm" else self.pwm_n
        return sum(b << k for k, b in enumerate(bits))


def pwm_outputs(state: PwmState, config: PwmConfig = PwmConfig()) -> PwmOutputs:
    d = config.dead_cycles
    delayed = [((s >> (d - 1)) & 1) if d else q for s, q in zip(state.s, state.q)]
    pwm = tuple(q & dl for q, dl in zip(state.q, delayed))
    pwm_n = tuple((1 - q) & (1 - dl) for q, dl in zip(state.q, delayed))
    return PwmOutputs(pwm, pwm_n)


def pwm_step(state: PwmState, inputs: PwmInputs, config: PwmConfig = PwmConfig()):
    """Advance one clock edge; returns (next state, outputs before the edge)."""
    res = config.resolution
    if not 0 <= inputs.duty < res:
        raise ValueError(f"duty {inputs.duty} outside [0, {res})")
    outputs = pwm_outputs(state, config)
    if inputs.reset:
        return PwmState(), outputs
    if not inputs.enable:
        return replace(state, q=(0, 0, 0), s=(0, 0, 0)), outputs

    threshold = res - inputs.duty           # needs width+1 bits: duty 0 never fires
    c1, c2, c3 = state.c
    raw = tuple(int(c >= threshold) for c in state.c)
    e2 = state.en[0] | int(c1 == config.phase)
    e3 = state.en[1] | int(c2 == config.phase)
    smask = (1 << config.dead_cycles) - 1
    nxt = PwmState(
        c=((c1 + 1) % res, (c2 + 1) % res if e2 else 0, (c3 + 1) % res if e3 else 0),
        en=(e2, e3),
        q=raw,
        s=tuple(((s << 1) | q) & smask for s, q in zip(state.s, state.q)),
    )
    return nxt, outputs


GOLDEN_WIDTHS = {"c1": 8, "c2": 8, "c3": 8, "en2": 1, "en3": 1, "q": 3, "s1": 4, "s2": 4,
                 "s3": 4, "pwm": 3, "pwm_n": 3}


def run_golden(config: PwmConfig = PwmConfig(), duty_schedule: Mapping[int, int] = None,
               reset_cycles: int = 4, cycles: int = 2048,
               enable_schedule: Mapping[int, int] = None) -> Trace:
    """Simulate ``cycles`` clock edges and record state and outputs after each.

    ``duty_schedule`` maps a cycle index to the duty applied from that cycle
    on and must define cycle 0.  Reset is asserted for the first
    ``reset_cycles`` cycles.
    """
    duty_schedule = {0: 0} if duty_schedule is None else dict(duty_schedule)
    if 0 not in duty_schedule:
        raise ValueError("duty schedule must define cycle 0")
    if reset_cycles < 1:
        raise ValueError("reset_cycles must be at least 1")
    enable_schedule = dict(enable_schedule or {0: 1})
    w, d = config.width, config.dead_cycles
    widths = dict(GOLDEN_WIDTHS, c1=w, c2=w, c3=w, s1=max(d, 1), s2=max(d, 1), s3=max(d, 1))
    names = list(widths)
    rec = {n: [] for n in names}
    state = PwmState()
    duty, enable = duty_schedule[0], enable_schedule.get(0, 1)
    for t in range(cycles):
        duty = duty_schedule.get(t, duty)
        enable = enable_schedule.get(t, enable)
        state, _ = pwm_step(state, PwmInputs(t < reset_cycles, bool(enable), duty), config)
        out = pwm_outputs(state, config)
        for k in range(PHASES):
            rec[f"c{k + 1}"].append(state.c[k])
            rec[f"s{k + 1}"].append(state.s[k])
        rec["en2"].append(state.en[0])
        rec["en3"].append(state.en[1])
        rec["q"].append(sum(b << k for k, b in enumerate(state.q)))
        rec["pwm"].append(out.word("pwm"))
        rec["pwm_n"].append(out.word("pwm_n"))
    return Trace(cycles, rec, widths)


SWEEP = {0: 0, 512: 64, 1024: 128, 1536: 192}


def sweep_schedule(duties=(0, 64, 128, 192), cycles: int = 2048) -> dict:
    """Evenly spaced duty steps across ``cycles``."""
    seg = cycles // len(duties)
    return {i * seg: d for i, d in enumerate(duties)}
