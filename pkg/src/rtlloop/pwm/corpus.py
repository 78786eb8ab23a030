"""The shipped reference Verilog for the PWM generator and its manifest."""

from __future__ import annotations

from importlib import resources

CORPUS_FILES = ("pwm_top.v", "up_counter.v", "pwm_comparator.v", "dff.v",
                "third_comparator.v", "sr_latch.v", "dead_time_gen.v")
TOP = "pwm_top"

# golden signal -> hierarchical name in the reference design
SIGNAL_MAP = {"pwm": "pwm", "pwm_n": "pwm_n",
              "c1": "u_cnt1.count", "c2": "u_cnt2.count", "c3": "u_cnt3.count"}


def _dir():
    return resources.files(__package__).joinpath("corpus")


def corpus_sources() -> dict:
    """File name -> Verilog text for the reference implementation."""
    return {name: _dir().joinpath(name).read_text() for name in CORPUS_FILES}


def manifest_bytes() -> bytes:
    return _dir().joinpath("manifest.json").read_bytes()


def dead_time_mutant() -> dict:
    """Reference sources with the dead-time tap removed from the main output."""
    src = corpus_sources()
    text = src["dead_time_gen.v"]
    mutated = text.replace("assign pwm = in & sr[DEAD-1];", "assign pwm = in;")
    assert mutated != text
    src["dead_time_gen.v"] = mutated
    return src
