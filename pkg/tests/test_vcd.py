import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtlloop.pwm import run_golden, PwmConfig, sweep_schedule
from rtlloop.sim import Trace, VcdError, read_vcd, write_vcd


def value_lines(vcd: bytes):
    body = vcd.decode().split("$enddefinitions $end", 1)[1]
    return [ln for ln in body.splitlines() if ln and ln[0] in "01b"]


def test_constant_signal_has_one_entry():
    vcd = write_vcd(Trace(10, {"k": [5] * 10}, {"k": 4}))
    assert value_lines(vcd) == ["b101 !"]
    assert read_vcd(vcd) == Trace(10, {"k": [5] * 10}, {"k": 4})


def test_toggler_alternates():
    vcd = write_vcd(Trace(5, {"q": [0, 1, 0, 1, 0]}, {"q": 1}), "m").decode()
    after = vcd.split("$end\n#1", 1)[1]
    assert after.split() == ["1!", "#2", "0!", "#3", "1!", "#4", "0!", "#5"]


def test_header():
    vcd = write_vcd(Trace(2, {"u.x": [0, 1], "y": [2, 2]}, {"u.x": 1, "y": 2}), "top",
                    {"y": "state"}).decode()
    assert "$timescale 1ns $end" in vcd
    assert "$scope module top $end" in vcd and "$scope module u $end" in vcd
    assert "$var reg 2" in vcd and "$var wire 1" in vcd
    assert "$dumpvars" in vcd


def test_empty_trace_is_refused():
    with pytest.raises(VcdError):
        write_vcd(Trace(0, {}, {}))


def test_reader_rejects_garbage():
    with pytest.raises(VcdError):
        read_vcd(b"$enddefinitions $end\n#0\n?? !\n")
    with pytest.raises(VcdError):
        read_vcd(b'$var wire 1 ! a $end\n$enddefinitions $end\n#5\n1!\n#2\n')


def test_golden_sweep_round_trip():
    trace = run_golden(PwmConfig(), sweep_schedule(cycles=2048), 4, 2048)
    assert read_vcd(write_vcd(trace, "pwm_golden")) == trace


name = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True)


@st.composite
def traces(draw):
    cycles = draw(st.integers(1, 40))
    names = draw(st.lists(st.lists(name, min_size=1, max_size=3).map(".".join),
                          min_size=1, max_size=6, unique=True))
    leaves = set(names)
    # a name cannot be both a signal and a scope prefix of another signal
    names = [n for n in names if not any(m.startswith(n + ".") for m in leaves)]
    widths = {n: draw(st.integers(1, 70)) for n in names}
    signals = {n: draw(st.lists(st.integers(0, (1 << widths[n]) - 1),
                                min_size=cycles, max_size=cycles)) for n in names}
    return Trace(cycles, signals, widths)


@settings(max_examples=200, deadline=None)
@given(traces())
def test_round_trip(trace):
    assert read_vcd(write_vcd(trace)) == trace


@settings(max_examples=50, deadline=None)
@given(traces())
def test_csv_round_trip(trace):
    assert Trace.from_csv(trace.to_csv(), trace.widths) == trace


def test_trace_validation():
    with pytest.raises(ValueError, match="samples"):
        Trace(3, {"a": [0, 1]}, {"a": 1})
    with pytest.raises(ValueError, match="outside"):
        Trace(1, {"a": [4]}, {"a": 2})
    t = Trace(3, {"a": [1, 2, 3]}, {"a": 2})
    assert t.bit("a", 1) == [0, 1, 1]
    assert t.select(["a"]) == t
