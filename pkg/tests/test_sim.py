import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtlloop.frontend import Ast, parse_source
from rtlloop.sim import (MAX_SWEEPS, ElaborationError, SimulationError, Stimulus, StimulusError,
                         Write, elaborate, run)

from conftest import parse_ok


def design(src, top="m", **kw):
    return elaborate([parse_ok(src)], top, **kw)


TOGGLER = """module m(input clk, input rstn, output reg q);
always @(posedge clk or negedge rstn)
  if (!rstn) q <= 1'b0; else q <= ~q;
endmodule"""


def test_toggler():
    trace = run(design(TOGGLER), Stimulus(1), 6, ["q"])
    assert trace["q"] == [0, 1, 0, 1, 0, 1]


def test_one_assign_is_one_process():
    d = design("module m(input a, output y); assign y = ~a; endmodule")
    assert len(d.comb) == 1 and not d.edge
    assert run(d, Stimulus(1, (Write("a", 0, 1),)), 2, ["y"])["y"] == [0, 0]


def test_comb_cycle_names_signals():
    with pytest.raises(ElaborationError, match="combinational cycle through a, b"):
        design("module m(output a, output b); assign a = b; assign b = a; endmodule")


def test_bit_level_chain_is_not_a_cycle():
    d = design("""module m(input i, output [2:0] s);
assign s[0] = i;
assign s[1] = s[0];
assign s[2] = ~s[1];
endmodule""")
    assert run(d, Stimulus(1, (Write("i", 1, 1),)), 3, ["s"])["s"] == [4, 3, 3]


def test_instability_is_reported():
    d = design("module m(output [1:0] a); assign a = {a[0], ~a[1]}; endmodule")
    with pytest.raises(SimulationError, match="combinational instability"):
        run(d, Stimulus(1), 1)
    assert MAX_SWEEPS == 1000


@pytest.mark.parametrize("src, needle", [
    ("module m(input a, output y); ghost u (.a(a), .y(y)); endmodule", "unknown"),
    ("""module m(input clk, input clk2, output reg q, output reg r);
always @(posedge clk) q <= ~q;
always @(posedge clk2) r <= ~r;
endmodule""", "clk2"),
    ("module m(input clk, output reg q); always @(negedge clk) q <= ~q; endmodule", "negative"),
    ("module m(input a, output y); assign y = a;\nendmodule\nmodule m(input a, output y); "
     "assign y = ~a; endmodule", "more than once"),
])
def test_elaboration_errors(src, needle):
    with pytest.raises(ElaborationError, match=needle):
        elaborate([parse_source(src, "t.v").ast], "m")


def test_missing_top():
    with pytest.raises(ElaborationError, match="nope"):
        design(TOGGLER, top="nope")


def test_sources_with_errors_are_refused(listing):
    tree = parse_source(*listing("listing1_begin_end.v")).ast
    with pytest.raises(ElaborationError):
        elaborate([tree], "listing1")


def test_stimulus_errors():
    d = design(TOGGLER)
    with pytest.raises(StimulusError, match="not an input"):
        run(d, Stimulus(1, (Write("nope", 0, 1),)), 2)
    with pytest.raises(StimulusError, match="clock"):
        run(d, Stimulus(1, (Write("clk", 0, 1),)), 2)
    with pytest.raises(StimulusError, match="does not fit"):
        run(d, Stimulus(1, (Write("rstn", 0, 2),)), 2)
    with pytest.raises(StimulusError):
        Stimulus(0)
    with pytest.raises(StimulusError, match="JSON"):
        Stimulus.load(b"{")
    with pytest.raises(StimulusError, match="malformed"):
        Stimulus.load(b'{"writes": [{"signal": "duty"}]}')
    with pytest.raises(ValueError):
        run(d, Stimulus(1), 0)


def test_stimulus_json_round_trip():
    s = Stimulus(3, (Write("duty", 0, 64), Write("duty", 100, 128)))
    assert Stimulus.load(json.dumps(s.as_json()).encode()) == s
    assert Stimulus.load(b'{"writes": [{"signal": "duty", "cycle": 0, "value": 64}]}') \
        == Stimulus(4, (Write("duty", 0, 64),))


def test_corpus_structure(corpus_asts):
    d = elaborate(corpus_asts, "pwm_top")
    for k in (1, 2, 3):
        assert d.signals[f"u_cnt{k}.count"].width == 8
        assert d.kinds()[f"u_cnt{k}.count"] == "state"
        assert d.kinds()[f"u_dt{k}.sr"] == "state"
    assert {"u_lat2.state", "u_lat3.state"} <= set(d.signals)
    assert d.inputs == ("clk", "rstn", "en", "duty")
    assert d.outputs == ("pwm", "pwm_n")


def test_nonblocking_swap_register():
    src = """module m(input clk, input rstn, output reg a, output reg b);
always @(posedge clk or negedge rstn) if (!rstn) a <= 1'b1; else a <= b;
always @(posedge clk or negedge rstn) if (!rstn) b <= 1'b0; else b <= a;
endmodule"""
    trace = run(design(src), Stimulus(2), 6, ["a", "b"])
    assert trace["a"] == [1, 1, 0, 1, 0, 1]
    assert trace["b"] == [0, 0, 1, 0, 1, 0]


def test_process_order_never_matters():
    blocks = [
        "always @(posedge clk or negedge rstn) if (!rstn) s0 <= 4'd1; else s0 <= s3 ^ {3'd0, i};",
        "always @(posedge clk or negedge rstn) if (!rstn) s1 <= 4'd0; else s1 <= s0 + s2;",
        "always @(posedge clk) s2 <= s1 - 4'd3;",
        "always @(posedge clk or negedge rstn) if (!rstn) s3 <= 4'd9; else s3 <= {s2[0], s1[3:1]};",
        "assign y = s0 & s3;",
    ]
    head = ("module m(input clk, input rstn, input i, output [3:0] y);\n"
            "reg [3:0] s0, s1, s2, s3;\n")
    stim = Stimulus(2, tuple(Write("i", t, t % 3 == 0) for t in range(0, 40, 5)))
    rec = ["s0", "s1", "s2", "s3", "y"]
    ref = run(design(head + "\n".join(blocks) + "\nendmodule"), stim, 40, rec)
    rng = random.Random(11)
    for _ in range(6):
        rng.shuffle(blocks)
        got = run(design(head + "\n".join(blocks) + "\nendmodule"), stim, 40, rec)
        assert got == ref


def test_blocking_inside_clocked_block():
    d = design("""module m(input clk, input rstn, input [3:0] a, output reg [3:0] y);
reg [3:0] t;
always @(posedge clk or negedge rstn)
  if (!rstn) begin t = 4'd0; y <= 4'd0; end
  else begin t = a + 4'd1; y <= t + t; end
endmodule""")
    trace = run(d, Stimulus(1, (Write("a", 0, 3),)), 3, ["y", "t"])
    assert trace["y"] == [0, 8, 8] and trace["t"] == [0, 4, 4]


def test_determinism_and_two_state_closure(corpus_asts):
    d = elaborate(corpus_asts, "pwm_top")
    stim = Stimulus(4, (Write("en", 0, 1), Write("duty", 0, 200), Write("duty", 300, 17)))
    a = run(d, stim, 600, list(d.signals))
    b = run(d, stim, 600, list(d.signals))
    assert a == b
    for name, values in a.signals.items():
        assert all(0 <= v < 1 << a.widths[name] for v in values)


def test_reset_dominance(corpus_asts):
    d = elaborate(corpus_asts, "pwm_top")
    R = 12
    stim = Stimulus(R, (Write("en", 0, 1), Write("duty", 0, 128)))
    state = [n for n, k in d.kinds().items() if k == "state"]
    trace = run(d, stim, R + 20, state)
    for n in state:
        assert trace[n][:R] == [0] * R, n
    assert any(trace[n][R:] != [0] * 20 for n in state)


def test_active_high_reset():
    src = """module m(input clk, input rst, output reg [1:0] q);
always @(posedge clk or posedge rst) if (rst) q <= 2'd2; else q <= q + 2'd1;
endmodule"""
    d = design(src, reset="rst", reset_active_low=False)
    assert run(d, Stimulus(2), 5, ["q"])["q"] == [2, 2, 3, 0, 1]


def test_parameters_and_hierarchy():
    src = """module inc #(parameter W = 4, parameter STEP = 1) (input [W-1:0] a, output [W-1:0] y);
assign y = a + STEP;
endmodule
module m(input [5:0] a, output [5:0] y, output [5:0] z);
wire [5:0] mid;
inc #(.W(6), .STEP(3)) u1 (.a(a), .y(mid));
inc #(6, 2) u2 (.a(mid), .y(y));
assign z = u1_alias;
wire [5:0] u1_alias = mid;
endmodule"""
    d = design(src)
    assert d.signals["u1.y"].width == 6
    trace = run(d, Stimulus(1, (Write("a", 0, 62),)), 1, ["y", "z", "u1.y"])
    assert (trace["y"], trace["z"]) == ([3], [1])


def test_case_and_memoryless_logic():
    d = design("""module m(input [1:0] s, input [7:0] a, output reg [7:0] y);
always @(*) begin
  case (s)
    2'd0: y = a;
    2'd1, 2'd2: y = a >> 1;
    default: y = ~a;
  endcase
end
endmodule""")
    writes = [Write("a", 0, 0x35)] + [Write("s", t, t) for t in range(4)]
    assert run(d, Stimulus(1, tuple(writes)), 4, ["y"])["y"] == [0x35, 0x1A, 0x1A, 0xCA]


def test_four_state_and_ignored_constructs_warn():
    d = design("""module m(input a, output y, output reg r);
assign #3 y = a | 1'bx;
initial r = 1'b1;
endmodule""")
    codes = sorted(w.rule for w in d.warnings)
    assert codes == ["SIM002", "SIM003", "SIM003"]
    assert run(d, Stimulus(1, (Write("a", 0, 0),)), 1, ["y"])["y"] == [0]


# -- expression semantics against an independent evaluator -------------------------

W_IN = 8


def gen_expr(rng, depth):
    """Return (verilog text, tree) over 8-bit inputs a, b, c."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            n = rng.choice("abc")
            return n, ("var", n)
        v = rng.randrange(256)
        return f"8'd{v}", ("lit", v)
    kind = rng.choice(["bin", "bin", "bin", "un", "cmp", "shift", "tern", "red"])
    if kind == "bin":
        op = rng.choice(["+", "-", "*", "&", "|", "^"])
        lt, l = gen_expr(rng, depth - 1)
        rt, r = gen_expr(rng, depth - 1)
        return f"({lt} {op} {rt})", ("bin", op, l, r)
    if kind == "un":
        t, e = gen_expr(rng, depth - 1)
        op = rng.choice(["~", "-"])
        return f"({op}{t})", ("un", op, e)
    if kind == "cmp":
        op = rng.choice(["==", "!=", "<", ">=", "&&", "||"])
        lt, l = gen_expr(rng, depth - 1)
        rt, r = gen_expr(rng, depth - 1)
        return f"({lt} {op} {rt})", ("cmp", op, l, r)
    if kind == "shift":
        op = rng.choice(["<<", ">>"])
        t, e = gen_expr(rng, depth - 1)
        k = rng.randrange(10)
        return f"({t} {op} {k})", ("shift", op, e, k)
    if kind == "red":
        op = rng.choice(["&", "|", "^"])
        t, e = gen_expr(rng, depth - 1)
        return f"({op}{t})", ("red", op, e)
    ct, c = gen_expr(rng, depth - 1)
    lt, l = gen_expr(rng, depth - 1)
    rt, r = gen_expr(rng, depth - 1)
    return f"({ct} ? {lt} : {rt})", ("tern", c, l, r)


def self_width(node):
    tag = node[0]
    if tag in ("var", "lit"):
        return W_IN
    if tag in ("cmp", "red"):
        return 1
    if tag in ("un", "shift"):
        return self_width(node[2])
    if tag == "bin":
        return max(self_width(node[2]), self_width(node[3]))
    return max(self_width(node[2]), self_width(node[3]))


def evaluate(node, env, w):
    """Evaluate ``node`` in a context of width ``w`` (at least its own width)."""
    w = max(w, self_width(node))
    mask = (1 << w) - 1
    tag = node[0]
    if tag == "var":
        return env[node[1]]
    if tag == "lit":
        return node[1]
    if tag == "bin":
        a, b = evaluate(node[2], env, w), evaluate(node[3], env, w)
        return {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b,
                "^": a ^ b}[node[1]] & mask
    if tag == "un":
        a = evaluate(node[2], env, w)
        return (~a if node[1] == "~" else -a) & mask
    if tag == "cmp":
        op = node[1]
        if op in ("&&", "||"):
            a, b = evaluate(node[2], env, 0) != 0, evaluate(node[3], env, 0) != 0
            return int(a and b) if op == "&&" else int(a or b)
        inner = max(self_width(node[2]), self_width(node[3]))
        a, b = evaluate(node[2], env, inner), evaluate(node[3], env, inner)
        return int({"==": a == b, "!=": a != b, "<": a < b, ">=": a >= b}[op])
    if tag == "shift":
        a = evaluate(node[2], env, w)
        return (a << node[3]) & mask if node[1] == "<<" else a >> node[3]
    if tag == "red":
        inner = self_width(node[2])
        a = evaluate(node[2], env, inner)
        bits = [(a >> i) & 1 for i in range(inner)]
        if node[1] == "&":
            return int(all(bits))
        return int(any(bits)) if node[1] == "|" else sum(bits) & 1
    c = evaluate(node[1], env, 0)
    return evaluate(node[2], env, w) if c else evaluate(node[3], env, w)


@pytest.mark.parametrize("seed", range(200))
def test_expressions_match_reference_evaluator(seed):
    rng = random.Random(seed)
    out_w = rng.choice([8, 12, 16])
    text, tree = gen_expr(rng, 4)
    d = design(f"module m(input [7:0] a, input [7:0] b, input [7:0] c, output [{out_w - 1}:0] y);"
               f"\nassign y = {text};\nendmodule")
    envs = [{n: rng.randrange(256) for n in "abc"} for _ in range(8)]
    writes = tuple(Write(n, t, env[n]) for t, env in enumerate(envs) for n in "abc")
    got = run(d, Stimulus(1, writes), len(envs), ["y"])["y"]
    want = [evaluate(tree, env, out_w) for env in envs]
    assert got == want, text


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 255), min_size=1, max_size=20))
def test_counter_tracks_enable(ens):
    src = """module m(input clk, input rstn, input en, output reg [7:0] n);
always @(posedge clk or negedge rstn) if (!rstn) n <= 8'd0; else if (en) n <= n + 8'd1;
endmodule"""
    bits = [e & 1 for e in ens]
    writes = tuple(Write("en", t + 1, b) for t, b in enumerate(bits))
    trace = run(design(src), Stimulus(1, writes), len(bits) + 1, ["n"])
    expected, n = [0], 0
    for b in bits:
        n = (n + b) & 0xFF
        expected.append(n)
    assert trace["n"] == expected
