from rtlloop.frontend import ast as A
from rtlloop.frontend import parse, parse_source, tokenize
from rtlloop.frontend.parser import MAX_DIAGNOSTICS

from conftest import parse_ok


def test_empty_module():
    r = parse_source("module m; endmodule")
    assert r.diagnostics == []
    assert r.ok
    (m,) = r.ast.modules
    assert (m.name, m.ports, m.items) == ("m", [], [])


def test_ports_and_ranges():
    tree = parse_ok("module m(input clk, input [7:0] d, output reg [3:0] q); endmodule")
    m = tree.module("m")
    assert [(p.name, p.direction, p.kind) for p in m.ports] == [
        ("clk", "input", "wire"), ("d", "input", "wire"), ("q", "output", "reg")]
    assert m.port("d").range.msb.literal.value == 7


def test_non_ansi_ports_normalize_to_ansi():
    a = parse_ok("module m(a, q); input [3:0] a; output q; reg q; "
                 "always @(*) q = a[0]; endmodule")
    b = parse_ok("module m(input [3:0] a, output reg q); always @(*) q = a[0]; endmodule")
    assert a == b


def test_always_sensitivities():
    tree = parse_ok("module m(input clk, input rstn, input d, output reg q, output reg c);\n"
                    "always @(posedge clk or negedge rstn) q <= d;\n"
                    "always @(*) c = d;\nendmodule")
    seq, comb = tree.modules[0].items_of(A.AlwaysBlock)
    assert [(e.polarity, e.signal.name) for e in seq.sensitivity] == [
        ("posedge", "clk"), ("negedge", "rstn")]
    assert comb.is_star and comb.is_combinational and not seq.is_combinational


def test_case_arms_and_default():
    tree = parse_ok("module m(input [1:0] s, output reg [1:0] o);\n"
                    "always @(*) casez (s) 2'b1?: o = 1; 2'b00, 2'b01: o = 2; "
                    "default: o = 0; endcase\nendmodule")
    case = tree.modules[0].items_of(A.AlwaysBlock)[0].body
    assert case.kind == "casez"
    assert [len(a.labels) for a in case.arms] == [1, 2]
    assert case.default is not None


def test_instantiation_named_and_positional():
    tree = parse_ok("module c(input a, output b); assign b = a; endmodule\n"
                    "module t(input x, output y, output z);\n"
                    "c #(.W(2)) u0 (.a(x), .b(y));\nc u1 (x, z);\nendmodule")
    u0, u1 = tree.module("t").items_of(A.Instantiation)
    assert [c.name for c in u0.connections] == ["a", "b"]
    assert [c.name for c in u1.connections] == [None, None]
    assert u0.params[0].name == "W"


def test_operator_precedence():
    tree = parse_ok("module m(input [3:0] a, b, c, output y); assign y = a + b * c == a | b & c; "
                    "endmodule")
    e = tree.modules[0].items_of(A.ContinuousAssign)[0].value
    assert e.op == "|"
    assert e.left.op == "==" and e.left.left.op == "+" and e.left.left.right.op == "*"
    assert e.right.op == "&"


def test_every_node_has_a_span():
    tree = parse_ok("module m(input [1:0] a, output reg y); always @(*) begin "
                    "if (a[0]) y = ^a; else y = 1'b0; end endmodule")
    assert all(n.span is not None for n in tree.walk() if n is not tree)


def test_unresolved_identifier():
    r = parse_source("module m(output y); assign y = ghost; endmodule")
    assert [d.rule for d in r.diagnostics] == ["SYN001"]
    assert "ghost" in r.diagnostics[0].message


def test_brace_instead_of_end(listing):
    text, path = listing("listing1_begin_end.v")
    r = parse_source(text, path)
    d = [d for d in r.diagnostics if d.rule == "SYN000"][0]
    assert (d.span.line, d.span.col) == (3, 1)
    assert d.expected == "end" and d.found == "}"


def test_recovery_keeps_following_module():
    r = parse_source("module bad(input a); always @(*) begin } endmodule\n"
                     "module good(input a, output b); assign b = a; endmodule")
    assert r.ast.recovered
    assert r.ast.module("good") is not None
    assert not r.ast.module("good").has_errors
    assert r.ast.module("bad").has_errors


def test_recovery_monotonicity_on_garbage():
    good = "module ok(input a, output b); assign b = a; endmodule\n"
    for junk in ["module x(; always begin if ( ;", "} } ;;; end endcase",
                 "module y(input a); case (a) 1: ; ", "assign = = ;", "module"]:
        r = parse_source(junk + "\n" + good)
        assert r.ast.module("ok") is not None, junk


def test_determinism(listing):
    text, path = listing("listing2_case_endcase.v")
    a, b = parse_source(text, path), parse_source(text, path)
    assert a.ast == b.ast
    assert a.diagnostics == b.diagnostics


def test_diagnostic_order(listing):
    text, path = listing("listing2_case_endcase.v")
    diags = parse_source(text, path).diagnostics
    assert diags == sorted(diags, key=lambda d: (d.span.file, d.span.start, d.rule))


def test_diagnostic_flood_stops():
    text = "module m;\n" + "assign = ;\n" * (MAX_DIAGNOSTICS + 50) + "endmodule\n"
    r = parse_source(text)
    codes = [d.rule for d in r.diagnostics]
    assert codes[-1] == "SYN999" or "SYN999" in codes
    assert len(codes) <= MAX_DIAGNOSTICS + 1


def test_parse_reports_macro_table():
    r = parse_source("`define W 4\nmodule m(input [`W-1:0] a); endmodule")
    assert r.diagnostics == []
    assert "W" in r.macros
    assert r.ast.modules[0].ports[0].range.msb.op == "-"


def test_initial_and_delay_are_parsed():
    r = parse_source("module m(output reg q); initial q = 0; always @(*) #1 q = 1; endmodule")
    assert not any(d.is_error for d in r.diagnostics)
    m = r.ast.modules[0]
    assert m.items_of(A.InitialBlock)


def test_parse_from_token_list():
    toks, _ = tokenize("module m; endmodule")
    assert parse(toks).ok
