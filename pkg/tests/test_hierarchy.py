import json
import random
from collections import Counter

import pytest

from rtlloop.frontend import ast as A
from rtlloop.frontend import parse_source
from rtlloop.hierarchy import ManifestError, check, load_manifest, manifest_from_json
from rtlloop.pwm import corpus_sources
from rtlloop.pwm.corpus import manifest_bytes

from mutations import MUTATIONS, mutate


@pytest.fixture(scope="module")
def manifest():
    return load_manifest(manifest_bytes(), "manifest.json")


def parse_all(sources):
    return [parse_source(text, name).ast for name, text in sources.items()]


def tiny(**over):
    doc = {"top": "a", "clock": {"name": "clk"},
           "modules": [{"name": "a", "ports": [{"name": "clk", "dir": "input", "width": 1}]}]}
    doc.update(over)
    return doc


def test_pwm_manifest_shape(manifest):
    assert manifest.top == "pwm_top"
    assert len(manifest.modules) == 7
    assert manifest.clock.name == "clk"
    assert (manifest.reset.name, manifest.reset.active_low, manifest.reset.is_async) == \
        ("rstn", True, True)
    top = manifest.module("pwm_top")
    assert {p.name: p.width for p in top.ports}["duty"] == 8
    assert len(top.children) == 16
    order = manifest.build_order()
    assert order[-1] == "pwm_top" and set(order) == set(manifest.names())


def test_minimal_manifest():
    m = manifest_from_json(tiny())
    assert m.names() == ["a"] and m.reset is None and m.build_order() == ["a"]


def test_bad_json_has_location():
    with pytest.raises(ManifestError, match=r"m\.json:2:\d+"):
        load_manifest(b'{"top": "a",\n  oops}', "m.json")


@pytest.mark.parametrize("doc, needle", [
    (tiny(modules=[{"name": "a", "children": [{"module": "ghost", "instance": "g"}]}]), "ghost"),
    (tiny(modules=[{"name": "a"}, {"name": "a"}]), "duplicate module a"),
    (tiny(top="zz"), "zz"),
    (tiny(modules=[{"name": "a", "children": [{"module": "b", "instance": "u"}]},
                   {"name": "b", "children": [{"module": "a", "instance": "v"}]}]), "cycle"),
    (tiny(modules=[{"name": "a", "ports": [{"name": "p", "dir": "input"},
                                           {"name": "p", "dir": "output"}]}]), "duplicate port p"),
    (tiny(modules=[{"name": "a", "ports": [{"name": "p", "dir": "sideways"}]}]), "dir"),
    (tiny(modules=[{"name": "a", "ports": [{"name": "p", "dir": "input", "width": 0}]}]), "width"),
    (tiny(reset={"name": "r", "active": "sometimes"}), "active"),
    ({"top": "a"}, "clock"),
])
def test_invalid_manifests(doc, needle):
    with pytest.raises(ManifestError, match=needle):
        manifest_from_json(doc)


def test_frequency_is_accepted():
    m = manifest_from_json(tiny(clock={"name": "clk", "frequency_mhz": 100}))
    assert m.clock.frequency_mhz == 100
    with pytest.raises(ManifestError):
        manifest_from_json(tiny(clock={"name": "clk", "frequency_mhz": -1}))


def test_corpus_conforms(manifest, corpus_asts):
    report = check(manifest, corpus_asts)
    assert report.passed and report.diagnostics == [] and report.verdict == "pass"


@pytest.mark.parametrize("label, file, edits, code", MUTATIONS, ids=[m[0] for m in MUTATIONS])
def test_single_mutation_single_code(manifest, label, file, edits, code):
    report = check(manifest, parse_all(mutate(file, edits)))
    assert report.codes() == [code]
    assert report.verdict == "fail"


@pytest.mark.parametrize("label, file, edits, code",
                         [m for m in MUTATIONS if m[3] == "HC002"],
                         ids=[m[0] for m in MUTATIONS if m[3] == "HC002"])
def test_port_mutation_names_the_port(manifest, label, file, edits, code):
    (d,) = check(manifest, parse_all(mutate(file, edits))).diagnostics
    port = edits[0][0].rstrip(",").split()[-1]
    assert f"port {port} " in d.message


def test_broken_module_is_missing(manifest):
    src = corpus_sources()
    src["dff.v"] = src["dff.v"].replace("end\nendmodule", "}\nendmodule")
    report = check(manifest, parse_all(src))
    assert report.codes() == ["HC001"]
    assert "syntax errors" in report.diagnostics[0].message


def test_instance_count_is_multiset_difference(manifest):
    rng = random.Random(3)
    base = corpus_sources()["pwm_top.v"]
    lines = base.splitlines()
    inst_lines = [i for i, ln in enumerate(lines) if ln.strip().startswith(("up_counter",
                                                                               "sr_latch", "dff "))]
    spec = manifest.module("pwm_top")
    want = Counter((c.module, c.instance) for c in spec.children)
    for _ in range(20):
        picked = list(lines)
        for i in rng.sample(inst_lines, rng.randint(0, 3)):
            picked[i] = ""
        extra = [f"    dff u_x{k} (.clk(clk), .rstn(rstn), .en(en), .d(raw1), .q());"
                 for k in range(rng.randint(0, 2))]
        dup = [picked[i] for i in rng.sample(inst_lines, rng.randint(0, 2)) if picked[i]]
        picked[-1:-1] = extra + dup
        src = corpus_sources()
        src["pwm_top.v"] = "\n".join(picked)
        tree = parse_source(src["pwm_top.v"], "pwm_top.v").ast
        top = [m for m in tree.modules if m.name == "pwm_top"][0]
        have = Counter((i.module, i.name) for i in top.items_of(A.Instantiation))
        expected = sum(((want - have) + (have - want)).values())
        report = check(manifest, parse_all(src))
        assert report.codes().count("HC003") == expected


def test_verdict_independent_of_file_order(manifest):
    src = mutate("dff.v", [("input d,", "output d,")])
    src["helper.v"] = "module helper(input a, output b); assign b = a; endmodule"
    items = list(src.items())
    ref = check(manifest, parse_all(dict(items)))
    for seed in range(5):
        random.Random(seed).shuffle(items)
        assert check(manifest, parse_all(dict(items))).diagnostics == ref.diagnostics


def test_extra_module_is_a_warning(manifest, corpus_asts):
    helper = parse_source("module helper(input a, output b); assign b = a; endmodule", "h.v").ast
    report = check(manifest, corpus_asts + [helper])
    assert report.codes() == ["HC004"]
    assert report.passed


@pytest.mark.parametrize("old, new", [
    ("posedge clk or negedge rstn", "negedge clk or negedge rstn"),
    ("posedge clk or negedge rstn", "posedge clk or posedge rstn"),
    ("posedge clk or negedge rstn", "posedge clock or negedge rstn"),
])
def test_clock_reset_conformance(manifest, old, new):
    src = corpus_sources()
    src["dff.v"] = src["dff.v"].replace(old, new).replace("input clk,", "input clk, input clock,")
    report = check(manifest, parse_all(src))
    assert "HC005" in report.codes()


def test_synchronous_reset_must_stay_out_of_event_list(corpus_asts):
    doc = json.loads(manifest_bytes())
    doc["reset"]["async"] = False
    report = check(manifest_from_json(doc), corpus_asts)
    assert set(report.codes()) == {"HC005"}


def test_only_restricts_checks(manifest, corpus_asts):
    src = mutate("dff.v", None)
    report = check(manifest, parse_all(src), only=["up_counter"])
    assert report.passed
    assert check(manifest, parse_all(src), only=["dff"]).codes() == ["HC001"]


def test_report_json(manifest):
    report = check(manifest, parse_all(mutate("dff.v", None)))
    obj = report.as_json()
    assert obj["verdict"] == "fail" and obj["diagnostics"][0]["rule"] == "HC001"
