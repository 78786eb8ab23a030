"""Acceptance criteria 1-9, one test each.

Every test records a PASS/FAIL line; the lines are printed together at the
end of the pytest run (see ``pytest_terminal_summary`` in conftest.py).
"""

import json
import random
import time

from rtlloop.cli import EXIT_FINDINGS, EXIT_OK, main
from rtlloop.frontend import Ast, parse_source, pretty_print
from rtlloop.lint import lint
from rtlloop.orchestrator import CLEAN, CONVERGED, DIRTY, run_session
from rtlloop.pwm import (SIGNAL_MAP, PwmConfig, compare_traces, corpus_sources,
                         dead_time_mutant, run_golden, sweep_schedule, verify_design)
from rtlloop.sim import Stimulus, Trace, Write, elaborate, read_vcd, run, write_vcd

from conftest import LISTINGS
from loops import BROKEN, FIXED, config
from mutations import MUTATIONS, mutate
from progen import random_module

RESULTS = {}


def record(n, title, failures, seconds, limit=None):
    if limit is not None and seconds >= limit:
        failures = list(failures) + [f"took {seconds:.2f} s, limit {limit} s"]
    status = "PASS" if not failures else "FAIL"
    line = f"criterion {n} {status}: {title} ({seconds:.2f} s)"
    if failures:
        line += "; " + "; ".join(failures[:6])
        if len(failures) > 6:
            line += f"; and {len(failures) - 6} more"
    RESULTS[n] = line
    assert not failures, line


# 1 -----------------------------------------------------------------------------------

EXPECTED_LINT = {
    "listing1_begin_end.v": ("LLM001", 3, 1, "}"),
    "listing2_case_endcase.v": ("LLM002", 6, 1, "end"),
    "listing3_multi_drive.v": ("LLM003", 3, 3, "out"),
    "listing4_ambiguous_clock.v": ("LLM004", 8, 3, "out <= 1'b0;"),
}


def test_criterion_1_listing_lint_fidelity():
    failures = []
    t0 = time.perf_counter()
    for name, (code, line, col, anchor) in EXPECTED_LINT.items():
        path = LISTINGS / name
        text = path.read_text()
        diags = lint(parse_source(text, str(path)).ast)
        llm = [d for d in diags if d.rule.startswith("LLM") and (d.is_error or d.rule == code)]
        got = [(d.rule, d.span.line, d.span.col) for d in llm]
        if got != [(code, line, col)]:
            failures.append(f"{name}: expected {code} at {line}:{col}, got {got}")
            continue
        src_line = text.splitlines()[line - 1]
        if not src_line[col - 1:].startswith(anchor):
            failures.append(f"{name}: span does not point at {anchor!r}")
    record(1, "listing lint fidelity", failures, time.perf_counter() - t0, limit=1.0)


# 2 -----------------------------------------------------------------------------------

def test_criterion_2_duty_sweep_counts():
    failures = []
    t0 = time.perf_counter()
    cycles, start = 2048, 4 + 2 * 85 + 8
    for duty in (0, 64, 128, 192):
        trace = run_golden(PwmConfig(), {0: duty}, 4, cycles)
        want = (max(0, duty - 4), max(0, 252 - duty))
        for k in range(3):
            p, n = trace.bit("pwm", k), trace.bit("pwm_n", k)
            for a in range(start, cycles - 255, 256):
                w = range(a, a + 256)
                got = (sum(p[i] for i in w), sum(n[i] for i in w))
                both = sum(p[i] & n[i] for i in w)
                if got != want or both:
                    failures.append(f"duty {duty} phase {k}: main/comp high {got}, "
                                    f"expected {want}, both high {both}")
                    break
    record(2, "PWM duty sweep high counts", failures, time.perf_counter() - t0, limit=1.0)


# 3 -----------------------------------------------------------------------------------

def test_criterion_3_phase_relation():
    failures = []
    t0 = time.perf_counter()
    trace = run_golden(PwmConfig(), sweep_schedule(), 4, 2048)
    c1, c2, c3 = trace["c1"], trace["c2"], trace["c3"]
    start = 4 + 2 * 85 + 2
    checked = 0
    for i in range(start, trace.cycles):
        checked += 1
        if c2[i] != (c1[i] - 85) % 256 or c3[i] != (c1[i] - 170) % 256:
            failures.append(f"cycle {i}: c1={c1[i]} c2={c2[i]} c3={c3[i]}")
            break
    if checked < 600:
        failures.append(f"only {checked} cycles checked")
    record(3, f"phase offsets 85/170 over {checked} cycles", failures,
           time.perf_counter() - t0)


# 4 -----------------------------------------------------------------------------------

def _asts(sources):
    return [parse_source(t, n).ast for n, t in sources.items()]


def test_criterion_4_simulator_matches_golden():
    failures = []
    t0 = time.perf_counter()
    reports = verify_design(_asts(corpus_sources()), (0, 64, 128, 192), 2048)
    for duty, rep in reports.items():
        for m in rep.mismatches:
            failures.append(f"duty {duty}: {m.signal} differs from cycle {m.cycle}")
    design = elaborate(_asts(corpus_sources()), "pwm_top")
    schedule = sweep_schedule()
    stim = Stimulus(4, (Write("en", 0, 1),) + tuple(Write("duty", t, d)
                                                    for t, d in schedule.items()))
    actual = run(design, stim, 2048, list(SIGNAL_MAP.values()))
    sweep = compare_traces(run_golden(PwmConfig(), schedule, 4, 2048), actual, SIGNAL_MAP,
                           bit_level=True)
    failures += [f"sweep: {m.signal} differs from cycle {m.cycle}" for m in sweep.mismatches]
    mutant = verify_design(_asts(dead_time_mutant()), (0, 64, 128, 192), 2048)
    caught = sum(r.total for r in mutant.values())
    if caught < 1:
        failures.append("dead-time mutant was not caught")
    record(4, f"simulator equals golden on 6 outputs and 3 counters; mutant caught with "
              f"{caught} mismatching samples", failures, time.perf_counter() - t0, limit=30.0)


# 5 -----------------------------------------------------------------------------------

def test_criterion_5_non_overlap_every_duty():
    failures = []
    t0 = time.perf_counter()
    for duty in range(256):
        trace = run_golden(PwmConfig(), {0: duty}, 4, 512)
        bad = [i for i, (p, n) in enumerate(zip(trace["pwm"], trace["pwm_n"])) if p & n]
        if bad:
            failures.append(f"duty {duty}: overlap at cycle {bad[0]}")
    record(5, "no pwm/pwm_n overlap for duty 0..255", failures, time.perf_counter() - t0,
           limit=60.0)


# 6 -----------------------------------------------------------------------------------

def _hier(tmp_path, sources):
    d = tmp_path / f"case{len(list(tmp_path.iterdir()))}"
    d.mkdir()
    files = []
    for name, text in sources.items():
        (d / name).write_text(text)
        files.append(str(d / name))
    return files


def test_criterion_6_hierarchy_mutations(tmp_path, capsys):
    from rtlloop.pwm.corpus import manifest_bytes
    failures = []
    t0 = time.perf_counter()
    manifest = tmp_path / "manifest.json"
    manifest.write_bytes(manifest_bytes())
    runs = tmp_path / "runs"
    runs.mkdir()
    code = main(["hier-check", "--manifest", str(manifest), "--format", "json",
                 *_hier(runs, corpus_sources())])
    capsys.readouterr()
    if code != EXIT_OK:
        failures.append(f"reference corpus exit {code}")
    for label, file, edits, want in MUTATIONS:
        code = main(["hier-check", "--manifest", str(manifest), "--format", "json",
                     *_hier(runs, mutate(file, edits))])
        codes = [d["rule"] for d in json.loads(capsys.readouterr().out)["diagnostics"]]
        if code != EXIT_FINDINGS or codes != [want]:
            failures.append(f"{label}: exit {code}, codes {codes}, expected [{want}]")
    record(6, f"manifest conformance and {len(MUTATIONS)} mutations", failures,
           time.perf_counter() - t0)


# 7 -----------------------------------------------------------------------------------

def test_criterion_7_feedback_loop(tmp_path):
    failures = []
    t0 = time.perf_counter()
    logs = [run_session(config(tmp_path / f"run{k}", [BROKEN, FIXED])) for k in range(2)]
    log = logs[0]
    if log.verdict != CONVERGED or len(log.attempts) != 2:
        failures.append(f"verdict {log.verdict} after {len(log.attempts)} attempts")
    else:
        first, second = log.attempts
        if first.verdict != DIRTY or second.verdict != CLEAN:
            failures.append(f"attempt verdicts {first.verdict}, {second.verdict}")
        if "LLM001" not in [d.rule for d in first.diagnostics]:
            failures.append("attempt 1 lacks LLM001")
        for d in first.diagnostics:
            line = f"{d.rule} {d.severity} at {d.location()}: {d.message}"
            if line not in second.prompt:
                failures.append(f"attempt 2 prompt lacks {line!r}")
    views = [{k: v for k, v in lg.as_json(timing=False).items() if k != "config"}
             for lg in logs]
    if views[0] != views[1] or [a.prompt for a in logs[0].attempts] != \
            [a.prompt for a in logs[1].attempts]:
        failures.append("two runs differ")
    record(7, "mock feedback loop converges at iteration 2", failures,
           time.perf_counter() - t0)


# 8 -----------------------------------------------------------------------------------

def test_criterion_8_parser_round_trip():
    failures = []
    t0 = time.perf_counter()
    programs = {f"gen{seed}.v": random_module(seed) for seed in range(120)}
    programs.update(corpus_sources())
    for name in sorted(p.name for p in LISTINGS.iterdir()):
        programs[name] = (LISTINGS / name).read_text()
    checked = 0
    for name, text in programs.items():
        tree = parse_source(text, name).ast
        if tree.diagnostics or any(m.has_errors for m in tree.modules):
            continue
        checked += 1
        again = parse_source(pretty_print(tree), name).ast
        if again != tree or again.diagnostics:
            failures.append(f"{name} changes after printing")
    if checked < 100 + len(corpus_sources()):
        failures.append(f"only {checked} diagnostic-free programs")
    record(8, f"print/reparse identity on {checked} programs", failures,
           time.perf_counter() - t0)


# 9 -----------------------------------------------------------------------------------

def test_criterion_9_vcd_readback():
    failures = []
    t0 = time.perf_counter()
    traces = {"golden sweep": run_golden(PwmConfig(), sweep_schedule(), 4, 2048)}
    design = elaborate(_asts(corpus_sources()), "pwm_top")
    stim = Stimulus(4, (Write("en", 0, 1), Write("duty", 0, 64), Write("duty", 700, 200)))
    traces["simulated corpus"] = run(design, stim, 1500, list(design.signals))
    rng = random.Random(9)
    for k in range(100):
        cycles = rng.randint(1, 60)
        widths = {f"s{j}" if j % 2 else f"u{j}.v": rng.randint(1, 40)
                  for j in range(rng.randint(1, 8))}
        traces[f"random {k}"] = Trace(cycles, {n: [rng.randrange(1 << w) for _ in range(cycles)]
                                               for n, w in widths.items()}, widths)
    for label, trace in traces.items():
        if read_vcd(write_vcd(trace, "top", design.kinds())) != trace:
            failures.append(f"{label} does not read back")
    record(9, f"VCD readback of {len(traces)} traces", failures, time.perf_counter() - t0)
