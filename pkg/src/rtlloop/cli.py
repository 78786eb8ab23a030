"""Command-line entry point: ``rtlloop <command> ...``.

Exit codes: 0 clean, 1 findings (diagnostics or mismatches), 2 usage, I/O
or configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diagnostics import has_errors, render_diagnostics, sort_diagnostics
from .frontend import Ast, parse_source
from .hierarchy import ManifestError, check, load_manifest
from .lint import LintConfig, LintConfigError, lint

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    """Bad arguments, unreadable input or invalid configuration (exit 2)."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read {path}: {getattr(e, 'strerror', None) or e}") from None


def _defines(specs) -> dict:
    out = {}
    for s in specs or ():
        name, _, value = s.partition("=")
        if not name:
            raise UsageError(f"bad define {s!r}; use NAME or NAME=VALUE")
        out[name] = value
    return out


def _parse_files(files, defines=None) -> list:
    return [parse_source(_read(f), f, defines).ast for f in files]


def _emit(data: bytes):
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def cmd_lint(args) -> int:
    try:
        config = LintConfig.from_args(args.rule, deny_warnings=args.deny_warnings,
                                      intra_process_multidrive=not args.no_intra_process)
    except LintConfigError as e:
        raise UsageError(str(e)) from None
    trees = _parse_files(args.files, _defines(args.define))
    diags = lint(Ast.merge(trees), config=config)
    _emit(render_diagnostics(diags, args.format))
    return EXIT_FINDINGS if has_errors(diags) else EXIT_OK


def cmd_hier_check(args) -> int:
    try:
        manifest = load_manifest(Path(args.manifest).read_bytes(), args.manifest)
    except OSError as e:
        raise UsageError(f"cannot read {args.manifest}: {e.strerror}") from None
    except ManifestError as e:
        raise UsageError(str(e)) from None
    report = check(manifest, _parse_files(args.files, _defines(args.define)))
    if args.format == "json":
        _emit(json.dumps(report.as_json(), indent=2).encode() + b"\n")
    else:
        _emit(render_diagnostics(report.diagnostics))
        print(f"verdict: {report.verdict}")
    return EXIT_OK if report.passed else EXIT_FINDINGS


def _elaborate(args, trees):
    from .sim import ElaborationError, elaborate
    errors = sort_diagnostics(d for t in trees for d in t.diagnostics if d.is_error)
    if errors:
        sys.stderr.buffer.write(render_diagnostics(errors))
        return None
    known = {m.name for t in trees for m in t.modules}
    if args.top not in known:
        raise UsageError(f"top module {args.top} not found")
    try:
        return elaborate(trees, args.top, clock=args.clock, reset=args.reset,
                         reset_active_low=not args.reset_active_high)
    except ElaborationError as e:
        print(f"elaboration failed: {e}", file=sys.stderr)
        return None


def cmd_sim(args) -> int:
    from .sim import SimulationError, Stimulus, StimulusError, run, write_vcd
    if args.cycles < 1:
        raise UsageError("--cycles must be at least 1")
    try:
        stim = (Stimulus.load(Path(args.stimulus).read_bytes()) if args.stimulus
                else Stimulus(args.reset_cycles))
    except OSError as e:
        raise UsageError(f"cannot read {args.stimulus}: {e.strerror}") from None
    except StimulusError as e:
        raise UsageError(str(e)) from None
    design = _elaborate(args, _parse_files(args.files, _defines(args.define)))
    if design is None:
        return EXIT_FINDINGS
    for w in design.warnings:
        print(w.as_text(), file=sys.stderr)
    record = args.record or None
    if record is None and args.vcd:
        record = list(design.signals)
    try:
        trace = run(design, stim, args.cycles, record)
    except StimulusError as e:
        raise UsageError(str(e)) from None
    except SimulationError as e:
        print(f"simulation failed: {e}", file=sys.stderr)
        return EXIT_FINDINGS
    if args.vcd:
        _write_out(args.vcd, write_vcd(trace, design.top, design.kinds()))
    if args.csv:
        _write_out(args.csv, trace.to_csv().encode())
    if not args.vcd and not args.csv:
        _emit(trace.to_csv().encode())
    return EXIT_OK


def _write_out(path: str, data: bytes):
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def cmd_pwm_golden(args) -> int:
    from .pwm import PwmConfig, run_golden, sweep_schedule
    from .sim import write_vcd
    if args.cycles < 1:
        raise UsageError("--cycles must be at least 1")
    if args.sweep:
        schedule = sweep_schedule(cycles=args.cycles)
    else:
        if not 0 <= args.duty < 256:
            raise UsageError(f"duty {args.duty} is outside [0, 255]")
        schedule = {0: args.duty}
    if args.reset_cycles < 1:
        raise UsageError("--reset-cycles must be at least 1")
    trace = run_golden(PwmConfig(), schedule, args.reset_cycles, args.cycles)
    if args.vcd:
        _write_out(args.vcd, write_vcd(trace, "pwm_golden"))
    if args.csv:
        _write_out(args.csv, trace.to_csv().encode())
    if not args.vcd and not args.csv:
        _emit(trace.to_csv().encode())
    return EXIT_OK


def cmd_verify_pwm(args) -> int:
    from .pwm import TraceShapeError, verify_design
    from .sim import SimulationError
    if args.cycles < 1:
        raise UsageError("--cycles must be at least 1")
    try:
        duties = [int(d) for d in args.duties.split(",") if d.strip()]
    except ValueError:
        raise UsageError(f"bad duty list {args.duties!r}") from None
    if not duties or any(not 0 <= d < 256 for d in duties):
        raise UsageError("duties must be integers in [0, 255]")
    design = _elaborate(args, _parse_files(args.files, _defines(args.define)))
    if design is None:
        return EXIT_FINDINGS
    try:
        reports = verify_design(None, duties, args.cycles, args.top, design=design,
                                reset_cycles=args.reset_cycles)
    except (TraceShapeError, SimulationError) as e:
        print(f"cannot compare: {e}", file=sys.stderr)
        return EXIT_FINDINGS
    if args.format == "json":
        _emit(json.dumps({str(d): r.as_json() for d, r in reports.items()}, indent=2).encode()
              + b"\n")
    else:
        for duty, rep in reports.items():
            status = "ok" if rep.empty else f"{rep.total} mismatching samples"
            print(f"duty {duty}: {status}")
            for m in rep.mismatches:
                print(f"  {m.signal}: first at cycle {m.cycle} (expected {m.expected}, "
                      f"got {m.actual}), {m.count} cycles")
    return EXIT_OK if all(r.empty for r in reports.values()) else EXIT_FINDINGS


def cmd_pipeline(args) -> int:
    from .orchestrator import CONVERGED, ConfigError, load_session_config, run_session
    path = Path(args.config)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise UsageError(f"cannot read {args.config}: {e.strerror}") from None
    try:
        config = load_session_config(data, path.parent)
    except ConfigError as e:
        raise UsageError(str(e)) from None
    log = run_session(config)
    for a in log.attempts:
        errs = sum(d.is_error for d in a.diagnostics)
        print(f"{a.module} #{a.index}: {a.verdict} ({errs} errors)")
    print(f"session: {log.verdict}")
    return EXIT_OK if log.verdict == CONVERGED else EXIT_FINDINGS


def _design_args(p):
    p.add_argument("--top", default="pwm_top", help="top module (default: pwm_top)")
    p.add_argument("--clock", default="clk")
    p.add_argument("--reset", default="rstn")
    p.add_argument("--reset-active-high", action="store_true")
    p.add_argument("--reset-cycles", type=int, default=4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtlloop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("lint", help="parse and lint Verilog files as one design")
    p.add_argument("files", nargs="+")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--deny-warnings", action="store_true", help="treat warnings as errors")
    p.add_argument("--rule", action="append", metavar="CODE=off|warn|error", default=[])
    p.add_argument("--no-intra-process", action="store_true",
                   help="do not report reassignment within one always block (LLM003)")
    p.add_argument("-D", "--define", action="append", metavar="NAME[=VALUE]", default=[])
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("hier-check", help="check sources against a design manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("files", nargs="+")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-D", "--define", action="append", metavar="NAME[=VALUE]", default=[])
    p.set_defaults(func=cmd_hier_check)

    p = sub.add_parser("sim", help="cycle-simulate a design")
    p.add_argument("files", nargs="+")
    _design_args(p)
    p.add_argument("--cycles", type=int, default=100)
    p.add_argument("--stimulus", help="stimulus JSON file")
    p.add_argument("--vcd", help="write a VCD file")
    p.add_argument("--csv", help="write a CSV file")
    p.add_argument("--record", nargs="+", metavar="SIGNAL",
                   help="signals to record (default: top ports, or everything with --vcd)")
    p.add_argument("-D", "--define", action="append", metavar="NAME[=VALUE]", default=[])
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("pwm-golden", help="run the golden PWM model")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--duty", type=int)
    g.add_argument("--sweep", action="store_true", help="duty 0, 64, 128, 192 in equal segments")
    p.add_argument("--cycles", type=int, default=2048)
    p.add_argument("--reset-cycles", type=int, default=4)
    p.add_argument("--vcd")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_pwm_golden)

    p = sub.add_parser("verify-pwm", help="compare a PWM design with the golden model")
    p.add_argument("files", nargs="+")
    _design_args(p)
    p.add_argument("--cycles", type=int, default=2048)
    p.add_argument("--duties", default="0,64,128,192")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-D", "--define", action="append", metavar="NAME[=VALUE]", default=[])
    p.set_defaults(func=cmd_verify_pwm)

    p = sub.add_parser("pipeline", help="run the generate/check/feedback loop")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"rtlloop: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:          # anything else is a bug
        print(f"rtlloop: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
