"""The generate -> check -> feedback loop."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..diagnostics import Span, has_errors, make, sort_diagnostics
from ..frontend import Ast, parse_source
from ..hierarchy import DesignManifest, ManifestError, check, load_manifest
from ..lint import LintConfig, lint
from ..pwm import TraceShapeError, verify_design
from ..sim import ElaborationError, SimulationError
from .backend import BackendError, BackendSpec, ConfigError
from .extract import extract_code
from .prompt import RoleConfig, build_prompt

CLEAN = "clean"
DIRTY = "dirty"
EXTRACTION_FAILED = "extraction-failed"
BACKEND_FAILURE = "backend-failure"

CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class GoldenCheck:
    duties: tuple = (0, 64, 128, 192)
    cycles: int = 2048

    @classmethod
    def from_json(cls, obj) -> "GoldenCheck":
        if not isinstance(obj, dict):
            raise ConfigError("golden_check must be an object")
        duties = obj.get("duty", [0, 64, 128, 192])
        cycles = obj.get("cycles", 2048)
        if (not isinstance(duties, list) or not duties
                or not all(isinstance(d, int) and 0 <= d < 256 for d in duties)):
            raise ConfigError("golden_check.duty must be a non-empty list of integers in [0, 256)")
        if isinstance(cycles, bool) or not isinstance(cycles, int) or cycles < 1:
            raise ConfigError("golden_check.cycles must be a positive integer")
        return cls(tuple(duties), cycles)


@dataclass(frozen=True)
class SessionConfig:
    manifest: DesignManifest
    backend: BackendSpec
    out_dir: Path
    max_iterations: int = 5
    golden_check: Optional[GoldenCheck] = None
    role: RoleConfig = RoleConfig()
    manifest_path: str = ""

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")

    def snapshot(self) -> dict:
        return {"manifest": self.manifest_path, "backend": self.backend.as_json(),
                "max_iterations": self.max_iterations, "out_dir": str(self.out_dir),
                "golden_check": None if self.golden_check is None else
                {"duty": list(self.golden_check.duties), "cycles": self.golden_check.cycles}}


def load_session_config(data: bytes, base: Path = Path(".")) -> SessionConfig:
    """Parse a session config; relative paths resolve against ``base``."""
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"session config is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise ConfigError("session config must be a JSON object")
    for key in ("manifest", "backend", "out_dir"):
        if key not in obj:
            raise ConfigError(f"session config is missing {key!r}")
    mpath = base / obj["manifest"]
    try:
        manifest = load_manifest(mpath.read_bytes(), str(obj["manifest"]))
    except OSError as e:
        raise ConfigError(f"cannot read manifest {mpath}: {e.strerror}") from None
    except ManifestError as e:
        raise ConfigError(str(e)) from None
    iters = obj.get("max_iterations", 5)
    if isinstance(iters, bool) or not isinstance(iters, int):
        raise ConfigError("max_iterations must be an integer")
    golden = obj.get("golden_check")
    return SessionConfig(
        manifest=manifest,
        backend=BackendSpec.from_json(obj["backend"], base),
        out_dir=base / obj["out_dir"],
        max_iterations=iters,
        golden_check=None if golden is None else GoldenCheck.from_json(golden),
        role=RoleConfig.from_json(obj.get("role")),
        manifest_path=str(obj["manifest"]),
    )


@dataclass
class Attempt:
    module: str
    index: int
    prompt: str
    response: str
    sources: dict                  # relative file name -> text
    diagnostics: list
    verdict: str
    seconds: float = field(default=0.0, compare=False)

    def as_json(self, timing: bool = True) -> dict:
        out = {"module": self.module, "iteration": self.index, "verdict": self.verdict,
               "sources": sorted(self.sources),
               "diagnostics": [d.as_json() for d in self.diagnostics]}
        if timing:
            out["seconds"] = round(self.seconds, 6)
        return out


@dataclass
class SessionLog:
    config: dict
    attempts: list = field(default_factory=list)
    verdict: str = BUDGET_EXHAUSTED
    modules: dict = field(default_factory=dict)      # module -> final verdict

    def for_module(self, name: str) -> list:
        return [a for a in self.attempts if a.module == name]

    def as_json(self, timing: bool = True) -> dict:
        return {"config": self.config, "verdict": self.verdict, "modules": self.modules,
                "attempts": [a.as_json(timing) for a in self.attempts]}


def _golden_diagnostics(sources: dict, manifest: DesignManifest, golden: GoldenCheck) -> list:
    latest = {}
    for name, text in sources.items():       # a later definition of a module wins
        for m in parse_source(text, name).ast.modules:
            latest[m.name] = m
    asts = [Ast(list(latest.values()))]
    where = Span("<simulation>", 0, 0, 1, 1, 1, 1)
    reset = manifest.reset
    try:
        reports = verify_design(asts, golden.duties, golden.cycles, manifest.top,
                                clock=manifest.clock.name,
                                reset=reset.name if reset else None,
                                reset_active_low=reset.active_low if reset else True)
    except (ElaborationError, SimulationError, TraceShapeError) as e:
        return [make("SIM001", where, f"simulation failed: {e}",
                     hint="make the design elaborate with the manifest's clock and reset")]
    out = []
    for duty, rep in reports.items():
        for d in rep.to_diagnostics(f"<simulation duty={duty}>"):
            out.append(d)
    return out


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def run_session(config: SessionConfig, lint_config: LintConfig = None) -> SessionLog:
    """Generate every manifest module, leaves first, until clean or out of budget.

    Stops at the first module that does not converge.  Artifacts go to
    ``out_dir/<module>/``; the log is also written to ``out_dir/session.json``.
    """
    manifest = config.manifest
    backend = config.backend.create()
    log = SessionLog(config.snapshot())
    accepted: dict[str, str] = {}          # file name -> text of converged modules
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    for target in manifest.build_order():
        prior: list = []
        final = BUDGET_EXHAUSTED
        mdir = out / target
        for n in range(1, config.max_iterations + 1):
            t0 = time.perf_counter()
            prompt = build_prompt(manifest, target, config.role, prior).text()
            _write(mdir / f"prompt-{n}.txt", prompt)
            try:
                response = backend.generate(prompt)
            except BackendError as e:
                diags = [make("GEN002", Span("<backend>", 0, 0, 1, 1, 1, 1), str(e))]
                attempt = Attempt(target, n, prompt, "", {}, diags, BACKEND_FAILURE,
                                  time.perf_counter() - t0)
                _write(mdir / f"response-{n}.txt", "")
                _write(mdir / f"diags-{n}.json", json.dumps([d.as_json() for d in diags],
                                                            indent=2))
                log.attempts.append(attempt)
                continue
            _write(mdir / f"response-{n}.txt", response)
            units = extract_code(response)
            sources = {f"src-{n}/unit{k + 1}.v": text for k, text in enumerate(units)}
            for name, text in sources.items():
                _write(mdir / name, text)
            (mdir / f"src-{n}").mkdir(parents=True, exist_ok=True)
            if not units:
                diags = [make("GEN001", Span(f"response-{n}.txt", 0, 0, 1, 1, 1, 1),
                              "no Verilog module found in the response",
                              hint="answer with the module inside a ```verilog fenced block")]
                verdict = EXTRACTION_FAILED
            else:
                diags = _check_attempt(sources, manifest, target, lint_config)
                if (not has_errors(diags) and config.golden_check is not None
                        and target == manifest.top):
                    merged = dict(accepted)
                    merged.update(sources)
                    diags = sort_diagnostics(diags + _golden_diagnostics(
                        merged, manifest, config.golden_check))
                verdict = DIRTY if has_errors(diags) else CLEAN
            _write(mdir / f"diags-{n}.json", json.dumps([d.as_json() for d in diags], indent=2))
            log.attempts.append(Attempt(target, n, prompt, response, sources, diags, verdict,
                                        time.perf_counter() - t0))
            if verdict == CLEAN:
                final = CONVERGED
                for name, text in sources.items():
                    accepted[f"{target}/{name}"] = text
                break
            prior = diags
        else:
            tried = log.for_module(target)
            if all(a.verdict == BACKEND_FAILURE for a in tried):
                final = BACKEND_FAILURE
        log.modules[target] = final
        if final != CONVERGED:
            log.verdict = final
            break
    else:
        log.verdict = CONVERGED
    _write(out / "session.json", json.dumps(log.as_json(), indent=2))
    return log


def _check_attempt(sources: dict, manifest: DesignManifest, target: str,
                   lint_config: LintConfig = None) -> list:
    trees = [parse_source(text, name).ast for name, text in sources.items()]
    merged = Ast.merge(trees)
    diags = list(lint(merged, config=lint_config))
    diags += check(manifest, trees, only=[target]).diagnostics
    return sort_diagnostics(diags)
