"""Generation backends: a scripted mock and an external command."""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path


class BackendError(RuntimeError):
    """The backend failed to produce a completion."""


class ConfigError(ValueError):
    pass


class MockBackend:
    """Returns scripted responses in order, repeating the last one."""

    def __init__(self, script):
        self.script = list(script)
        if not self.script:
            raise ConfigError("mock backend script must not be empty")
        self.calls = 0

    def generate(self, prompt: str) -> str:
        reply = self.script[min(self.calls, len(self.script) - 1)]
        self.calls += 1
        return reply


class CommandBackend:
    """Runs a command with the prompt on stdin and reads the completion from stdout."""

    def __init__(self, cmd: str, timeout_s: float = 120):
        if not cmd or not shlex.split(cmd):
            raise ConfigError("command backend needs a command")
        if timeout_s <= 0:
            raise ConfigError("timeout_s must be positive")
        self.cmd = cmd
        self.timeout_s = timeout_s

    def generate(self, prompt: str) -> str:
        try:
            proc = subprocess.run(shlex.split(self.cmd), input=prompt, capture_output=True,
                                  text=True, timeout=self.timeout_s)
        except subprocess.TimeoutExpired:
            raise BackendError(f"backend timed out after {self.timeout_s} s") from None
        except OSError as e:
            raise BackendError(f"cannot run backend: {e}") from None
        if proc.returncode != 0:
            tail = proc.stderr.strip().splitlines()[-1:] or [""]
            raise BackendError(f"backend exited with status {proc.returncode} {tail[0]}".rstrip())
        return proc.stdout


@dataclass(frozen=True)
class BackendSpec:
    kind: str                               # mock | command
    script: tuple = ()                      # mock responses
    cmd: str = ""
    timeout_s: float = 120
    script_paths: tuple = field(default=(), compare=False)

    @classmethod
    def from_json(cls, obj, base: Path = Path(".")) -> "BackendSpec":
        if not isinstance(obj, dict):
            raise ConfigError("backend must be an object")
        kind = obj.get("kind")
        if kind == "mock":
            paths = obj.get("script")
            if not isinstance(paths, list) or not paths:
                raise ConfigError("mock backend needs a non-empty script list")
            texts = []
            for p in paths:
                path = base / p
                try:
                    texts.append(path.read_text())
                except OSError as e:
                    raise ConfigError(f"cannot read mock script {path}: {e.strerror}") from None
            return cls("mock", tuple(texts), script_paths=tuple(str(p) for p in paths))
        if kind == "command":
            cmd = obj.get("cmd")
            timeout = obj.get("timeout_s", 120)
            if not isinstance(cmd, str) or not cmd.strip():
                raise ConfigError("command backend needs a cmd string")
            if isinstance(timeout, bool) or not isinstance(timeout, (int, float)) or timeout <= 0:
                raise ConfigError("timeout_s must be a positive number")
            return cls("command", cmd=cmd, timeout_s=timeout)
        raise ConfigError(f"unknown backend kind {kind!r}")

    def create(self):
        if self.kind == "mock":
            return MockBackend(self.script)
        return CommandBackend(self.cmd, self.timeout_s)

    def as_json(self) -> dict:
        if self.kind == "mock":
            return {"kind": "mock", "script": list(self.script_paths)}
        return {"kind": "command", "cmd": self.cmd, "timeout_s": self.timeout_s}
