"""Prompt building, generation backends and the feedback loop."""

from .backend import BackendError, BackendSpec, CommandBackend, ConfigError, MockBackend
from .extract import extract_code
from .prompt import (DEFAULT_PREAMBLE, DEFAULT_STYLE, PromptError, RoleConfig, RolePrompt,
                     build_prompt, render_feedback)
from .session import (BACKEND_FAILURE, BUDGET_EXHAUSTED, CLEAN, CONVERGED, DIRTY,
                      EXTRACTION_FAILED, Attempt, GoldenCheck, SessionConfig, SessionLog,
                      load_session_config, run_session)

__all__ = ["Attempt", "BACKEND_FAILURE", "BUDGET_EXHAUSTED", "BackendError", "BackendSpec",
           "CLEAN", "CONVERGED", "CommandBackend", "ConfigError", "DEFAULT_PREAMBLE",
           "DEFAULT_STYLE", "DIRTY", "EXTRACTION_FAILED", "GoldenCheck", "MockBackend",
           "PromptError", "RoleConfig", "RolePrompt", "SessionConfig", "SessionLog",
           "build_prompt", "extract_code", "load_session_config", "render_feedback",
           "run_session"]
