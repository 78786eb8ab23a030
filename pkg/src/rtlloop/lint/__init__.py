"""Static checks for the LLM failure modes seen in generated Verilog."""

from .config import LintConfig, LintConfigError
from .drives import DriveMap, DriveSite, build_drive_map
from .rules import lint

__all__ = ["DriveMap", "DriveSite", "LintConfig", "LintConfigError", "build_drive_map", "lint"]
