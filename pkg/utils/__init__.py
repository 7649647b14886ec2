"""Utility modules for the CB-cPIR laboratory."""

from .file_utils import FrameKind, FileUtils
from .tracking import AttackMetrics

__all__ = [
    "FrameKind",
    "FileUtils",
    "AttackMetrics",
]
