"""Exception hierarchy shared across the package.

Argument misuse (bad alpha, inverted ranges, unknown enum values) raises plain
ValueError; these classes cover failures that carry domain context the CLI
maps onto distinct exit codes.
"""

from __future__ import annotations


class LassiError(Exception):
    """Base class for package-specific failures."""


class IngestError(LassiError):
    """Raised in strict mode for the first invalid input row."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class StoreError(LassiError):
    """Corrupt or out-of-contract partition content."""


class StoreLockError(LassiError):
    """A second writer attempted to acquire a held partition lock."""


class AttributionConflictError(LassiError):
    """Two jobs claim the same node over overlapping time."""

    def __init__(self, node_id: str, app_a: str, app_b: str):
        super().__init__(
            f"node {node_id} claimed by overlapping jobs {app_a} and {app_b}"
        )
        self.node_id = node_id
        self.app_a = app_a
        self.app_b = app_b


class SeriesGapError(LassiError):
    """A risk series lacks hours inside a span it must cover."""

    def __init__(self, missing_hours: tuple[int, ...]):
        from .timeutil import format_utc

        hours = ", ".join(format_utc(h) for h in missing_hours)
        super().__init__(f"risk series has no entries for hours: {hours}")
        self.missing_hours = missing_hours


class MissingBaselineError(LassiError):
    """No stored baseline covers the requested filesystem and date."""


class ScenarioError(LassiError):
    """A synthetic scenario file is invalid or unsatisfiable."""
