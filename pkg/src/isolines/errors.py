"""Exception hierarchy.

Every error carries a ``code`` of the form ``<module>.<reason>`` so the CLI
can print a single machine-parseable line.
"""

from __future__ import annotations


class IsolineError(Exception):
    """Base class for all package errors."""

    module = "isolines"

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason

    @property
    def code(self) -> str:
        return f"{self.module}.{self.reason}"


class IngestError(IsolineError):
    module = "ingest"


class MarginalError(IsolineError):
    module = "marginal"


class SurfaceError(IsolineError):
    module = "surface"


class TailDepError(IsolineError):
    module = "taildep"


class ProjectError(IsolineError):
    module = "project"


class DiagnoseError(IsolineError):
    module = "diagnose"


class SynthError(IsolineError):
    module = "synth"


class ConfigError(IsolineError):
    module = "cli"
