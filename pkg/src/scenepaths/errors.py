"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class ScenePathsError(Exception):
    """Base class for all package errors."""


class InputError(ScenePathsError, ValueError):
    """A file or argument failed validation."""


class CatalogError(InputError):
    pass


class RulebookError(InputError):
    pass


class ConfigError(InputError):
    pass


class OracleError(ScenePathsError):
    """An oracle could not produce a valid answer.

    ``transcript`` holds every request/reply exchanged before giving up.
    """

    def __init__(self, message: str, transcript: list[str] | None = None):
        super().__init__(message)
        self.transcript = list(transcript or [])


class OracleTransportError(OracleError):
    pass


class PipelineError(ScenePathsError):
    """A stage failed; ``stage`` names it."""

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class NoRootError(PipelineError):
    """No main object survived retrieval (Reply Missing at the retrieval stage)."""

    def __init__(self, message: str = "no-root"):
        super().__init__(message, stage="organize")


class RoomTooSmallError(PipelineError):
    def __init__(self, message: str = "room-too-small"):
        super().__init__(message, stage="layout")
