"""Error taxonomy for the extractor CLI.

Every anticipated bad input maps to an ExtractError subclass; the CLI
renders those as one-line messages with exit code 2. Anything else is a
bug and escapes as a traceback with exit code 1.
"""

from __future__ import annotations


class ExtractError(Exception):
    """Base class for all anticipated extraction failures."""


class UnknownBackend(ExtractError):
    """Requested backend name is not in the registry."""


class MissingArgument(ExtractError):
    """A backend or a new bundle needs a flag that was not provided."""


class BadFrames(ExtractError):
    """The input frame directory is missing, malformed, or inconsistent."""


class TooFewFrames(ExtractError):
    """The backend needs more frames than the input provides."""


class ManifestConflict(ExtractError):
    """A flag or the frame geometry contradicts the existing manifest."""


class CheckpointMissing(ExtractError):
    """A checkpoint path was given but no file exists there."""
