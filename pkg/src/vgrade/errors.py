"""Exception taxonomy for the vgrade engine.

``VgradeError`` is the common base. ``InputError`` marks problems with user
inputs (files, schemas, arguments) that the CLI reports with exit code 2;
anything else escaping to the CLI is an internal error (exit code 1).
"""


class VgradeError(Exception):
    """Base class for all engine errors."""


class InputError(VgradeError):
    """Invalid input data or arguments; maps to CLI exit code 2."""


# numeric kernels
class ZeroVector(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    pass


# interchange file formats
class BadMagic(InputError):
    pass


class VersionUnsupported(InputError):
    pass


class TruncatedPayload(InputError):
    pass


class TrailingBytes(InputError):
    """File is larger than its header admits."""


class NonFiniteValue(InputError):
    pass


class SchemaViolation(InputError):
    pass


class BboxOutOfBounds(InputError):
    pass


class FrameCountMismatch(InputError):
    pass


class MissingFrame(InputError):
    pass


class DecodeError(InputError):
    pass


class InconsistentResolution(InputError):
    pass


# prompt suites
class UnknownDimension(InputError):
    pass


class MissingLabel(InputError):
    pass


class DuplicatePromptId(InputError):
    pass


class MissingCategory(InputError):
    pass


class UnknownCategory(InputError):
    pass


# scorers
class TooFewFrames(InputError):
    pass


class TooFewTargets(InputError):
    pass


class MissingCaptions(InputError):
    pass


class CountMismatch(InputError):
    pass


class EmptyFlow(InputError):
    pass


class EmptyInput(InputError):
    pass


class OutOfRange(InputError):
    pass


# baselines
class PoolTooSmall(InputError):
    pass


# alignment
class TooFewModels(InputError):
    pass


class DuplicateAnnotation(InputError):
    pass


class CoverageMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DegenerateInput(InputError):
    pass


# reporting
class UnsupportedFormat(InputError):
    pass
