"""Exception types shared across the toolkit."""

from __future__ import annotations


class CoughsegError(Exception):
    """Base class for all domain errors raised by this package."""


class AudioFormatError(CoughsegError):
    """The file looks like a WAV but its header or payload is malformed."""


class UnsupportedCodecError(AudioFormatError):
    """The file is not a PCM WAV; convert externally to PCM WAV first."""


class EmptyClipError(CoughsegError):
    """An operation that needs at least one sample received an empty clip."""


class AnnotationError(CoughsegError):
    """Annotation data is malformed: bad row, bad label, duplicate, ragged."""


class IncompleteGridError(AnnotationError):
    """The label grid is missing (segment, rater) cells.

    ``missing`` lists exactly which cells are absent.
    """

    def __init__(self, missing: list[tuple[str, str]]):
        self.missing = missing
        preview = ", ".join(f"({s}, {r})" for s, r in missing[:5])
        more = "" if len(missing) <= 5 else f" and {len(missing) - 5} more"
        super().__init__(
            f"annotation grid incomplete: {len(missing)} missing cell(s): {preview}{more}"
        )


class DegenerateAgreementError(CoughsegError):
    """Every assignment fell in one category; expected agreement is 1 and
    kappa is undefined."""
