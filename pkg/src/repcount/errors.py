"""Exception hierarchy.

Everything raised on purpose by this package derives from
:class:`RepCountError`, so callers (the CLI in particular) can separate
data problems from programming errors with a single ``except``.
"""

from __future__ import annotations


class RepCountError(Exception):
    """Base class for all errors raised by repcount."""


class ConfigError(RepCountError, ValueError):
    """A configuration value violates its documented constraints."""


# -- matrix-io ---------------------------------------------------------------

class MissingFile(RepCountError, FileNotFoundError):
    pass


class IoFailure(RepCountError, OSError):
    pass


class MalformedMatrix(RepCountError, ValueError):
    """Base for all parse/validation failures of feature files."""


class RaggedRows(MalformedMatrix):
    def __init__(self, line: int, expected: int, found: int, path: str | None = None):
        self.line = line
        self.expected = expected
        self.found = found
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(
            f"{where}line {line} has {found} fields, expected {expected}"
        )


class NonNumericField(MalformedMatrix):
    def __init__(self, line: int, field: str, path: str | None = None):
        self.line = line
        self.field = field
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(f"{where}line {line}: not a number: {field!r}")


class NonFiniteValue(MalformedMatrix):
    pass


class TooFewFrames(MalformedMatrix):
    pass


class BadMagic(MalformedMatrix):
    pass


class TruncatedPayload(MalformedMatrix):
    pass


class TrailingData(MalformedMatrix):
    pass


# -- pca ---------------------------------------------------------------------

class DegenerateMatrix(RepCountError, ValueError):
    """All frames are identical, so there is no principal axis."""


class KTooLarge(RepCountError, ValueError):
    pass


class DimensionMismatch(RepCountError, ValueError):
    pass


class BadComponentIndex(RepCountError, IndexError):
    pass


# -- spectral ----------------------------------------------------------------

class AlphaOutOfRange(RepCountError, ValueError):
    pass


# -- counting ----------------------------------------------------------------

class MissingStream(RepCountError, ValueError):
    pass


class FrameCountMismatch(RepCountError, ValueError):
    pass


# -- evaluation --------------------------------------------------------------

class ManifestError(RepCountError, ValueError):
    """The manifest file is not a valid list of entries."""


# -- synth -------------------------------------------------------------------

class SpecInvalid(RepCountError, ValueError):
    pass


class SizeExceedsOracleLimit(RepCountError, ValueError):
    pass
