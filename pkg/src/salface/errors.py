"""Exception hierarchy shared across the package.

Every error the CLI can surface maps to one short machine-parsable
category (see ``category``); library code raises the specific class.
"""


class SalfaceError(Exception):
    """Base class for all package errors."""

    category = "error"


class DecodeError(SalfaceError):
    """Malformed binary input (PNM stream, checkpoint file)."""

    category = "decode"


class ConfigError(SalfaceError):
    """Invalid configuration value or combination."""

    category = "config"


class ShapeError(SalfaceError):
    """Array or image dimensions incompatible with the operation."""

    category = "shape"


class BuildError(SalfaceError):
    """Model specification does not validate."""

    category = "build"


class ManifestError(SalfaceError):
    """Dataset manifest failed to parse or validate."""

    category = "manifest"


class EvaluationError(SalfaceError):
    """A record could not be evaluated (for example an unreadable file)."""

    category = "evaluation"


class DivergedError(SalfaceError):
    """Training produced a non-finite loss."""

    category = "diverged"

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
