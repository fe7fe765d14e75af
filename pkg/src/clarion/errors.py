"""Exception taxonomy shared across the package.

Every file-format error carries the offending path and a 1-based line number
so that loaders never fail anonymously.
"""

from __future__ import annotations


class ClarionError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(ClarionError):
    """A structural problem in an input file."""

    def __init__(self, message: str, *, path: str | None = None, line_no: int | None = None):
        self.path = path
        self.line_no = line_no
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line_no is not None:
                prefix += f"{line_no}:"
            prefix += " "
        elif line_no is not None:
            prefix = f"line {line_no}: "
        super().__init__(prefix + message)


class MalformedRow(DataFormatError):
    """A data row does not match the declared column layout."""


class MissingColumn(DataFormatError):
    """A header is missing one of the required columns."""


class DuplicateId(DataFormatError):
    """An identifier (or key) occurs more than once."""


class EmptyQuestionText(DataFormatError):
    """A question row has no text after trimming whitespace."""


class UnknownMetric(DataFormatError):
    """A metric name outside the accepted vocabulary."""


class ValueOutOfRange(DataFormatError):
    """A numeric value outside its permitted interval."""


class EmptyBank(ClarionError):
    """Index construction was asked to run over an empty question bank."""


class UnknownQuestionId(ClarionError):
    """A question id that is not present in the index."""


class BadIndexFile(ClarionError):
    """A serialized index file is corrupt or has the wrong magic/version."""


class EmptyInput(ClarionError):
    """A dataset build was asked to run over empty records or an empty bank."""


class RemoteUnavailable(ClarionError):
    """The remote scorer endpoint could not produce a usable response."""


class MissingPrecomputedScore(ClarionError):
    """A (context, question) pair is absent from a precomputed score file."""


class NoCandidates(ClarionError):
    """Recall produced no candidates for the current request."""


class ConfigError(ClarionError):
    """A configuration file or value is invalid."""
