"""Exception types shared across the toolkit.

Every error raised on bad input data derives from :class:`PhdscoreError`
so the command line layer can map validation failures to a single exit
code while real I/O problems (missing files, unreadable audio) surface
as the usual ``OSError`` family.
"""

from __future__ import annotations


class PhdscoreError(Exception):
    """Base class for all validation errors raised by this package."""


class ParseError(PhdscoreError):
    """A line of an input file could not be parsed."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(PhdscoreError):
    """Two records in one file share an id."""


class UnknownSymbol(PhdscoreError):
    """A phoneme symbol is not part of the active inventory."""

    def __init__(self, line_no: int, symbol: str) -> None:
        super().__init__(f"line {line_no}: symbol {symbol!r} not in inventory")
        self.line_no = line_no
        self.symbol = symbol


class IllegalSymbol(PhdscoreError):
    """A reserved or malformed symbol appeared where it is not allowed."""


class EnsembleArityError(PhdscoreError):
    """An ensemble record does not carry exactly M hypotheses."""


class UnknownUtterance(PhdscoreError):
    """An ensemble or hypothesis references an utterance id not in the manifest."""


class OovWord(PhdscoreError):
    """A word has no entry in the lexicon."""


class EmptyStats(PhdscoreError):
    """Statistics were requested over an empty instance collection."""


class UnscoredPhoneme(PhdscoreError):
    """An utterance references a phoneme missing from the score table."""

    def __init__(self, symbol: str) -> None:
        super().__init__(f"no score available for phoneme {symbol!r}")
        self.symbol = symbol


class EmptyScores(PhdscoreError):
    """A score table with no rows was given where scores are required."""


class InvalidWeight(PhdscoreError):
    """A sampling weight or component weight is outside its legal range."""


class DegenerateLabels(PhdscoreError):
    """Clinical labels contain only one class, so ranking cannot be evaluated."""


class EmptyReference(PhdscoreError):
    """An error-rate computation received an empty reference."""


class SplitMismatch(PhdscoreError):
    """Two per-split rate tables do not cover the same splits."""


class FormatMismatch(PhdscoreError):
    """Audio files scheduled for concatenation disagree on format parameters."""


class UnsupportedEncoding(PhdscoreError):
    """An audio file is not 16-bit linear PCM."""


class InvalidProfile(PhdscoreError):
    """A simulated-speaker profile violates its constraints."""
