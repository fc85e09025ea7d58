"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Sequence


class NoiseCheckError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(NoiseCheckError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(InvalidInputError):
    """The input is well-formed but the quantity is undefined for it
    (constant sequence in a correlation, zero vector in a cosine)."""


class MissingVocabularyError(NoiseCheckError, LookupError):
    """Words required by a dataset are absent from a vector table."""

    def __init__(self, words: Sequence[str], limit: int = 10):
        self.words = tuple(words)
        shown = ", ".join(self.words[:limit])
        more = len(self.words) - limit
        if more > 0:
            shown += f", ... ({more} more)"
        super().__init__(f"{len(self.words)} word(s) missing from embeddings: {shown}")


class ParseError(NoiseCheckError, ValueError):
    """Malformed input file. Carries the 1-based line number and the offending text."""

    def __init__(self, message: str, line: int | None = None, content: str | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.content = content
        self.source = source
        where = source or "<input>"
        if line is not None:
            where += f":{line}"
        text = f"{where}: {message}"
        if content is not None:
            text += f" [{content[:80]!r}]"
        super().__init__(text)


class DuplicatePairError(ParseError):
    """The same unordered word pair occurs twice in a dataset file."""


class ExperimentError(NoiseCheckError, RuntimeError):
    """A repetition of the stability experiment failed; the cell is aborted."""
