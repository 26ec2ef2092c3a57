"""Exception hierarchy.

Everything raised for bad input data derives from :class:`NerProbeError`
(itself a ``ValueError``), so callers can tell data problems apart from
I/O failures and programming errors.
"""

from __future__ import annotations


class NerProbeError(ValueError):
    pass


class ParseError(NerProbeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TagError(NerProbeError):
    def __init__(self, tag: str, position: int | None = None):
        self.tag = tag
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"invalid BIO tag {tag!r}{where}")


class SpanError(NerProbeError):
    pass


class AlignmentError(NerProbeError):
    def __init__(self, message: str, sentence: int | None = None):
        self.sentence = sentence
        super().__init__(message)


class UnmappedSourceError(NerProbeError):
    def __init__(self, source: str):
        self.source = source
        super().__init__(f"source {source!r} has no genre mapping")


class LexiconCoverageError(NerProbeError):
    def __init__(self, locale: str, kind: str, gender: str):
        self.bucket = (locale, kind, gender)
        super().__init__(
            f"lexicon has no entries for locale={locale} kind={kind} gender={gender}"
        )


class PlanError(NerProbeError):
    pass


class DegenerateVarianceError(NerProbeError):
    pass


class ReportError(NerProbeError):
    pass
