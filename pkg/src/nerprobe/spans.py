"""BIO tags <-> typed mentions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Sentence, is_valid_tag
from .errors import SpanError, TagError


@dataclass(frozen=True, slots=True)
class Mention:
    """A typed half-open token range ``[start, end)``.

    ``surface`` is informational: it is empty when the mention was decoded
    from tags alone, and it never takes part in equality or hashing.
    """

    entity_type: str
    start: int
    end: int
    surface: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise SpanError(f"bad mention range [{self.start}, {self.end})")
        if self.surface and len(self.surface) != self.end - self.start:
            raise SpanError("surface length does not match mention length")

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.entity_type, self.start, self.end)


def decode_mentions(tags: Sequence[str], words: Sequence[str] | None = None,
                    strict: bool = False) -> list[Mention]:
    """Decode a BIO tag sequence into mentions.

    A ``B-`` tag always opens a mention. An ``I-X`` that follows ``O``, the
    sentence start or a different type opens a new ``X`` mention (the
    conlleval convention); with ``strict=True`` it raises instead.
    """
    out: list[Mention] = []
    cur = None
    start = 0
    for i, tag in enumerate(tags):
        if tag == "O":
            if cur is not None:
                out.append(Mention(cur, start, i, tuple(words[start:i]) if words else ()))
                cur = None
            continue
        if not is_valid_tag(tag):
            raise TagError(tag, i)
        typ = tag[2:]
        if tag[0] == "B" or typ != cur:
            if strict and tag[0] == "I":
                raise SpanError(f"dangling {tag!r} at position {i}")
            if cur is not None:
                out.append(Mention(cur, start, i, tuple(words[start:i]) if words else ()))
            cur = typ
            start = i
    if cur is not None:
        n = len(tags)
        out.append(Mention(cur, start, n, tuple(words[start:n]) if words else ()))
    return out


def sentence_mentions(s: Sentence, strict: bool = False) -> list[Mention]:
    return decode_mentions(s.tags, s.words, strict=strict)


def encode_mentions(mentions: Sequence[Mention], length: int) -> list[str]:
    tags = ["O"] * length
    prev_end = 0
    for m in mentions:
        if m.start < prev_end:
            raise SpanError(f"mentions overlap or are unsorted at {m.entity_type}({m.start},{m.end})")
        if m.end > length:
            raise SpanError(f"mention {m.entity_type}({m.start},{m.end}) exceeds length {length}")
        tags[m.start] = "B-" + m.entity_type
        for i in range(m.start + 1, m.end):
            tags[i] = "I-" + m.entity_type
        prev_end = m.end
    return tags
