"""BIO-annotated corpora: data model, CoNLL column I/O, source/genre handling.

Document identity survives a write/parse round trip through the docstart
line, which carries ``key=value`` fields::

    -DOCSTART- doc_id=bn/cnn/01/cnn_0001 source=bn index=3

Every field is optional. ``source`` is only written when it differs from
what the configured source policy would infer, and ``index`` only when the
document segment does not start at sentence 0. Fields without ``=`` (as in
the CoNLL-2003 ``-DOCSTART- -X- O O``) are ignored.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, TextIO

from .errors import NerProbeError, ParseError, TagError, UnmappedSourceError

TAG_RE = re.compile(r"(?:O|[BI]-[A-Za-z0-9_]+)")
_SURFACE_RE = re.compile(r"\S+")

UNKNOWN_SOURCE = "unknown"
ONTONOTES_SOURCES = ("bc", "bn", "mz", "nw", "tc", "wb")


@lru_cache(maxsize=4096)
def is_valid_tag(tag: str) -> bool:
    return TAG_RE.fullmatch(tag) is not None


class Token(NamedTuple):
    surface: str
    tag: str


@dataclass(frozen=True, slots=True)
class Sentence:
    tokens: tuple[Token, ...]
    doc_id: str = ""
    source: str = UNKNOWN_SOURCE
    index: int = 0

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(Token(*t) for t in self.tokens))
        if not self.tokens:
            raise NerProbeError("a sentence needs at least one token")
        for pos, (surface, tag) in enumerate(self.tokens):
            if not is_valid_tag(tag):
                raise TagError(tag, pos)
            if _SURFACE_RE.fullmatch(surface) is None:
                raise NerProbeError(f"token surface {surface!r} is empty or contains whitespace")
        if self.index < 0:
            raise NerProbeError("sentence index must be non-negative")

    @classmethod
    def from_lists(cls, words: Iterable[str], tags: Iterable[str], **kw) -> "Sentence":
        return cls(tuple(Token(w, t) for w, t in zip(words, tags, strict=True)), **kw)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t.tag for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True, slots=True)
class Corpus:
    """An ordered, immutable collection of sentences.

    The known-source set is whatever sources the sentences carry.
    """

    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self):
        if not isinstance(self.sentences, tuple):
            object.__setattr__(self, "sentences", tuple(self.sentences))
        seen = set()
        for s in self.sentences:
            key = (s.doc_id, s.index)
            if key in seen:
                raise NerProbeError(f"duplicate sentence key doc_id={s.doc_id!r} index={s.index}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    @property
    def sources(self) -> frozenset[str]:
        return frozenset(s.source for s in self.sentences)

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


class GenreMap:
    """Total mapping from source label to genre label.

    Genre order (used when rendering tables) is the order of first
    appearance among the mapping's values.
    """

    def __init__(self, mapping: Mapping[str, str]):
        self._map = dict(mapping)

    def __getitem__(self, source: str) -> str:
        try:
            return self._map[source]
        except KeyError:
            raise UnmappedSourceError(source) from None

    def __contains__(self, source: str) -> bool:
        return source in self._map

    def __eq__(self, other):
        return isinstance(other, GenreMap) and self._map == other._map

    def __repr__(self):
        return f"GenreMap({self._map!r})"

    def items(self):
        return self._map.items()

    @property
    def genres(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self._map.values()))

    def sources_of(self, genre: str) -> frozenset[str]:
        return frozenset(s for s, g in self._map.items() if g == genre)


DEFAULT_GENRE_MAP = GenreMap(
    {"bn": "news", "mz": "news", "nw": "news", "bc": "bc", "tc": "tc", "wb": "wb"}
)


@dataclass(frozen=True)
class FormatConfig:
    """How to read and write a column file.

    ``separator=None`` splits on any run of whitespace when reading; writing
    then uses a single space. ``source_policy`` is one of ``"prefix"`` (text
    of the doc id before the first ``/``), ``"fixed"`` (``fixed_source`` for
    every sentence) or ``"map"`` (``source_map`` keyed by doc id).
    """

    separator: str | None = None
    token_col: int = 0
    tag_col: int | str = "last"
    comment_prefix: str | None = None
    docstart: str = "-DOCSTART-"
    source_policy: str = "prefix"
    fixed_source: str | None = None
    source_map: Mapping[str, str] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.tag_col != "last" and (not isinstance(self.tag_col, int) or self.tag_col < 0):
            raise ValueError(f"tag_col must be a non-negative int or 'last', got {self.tag_col!r}")
        if self.token_col < 0:
            raise ValueError("token_col must be non-negative")
        if self.tag_col == self.token_col:
            raise ValueError("token and tag columns must differ")
        if self.separator is not None and (len(self.separator) != 1 or self.separator == "\n"):
            raise ValueError("separator must be a single non-newline character or None")
        if self.source_policy not in ("prefix", "fixed", "map"):
            raise ValueError(f"unknown source policy {self.source_policy!r}")
        if self.source_policy == "fixed" and not self.fixed_source:
            raise ValueError("fixed source policy needs fixed_source")
        if self.source_policy == "map" and self.source_map is None:
            raise ValueError("map source policy needs source_map")

    def infer_source(self, doc_id: str) -> str:
        if self.source_policy == "fixed":
            return self.fixed_source  # type: ignore[return-value]
        if self.source_policy == "map":
            try:
                return self.source_map[doc_id]  # type: ignore[index]
            except KeyError:
                raise NerProbeError(f"doc_id {doc_id!r} missing from source map") from None
        if "/" in doc_id:
            return doc_id.split("/", 1)[0]
        return UNKNOWN_SOURCE

    @property
    def write_separator(self) -> str:
        return self.separator or " "


def genre_of(source: str, gm: GenreMap = DEFAULT_GENRE_MAP) -> str:
    return gm[source]


def _lines(stream: TextIO | str | Iterable[str]) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def _parse_docstart(fields: list[str]) -> dict[str, str]:
    out = {}
    for f in fields:
        if "=" in f:
            k, v = f.split("=", 1)
            out[k] = v
    return out


def parse_conll(stream: TextIO | str | Iterable[str], cfg: FormatConfig = FormatConfig()) -> Corpus:
    """Read a CoNLL-style column file into a :class:`Corpus`.

    Blank lines end sentences, docstart lines end sentences and open a new
    document segment. Raises :class:`ParseError` with a 1-based line number
    on short rows or invalid tags.
    """
    sep = cfg.separator
    need = cfg.token_col + 1 if cfg.tag_col == "last" else max(cfg.token_col, cfg.tag_col) + 1
    if cfg.tag_col == "last":
        need = max(need, 2)
    tag_col = -1 if cfg.tag_col == "last" else cfg.tag_col

    sentences: list[Sentence] = []
    rows: list[Token] = []
    first_line = 0
    doc_id, source, index = "", None, 0
    n_docstarts = 0

    def flush():
        nonlocal rows, index
        if rows:
            try:
                src = source if source is not None else cfg.infer_source(doc_id)
                sentences.append(Sentence(tuple(rows), doc_id, src, index))
            except NerProbeError as e:
                raise ParseError(str(e), first_line) from None
            index += 1
            rows = []

    for lineno, raw in enumerate(_lines(stream), 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if cfg.comment_prefix and line.startswith(cfg.comment_prefix):
            continue
        if line.split(None, 1)[0] == cfg.docstart:
            flush()
            n_docstarts += 1
            meta = _parse_docstart(line.split()[1:])
            doc_id = meta.get("doc_id", f"doc{n_docstarts}")
            source = meta.get("source")
            try:
                index = int(meta.get("index", 0))
            except ValueError:
                raise ParseError(f"bad docstart index {meta['index']!r}", lineno) from None
            continue
        fields = line.split() if sep is None else line.split(sep)
        if len(fields) < need:
            raise ParseError(f"expected at least {need} columns, found {len(fields)}", lineno)
        tag = fields[tag_col]
        if not is_valid_tag(tag):
            raise ParseError(f"invalid BIO tag {tag!r}", lineno)
        if not rows:
            first_line = lineno
        rows.append(Token(fields[cfg.token_col], tag))
    flush()
    try:
        return Corpus(tuple(sentences))
    except NerProbeError as e:
        raise ParseError(str(e)) from None


def read_conll(path: str | Path, cfg: FormatConfig = FormatConfig()) -> Corpus:
    with open(path, encoding="utf-8") as f:
        return parse_conll(f, cfg)


def _safe_infer(cfg: FormatConfig, doc_id: str) -> str | None:
    try:
        return cfg.infer_source(doc_id)
    except NerProbeError:
        return None


def write_conll(c: Corpus, cfg: FormatConfig = FormatConfig()) -> str:
    sep = cfg.write_separator
    if cfg.tag_col == "last":
        ncols = max(cfg.token_col + 2, 2)
        tag_col = ncols - 1
    else:
        ncols = max(cfg.token_col, cfg.tag_col) + 1
        tag_col = cfg.tag_col
    filler = ["_"] * ncols
    check_sep = not sep.isspace()

    out: list[str] = []
    prev: Sentence | None = None
    for s in c.sentences:
        if prev is None:
            natural = s.doc_id == "" and s.index == 0 and s.source == _safe_infer(cfg, "")
        else:
            natural = (s.doc_id == prev.doc_id and s.index == prev.index + 1
                       and s.source == prev.source)
        if not natural:
            if any(ch.isspace() for ch in s.doc_id + s.source):
                raise NerProbeError(f"doc_id/source may not contain whitespace: {s.doc_id!r}")
            head = [cfg.docstart, f"doc_id={s.doc_id}"]
            if s.source != _safe_infer(cfg, s.doc_id):
                head.append(f"source={s.source}")
            if s.index:
                head.append(f"index={s.index}")
            out.append(" ".join(head))
            out.append("")
        for surface, tag in s.tokens:
            if check_sep and sep in surface:
                raise NerProbeError(f"token {surface!r} contains the separator {sep!r}")
            row = list(filler)
            row[cfg.token_col] = surface
            row[tag_col] = tag
            out.append(sep.join(row))
        out.append("")
        prev = s
    return "\n".join(out[:-1]) + "\n" if out else ""


def save_conll(c: Corpus, path: str | Path, cfg: FormatConfig = FormatConfig()) -> None:
    Path(path).write_text(write_conll(c, cfg), encoding="utf-8")


def filter_corpus(c: Corpus, *, sources: Iterable[str] | None = None,
                  genres: Iterable[str] | None = None,
                  gm: GenreMap = DEFAULT_GENRE_MAP) -> Corpus:
    """Keep sentences whose source (or genre) is selected, in corpus order."""
    if (sources is None) == (genres is None):
        raise ValueError("pass exactly one of sources= or genres=")
    selector = frozenset(sources if sources is not None else genres)
    if not selector:
        raise ValueError("selector must be non-empty")
    if sources is not None:
        keep = [s for s in c.sentences if s.source in selector]
    else:
        keep = [s for s in c.sentences if gm[s.source] in selector]
    return Corpus(tuple(keep))


def _read_tsv_pairs(stream: TextIO | str, what: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(_lines(stream), 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ParseError(f"expected '<key>\\t<{what}>'", lineno)
        out[parts[0]] = parts[1]
    return out


def load_genre_map(stream: TextIO | str) -> GenreMap:
    """Lines of ``source<TAB>genre``."""
    return GenreMap(_read_tsv_pairs(stream, "genre"))


def load_source_map(stream: TextIO | str) -> dict[str, str]:
    """Lines of ``doc_id<TAB>source``."""
    return _read_tsv_pairs(stream, "source")
