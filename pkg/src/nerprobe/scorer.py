"""Entity-level exact-match scoring with micro-averaged precision/recall/F1."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

from .corpus import DEFAULT_GENRE_MAP, Corpus, GenreMap
from .errors import AlignmentError
from .spans import Mention, decode_mentions

GROUPINGS = (None, "type", "source", "genre")


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    by_type: Mapping[str, "MatchCounts"] = field(default_factory=dict)

    @property
    def gold(self) -> int:
        return self.tp + self.fn

    @property
    def predicted(self) -> int:
        return self.tp + self.fp

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        merged = dict(self.by_type)
        for t, c in other.by_type.items():
            merged[t] = merged[t] + c if t in merged else c
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn,
                           dict(sorted(merged.items())))

    def swapped(self) -> "MatchCounts":
        return MatchCounts(self.tp, self.fn, self.fp,
                           {t: c.swapped() for t, c in self.by_type.items()})


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


def prf(c: MatchCounts) -> PRF:
    p = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return PRF(p, r, f)


def count_matches(gold: Sequence[Sequence[Mention]], pred: Sequence[Sequence[Mention]]) -> MatchCounts:
    """Pool exact (type, start, end) matches over aligned sentences."""
    if len(gold) != len(pred):
        raise AlignmentError(f"gold has {len(gold)} sentences, pred has {len(pred)}")
    tp: dict[str, int] = defaultdict(int)
    ng: dict[str, int] = defaultdict(int)
    np_: dict[str, int] = defaultdict(int)
    for g, p in zip(gold, pred):
        for m in g:
            ng[m.entity_type] += 1
        for m in p:
            np_[m.entity_type] += 1
        if not g or not p:
            continue
        gk = Counter(m.key for m in g)
        pk = Counter(m.key for m in p)
        for key, n in gk.items():
            hit = pk.get(key)
            if hit:
                tp[key[0]] += min(n, hit)
    by_type = {}
    for t in sorted(set(ng) | set(np_)):
        k = tp.get(t, 0)
        by_type[t] = MatchCounts(k, np_[t] - k, ng[t] - k)
    return MatchCounts(
        sum(c.tp for c in by_type.values()),
        sum(c.fp for c in by_type.values()),
        sum(c.fn for c in by_type.values()),
        by_type,
    )


@dataclass(frozen=True)
class GroupScore:
    """Counts for one group; ``prf`` is None when the group has no gold mentions."""

    counts: MatchCounts
    prf: PRF | None

    @classmethod
    def from_counts(cls, counts: MatchCounts) -> "GroupScore":
        return cls(counts, prf(counts) if counts.gold else None)

    @property
    def gold(self) -> int:
        return self.counts.gold


@dataclass(frozen=True)
class ScoreReport:
    counts: MatchCounts
    prf: PRF
    by_type: Mapping[str, GroupScore]
    by_source: Mapping[str, GroupScore] = field(default_factory=dict)
    by_genre: Mapping[str, GroupScore] = field(default_factory=dict)

    @property
    def macro_f1(self) -> float | None:
        """Unweighted mean of per-type F1 over types with gold mentions (auxiliary)."""
        fs = [g.prf.f1 for g in self.by_type.values() if g.prf is not None]
        return sum(fs) / len(fs) if fs else None


def check_alignment(gold: Corpus, pred: Corpus, check_surfaces: bool = False) -> None:
    if len(gold) != len(pred):
        i = min(len(gold), len(pred))
        raise AlignmentError(
            f"sentence count mismatch: gold has {len(gold)}, pred has {len(pred)} "
            f"(first unmatched sentence index {i})", i)
    for i, (g, p) in enumerate(zip(gold.sentences, pred.sentences)):
        if len(g) != len(p):
            raise AlignmentError(
                f"sentence {i}: gold has {len(g)} tokens, pred has {len(p)}", i)
        if check_surfaces and g.words != p.words:
            raise AlignmentError(f"sentence {i}: token surfaces differ", i)


def _group_order(keys, preferred: Sequence[str]) -> list[str]:
    keys = set(keys)
    first = [k for k in preferred if k in keys]
    return first + sorted(keys - set(first))


def score(gold: Corpus, pred: Corpus, group_by: str | None = None,
          gm: GenreMap = DEFAULT_GENRE_MAP, check_surfaces: bool = False,
          strict: bool = False) -> ScoreReport:
    """Score ``pred`` against ``gold``.

    Per-type scores are always computed. ``group_by="source"`` or
    ``"genre"`` adds per-group scores, each pooled only over the sentences of
    that group; grouping uses the gold corpus's source labels.
    """
    if group_by not in GROUPINGS:
        raise ValueError(f"group_by must be one of {GROUPINGS}, got {group_by!r}")
    check_alignment(gold, pred, check_surfaces)
    gm_ = [decode_mentions(s.tags, strict=strict) for s in gold.sentences]
    pm_ = [decode_mentions(s.tags, strict=strict) for s in pred.sentences]
    total = count_matches(gm_, pm_)
    by_type = {t: GroupScore.from_counts(c) for t, c in total.by_type.items()}

    by_source: dict[str, GroupScore] = {}
    by_genre: dict[str, GroupScore] = {}
    if group_by in ("source", "genre"):
        keyfn = (lambda s: s.source) if group_by == "source" else (lambda s: gm[s.source])
        members: dict[str, list[int]] = defaultdict(list)
        for i, s in enumerate(gold.sentences):
            members[keyfn(s)].append(i)
        preferred = [s for s, _ in gm.items()] if group_by == "source" else list(gm.genres)
        groups = {
            k: GroupScore.from_counts(count_matches([gm_[i] for i in members[k]],
                                                    [pm_[i] for i in members[k]]))
            for k in _group_order(members, preferred)
        }
        if group_by == "source":
            by_source = groups
        else:
            by_genre = groups
    return ScoreReport(total, prf(total), by_type, by_source, by_genre)


class RankedType(NamedTuple):
    entity_type: str
    gold: int
    prf: PRF | None


def rank_types(report: ScoreReport, k: int) -> tuple[list[RankedType], list[RankedType]]:
    """The ``k`` most and ``k`` least frequent types by gold mention count.

    Ties break alphabetically in both lists. Types that only occur in the
    predictions are not ranked.
    """
    if k < 1:
        raise ValueError("k must be positive")
    rows = [RankedType(t, g.gold, g.prf) for t, g in report.by_type.items() if g.gold > 0]
    most = sorted(rows, key=lambda r: (-r.gold, r.entity_type))[:k]
    least = sorted(rows, key=lambda r: (r.gold, r.entity_type))[:k]
    return most, least
