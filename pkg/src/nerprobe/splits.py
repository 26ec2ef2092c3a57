"""Random train/dev/test splits, cross-genre file sets, entity-token overlap."""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import SCHEMA_VERSION, __version__
from .corpus import DEFAULT_GENRE_MAP, Corpus, FormatConfig, GenreMap, filter_corpus, write_conll
from .errors import NerProbeError
from .rng import SplitMix64, derive_seed
from .spans import decode_mentions

PARTS = ("train", "dev", "test")


def _check_proportions(proportions: Sequence[float]) -> tuple[float, float, float]:
    if len(proportions) != 3:
        raise ValueError("need exactly three proportions (train, dev, test)")
    props = tuple(float(p) for p in proportions)
    if any(not 0.0 <= p <= 1.0 for p in props):
        raise ValueError(f"proportions must lie in [0, 1], got {props}")
    if abs(sum(props) - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {sum(props)!r}")
    return props  # type: ignore[return-value]


@dataclass(frozen=True)
class SplitSpec:
    proportions: tuple[float, float, float]
    seed: int
    n_splits: int = 1

    def __post_init__(self):
        object.__setattr__(self, "proportions", _check_proportions(self.proportions))
        if self.n_splits < 1:
            raise ValueError("n_splits must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def proportions_from_counts(train: int, dev: int, test: int) -> tuple[float, float, float]:
    """Proportions of a reference split, e.g. the sentence counts of a standard split."""
    total = train + dev + test
    if total <= 0:
        raise ValueError("reference split is empty")
    return (train / total, dev / total, test / total)


def largest_remainder(n: int, proportions: Sequence[float]) -> list[int]:
    """Integer sizes summing to ``n``: floors of the quotas, leftovers to the
    largest fractional parts (earlier parts win ties)."""
    quotas = [p * n for p in proportions]
    sizes = [math.floor(q) for q in quotas]
    left = n - sum(sizes)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[:left]:
        sizes[i] += 1
    return sizes


def _allocate(indices: list[int], proportions, rng: SplitMix64) -> list[list[int]]:
    rng.shuffle(indices)
    sizes = largest_remainder(len(indices), proportions)
    out, pos = [], 0
    for k in sizes:
        out.append(indices[pos:pos + k])
        pos += k
    return out


def random_split(c: Corpus, proportions: Sequence[float], seed: int, *,
                 stratify: bool = False, gm: GenreMap = DEFAULT_GENRE_MAP,
                 by_document: bool = False) -> tuple[Corpus, Corpus, Corpus]:
    """Sentence-level seeded split; each part keeps the original corpus order.

    ``stratify=True`` allocates within each genre separately, so every
    genre keeps the requested proportions.
    """
    if by_document:
        raise NotImplementedError("document-level splitting is not implemented")
    props = _check_proportions(proportions)
    if not len(c):
        raise ValueError("cannot split an empty corpus")
    rng = SplitMix64(seed)
    if stratify:
        groups: dict[str, list[int]] = defaultdict(list)
        for i, s in enumerate(c.sentences):
            groups[gm[s.source]].append(i)
        parts: list[list[int]] = [[], [], []]
        for g in sorted(groups):
            for acc, chunk in zip(parts, _allocate(groups[g], props, rng)):
                acc.extend(chunk)
    else:
        parts = _allocate(list(range(len(c))), props, rng)
    return tuple(Corpus(tuple(c.sentences[i] for i in sorted(p))) for p in parts)  # type: ignore[return-value]


def generate_splits(c: Corpus, spec: SplitSpec, **kw) -> list[tuple[Corpus, Corpus, Corpus]]:
    """Split ``i`` uses seed ``derive_seed(spec.seed, i)``."""
    return [random_split(c, spec.proportions, derive_seed(spec.seed, i), **kw)
            for i in range(spec.n_splits)]


def write_splits(out_dir: str | Path, splits, spec: SplitSpec,
                 cfg: FormatConfig = FormatConfig()) -> Path:
    """Write ``split_<i>/{train,dev,test}.conll`` and ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, triple in enumerate(splits):
        d = out / f"split_{i}"
        d.mkdir(exist_ok=True)
        for name, part in zip(PARTS, triple):
            (d / f"{name}.conll").write_text(write_conll(part, cfg), encoding="utf-8")
        entries.append({
            "index": i,
            "seed": derive_seed(spec.seed, i),
            "sizes": {name: len(part) for name, part in zip(PARTS, triple)},
        })
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "split_manifest",
        "toolkit_version": __version__,
        "seed": spec.seed,
        "seed_derivation": "splitmix64 output i+1 for base seed",
        "proportions": list(spec.proportions),
        "n_splits": spec.n_splits,
        "splits": entries,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


@dataclass(frozen=True)
class CrossGenreSets:
    train: Corpus
    dev: Corpus
    tests: dict[str, Corpus]
    train_genres: tuple[str, ...]
    dev_genre: str


def _genres(c: Corpus, gm: GenreMap) -> set[str]:
    return {gm[s] for s in c.sources}


def cross_genre_sets(train: Corpus, dev: Corpus, test: Corpus, mode: str, genre: str,
                     dev_genre: str | None = None,
                     gm: GenreMap = DEFAULT_GENRE_MAP) -> CrossGenreSets:
    """Genre-restricted train/dev plus one test corpus per genre.

    ``mode="single"`` trains on ``genre`` alone; ``mode="leave_one_out"``
    trains on every other genre. The dev genre defaults to ``genre`` in both
    modes (news-dev for news-only training; the held-out genre's dev set
    when leaving one out).
    """
    if mode not in ("single", "leave_one_out"):
        raise ValueError(f"unknown mode {mode!r}")
    dev_genre = dev_genre or genre
    train_present = _genres(train, gm)
    all_present = train_present | _genres(dev, gm) | _genres(test, gm)
    if genre not in all_present or (mode == "single" and genre not in train_present):
        raise NerProbeError(f"genre {genre!r} does not occur in the corpus")
    if dev_genre not in _genres(dev, gm):
        raise NerProbeError(f"genre {dev_genre!r} does not occur in the dev corpus")
    if mode == "single":
        train_genres = (genre,)
    else:
        train_genres = tuple(g for g in gm.genres if g in train_present and g != genre)
        if not train_genres:
            raise NerProbeError(f"no training genres left after holding out {genre!r}")
    order = list(gm.genres)
    tests = {g: filter_corpus(test, genres={g}, gm=gm)
             for g in sorted(_genres(test, gm), key=order.index)}
    return CrossGenreSets(
        filter_corpus(train, genres=set(train_genres), gm=gm),
        filter_corpus(dev, genres={dev_genre}, gm=gm),
        tests,
        train_genres,
        dev_genre,
    )


def write_cross_genre(out_dir: str | Path, sets: CrossGenreSets, mode: str, genre: str,
                      cfg: FormatConfig = FormatConfig()) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "train.conll").write_text(write_conll(sets.train, cfg), encoding="utf-8")
    (out / "dev.conll").write_text(write_conll(sets.dev, cfg), encoding="utf-8")
    for g, c in sets.tests.items():
        (out / f"test_{g}.conll").write_text(write_conll(c, cfg), encoding="utf-8")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "cross_genre_manifest",
        "toolkit_version": __version__,
        "mode": mode,
        "genre": genre,
        "train_genres": list(sets.train_genres),
        "dev_genre": sets.dev_genre,
        "sizes": {"train": len(sets.train), "dev": len(sets.dev),
                  **{f"test_{g}": len(c) for g, c in sets.tests.items()}},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


@dataclass(frozen=True)
class OverlapStats:
    """Entity-token overlap for one type; percentages are None when undefined.

    ``test_token_overlap_pct``: share of test entity-token instances whose
    surface also occurs as an entity token of the same type in train.
    ``train_unique_token_pct``: distinct train entity-token surfaces over
    train entity-token instances.
    """

    entity_type: str
    test_token_overlap_pct: float | None
    train_unique_token_pct: float | None
    test_tokens: int
    train_tokens: int
    train_distinct: int


def _entity_tokens(c: Corpus, entity_type: str) -> Counter:
    b, i = "B-" + entity_type, "I-" + entity_type
    out: Counter = Counter()
    for s in c.sentences:
        tags = s.tags
        if b not in tags and i not in tags:
            continue
        for m in decode_mentions(tags, s.words):
            if m.entity_type == entity_type:
                out.update(m.surface)
    return out


def overlap_stats(train: Corpus, test: Corpus, entity_type: str) -> OverlapStats:
    tr = _entity_tokens(train, entity_type)
    te = _entity_tokens(test, entity_type)
    n_test = sum(te.values())
    n_train = sum(tr.values())
    covered = sum(n for w, n in te.items() if w in tr)
    return OverlapStats(
        entity_type,
        100.0 * covered / n_test if n_test else None,
        100.0 * len(tr) / n_train if n_train else None,
        n_test,
        n_train,
        len(tr),
    )
